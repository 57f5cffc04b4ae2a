use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use fockcharge::runner::{self, ExperimentConfig, EXPERIMENTS};
use fockcharge::{Error, Result};

/// Region-charge experiments for the second-quantized Dirac field.
#[derive(Debug, Parser)]
#[command(name = "fockcharge", version, after_help = experiments_help())]
struct Args {
    /// Experiment to run (alternatively --experiment).
    #[arg(value_name = "EXPERIMENT")]
    name: Option<String>,
    #[arg(long)]
    experiment: Option<String>,
    /// `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dirac mass.
    #[arg(long)]
    m: Option<String>,
    /// Largest shell radius K.
    #[arg(long)]
    shells: Option<String>,
    /// Momentum cutoff P of the quadrature grid.
    #[arg(long)]
    cutoff: Option<String>,
    /// Quadrature panels per unit wavenumber.
    #[arg(long)]
    panels: Option<String>,
    /// Gauss-Legendre order per panel.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Result file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Omit the `# fockcharge ... generated=` line.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, env = "FOCKCHARGE_THREADS")]
    threads: Option<String>,
}

fn experiments_help() -> String {
    format!("Experiments: {}", EXPERIMENTS.join(", "))
}

fn build_config(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    match (&args.name, &args.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::InvalidConfig(format!("two experiments given: '{a}' and '{b}'")));
        }
        (Some(e), _) | (None, Some(e)) => cfg.experiment = e.clone(),
        (None, None) => {}
    }
    let flags = [
        ("m", &args.m),
        ("shells", &args.shells),
        ("cutoff", &args.cutoff),
        ("panels", &args.panels),
        ("order", &args.order),
        ("seed", &args.seed),
        ("format", &args.format),
        ("threads", &args.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(path) = &args.output {
        cfg.output = Some(path.clone());
    }
    if args.no_timestamp {
        cfg.timestamp = false;
    }
    if cfg.experiment.is_empty() {
        return Err(Error::InvalidConfig(format!("no experiment given; choose one of {}", EXPERIMENTS.join(", "))));
    }
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> Result<runner::Report> {
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    let report = runner::run(cfg)?;
    let generated = cfg
        .timestamp
        .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let text = runner::render(&report, cfg, generated)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = build_config(&args).and_then(|cfg| {
        let report = execute(&cfg)?;
        // Keep standard output clean for the table when it goes there.
        let lines: Vec<String> = report.checks.iter().map(|c| c.summary()).collect();
        for l in &lines {
            if cfg.output.is_some() {
                println!("{l}");
            } else {
                eprintln!("{l}");
            }
        }
        Ok(report)
    });
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    ExitCode::from(runner::exit_code(&outcome) as u8)
}
