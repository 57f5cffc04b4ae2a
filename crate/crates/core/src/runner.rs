//! Experiment runner: named suites producing a result table and a list of
//! pass/fail contracts.

mod config;
mod output;
mod suites;

pub use config::{ExperimentConfig, Format};
pub use output::{Check, Relation, Table, Value};
pub use suites::{comparison_order, interleaved_seed, qtilde_witness, QTILDE_WITNESS_SEED};

use crate::error::{Error, Result};

pub const EXPERIMENTS: [&str; 12] = [
    "car-check",
    "spectrum",
    "additivity",
    "cbasis",
    "qtilde",
    "weighted",
    "total-charge",
    "aligned",
    "bessel-check",
    "vacuum-divergence",
    "decomposition",
    "oracle-equivalence",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment.as_str() {
        "car-check" => suites::car_check(cfg),
        "spectrum" => suites::spectrum(cfg),
        "additivity" => suites::additivity(cfg),
        "cbasis" => suites::cbasis(cfg),
        "qtilde" => suites::qtilde(cfg),
        "weighted" => suites::weighted(cfg),
        "total-charge" => suites::total_charge(cfg),
        "aligned" => suites::aligned(cfg),
        "bessel-check" => suites::bessel_check(cfg),
        "vacuum-divergence" => suites::vacuum_divergence(cfg),
        "decomposition" => suites::decomposition(cfg),
        "oracle-equivalence" => suites::oracle_equivalence(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

/// The output document. CSV output starts with a `#` provenance line when
/// `generated` is given; JSON output never carries one.
pub fn render(report: &Report, cfg: &ExperimentConfig, generated: Option<u64>) -> Result<String> {
    let body = report.table.render(cfg.format)?;
    Ok(match (cfg.format, generated) {
        (Format::Csv, Some(secs)) => format!(
            "# fockcharge {} seed={} generated={secs}\n{body}",
            cfg.experiment, cfg.seed
        ),
        _ => body,
    })
}

/// Process exit status for an outcome: 0 pass, 1 failed contract, 2 bad input.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(Error::UnknownExperiment(_))
        | Err(Error::InvalidConfig(_))
        | Err(Error::InvalidGrid(_))
        | Err(Error::GridTooSmall { .. })
        | Err(Error::TooFewShells { .. })
        | Err(Error::NegativeMass(_)) => 2,
        Err(_) => 1,
    }
}
