use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

/// Everything needed to run one experiment reproducibly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub m: f64,
    /// Largest shell radius `K`.
    pub shells: u32,
    pub cutoff: u32,
    pub panels: u32,
    pub order: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub timestamp: bool,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            m: 1.0,
            shells: 4,
            cutoff: 40,
            panels: 2,
            order: 6,
            seed: 1,
            output: None,
            format: Format::Csv,
            timestamp: true,
            threads: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key} must be true or false, got '{value}'"))),
    }
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = value.to_string(),
            "m" => {
                let m: f64 = parse_num(key, value)?;
                if !(m >= 0.0) || !m.is_finite() {
                    return Err(Error::InvalidConfig(format!("m must be a non-negative number, got {value}")));
                }
                self.m = m;
            }
            "shells" => self.shells = parse_num(key, value)?,
            "cutoff" => self.cutoff = parse_num(key, value)?,
            "panels" => self.panels = parse_num(key, value)?,
            "order" => self.order = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = Format::parse(value)?,
            "timestamp" => self.timestamp = parse_bool(key, value)?,
            "threads" => {
                let n: usize = parse_num(key, value)?;
                if n == 0 {
                    return Err(Error::InvalidConfig("threads must be positive".into()));
                }
                self.threads = Some(n);
            }
            other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# divergence run\nexperiment = vacuum-divergence\nm = 0.5  # lighter\n\nshells=3\nformat = json\ntimestamp = false\n")
            .unwrap();
        assert_eq!(c.experiment, "vacuum-divergence");
        assert_eq!(c.m, 0.5);
        assert_eq!(c.shells, 3);
        assert_eq!(c.format, Format::Json);
        assert!(!c.timestamp);
        assert_eq!(c.cutoff, 40);
    }

    #[test]
    fn rejects_bad_lines() {
        let mut c = ExperimentConfig::default();
        assert!(c.apply_text("shells 3").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("m = -1").is_err());
        assert!(c.apply_text("format = xml").is_err());
        assert!(c.apply_text("threads = 0").is_err());
    }
}
