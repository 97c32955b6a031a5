//! Reproducible experiment drivers behind the command-line interface.
//!
//! Every command returns its output files in memory; [`Outputs::write_to`]
//! puts them on disk. Results never depend on the worker count: each trial
//! draws from its own stream keyed by `(cell, trial)` and results are
//! collected in index order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{Error, Result};

mod analysis;
pub mod config;
mod fluid_check;
mod oracle;
pub mod stats;
mod trials;

pub use analysis::{cmd_allocations, cmd_classify, cmd_critical_curve};
pub use config::{ExperimentConfig, Mode};
pub use fluid_check::cmd_fluid_check;
pub use oracle::cmd_oracle_check;
pub use trials::{cmd_simulate, cmd_sweep_alpha, run_trials, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSettings {
    pub seed: u64,
    pub workers: usize,
}

/// Named output files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub files: BTreeMap<String, String>,
}

impl Outputs {
    pub fn insert(&mut self, name: &str, content: String) {
        self.files.insert(name.to_string(), content);
    }

    pub fn insert_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Config(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.insert(name, text);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, content) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, content)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub(crate) fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Comma-joined CSV row.
pub(crate) fn csv_row<I, T>(fields: I) -> String
where
    I: IntoIterator<Item = T>,
    T: std::fmt::Display,
{
    let mut line = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{f}");
    }
    line.push('\n');
    line
}

/// Space-separated rows for plotting tools.
pub(crate) fn dat_row(fields: &[f64]) -> String {
    let mut line = fields
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    line.push('\n');
    line
}

pub fn run(mode: Mode, config: &ExperimentConfig, settings: &RunSettings) -> Result<Outputs> {
    if let Some(m) = config.mode {
        if m != mode {
            return Err(Error::Config(format!(
                "config mode is {} but the command is {}",
                m.name(),
                mode.name()
            )));
        }
    }
    let missing = || Error::Config(format!("missing [{}] section", mode.name().replace('-', "_")));
    match mode {
        Mode::Simulate => cmd_simulate(config.simulate.as_ref().ok_or_else(missing)?, settings),
        Mode::SweepAlpha => {
            cmd_sweep_alpha(config.sweep_alpha.as_ref().ok_or_else(missing)?, settings)
        }
        Mode::Classify => cmd_classify(config.classify.as_ref().ok_or_else(missing)?, settings),
        Mode::CriticalCurve => {
            cmd_critical_curve(config.critical_curve.as_ref().ok_or_else(missing)?, settings)
        }
        Mode::FluidCheck => {
            cmd_fluid_check(config.fluid_check.as_ref().ok_or_else(missing)?, settings)
        }
        Mode::Allocations => {
            cmd_allocations(config.allocations.as_ref().ok_or_else(missing)?, settings)
        }
        Mode::OracleCheck => cmd_oracle_check(
            &config.oracle_check.clone().unwrap_or_default(),
            settings,
        ),
    }
}
