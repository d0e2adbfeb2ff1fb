//! Command-line front end: layered configuration, scenario dispatch and
//! artifact emission.
//!
//! Exit status: 0 success, 2 configuration, 3 validation, 4 integrator
//! abort, 5 fit failure (results still written), 6 I/O.

mod config;
mod dispatch;

use std::ffi::OsString;
use std::io::IsTerminal;
use std::path::PathBuf;

use clap::Parser;

pub use config::{
    ChiSection, DetuningSection, Grid, OscillationSection, Overrides, ProjectedSection, RunConfig,
    Scenario, SnailSection, StarkSection, SweepSection, PHASE_MAP_XI, PROJECTED_RAMP,
};
pub use dispatch::{dispatch, Category, Outcome, MANIFEST};

#[derive(Debug, Parser)]
#[command(name = "kerrcat", version, about = "Kerr-cat / transmon beam-splitter simulations and calibration fits")]
pub struct Args {
    /// TOML config, or a previous run's manifest.json to rerun it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario name, e.g. fig2-map or stark-fit.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override one config value, e.g. `params.alpha=1.6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            scenario: self.scenario.clone(),
            out: self.out.clone(),
            workers: self.workers,
            seed: self.seed,
            set: self.set.clone(),
        }
    }

    pub fn resolve(&self) -> crate::Result<RunConfig> {
        let o = self.overrides();
        match &self.config {
            Some(p) => RunConfig::load(p, &o),
            None => RunConfig::parse("", &o),
        }
    }
}

/// Parses arguments, runs, and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Category::Config.exit_code() } else { 0 };
        }
    };
    let result = args.resolve().and_then(|cfg| dispatch(&cfg));
    match result {
        Ok(outcome) => {
            let verbose = std::io::stderr().is_terminal();
            if verbose {
                eprintln!("wrote {} artifacts", outcome.artifacts.len() + 1);
            }
            if outcome.fit_failures.is_empty() {
                0
            } else {
                for f in &outcome.fit_failures {
                    eprintln!("fit failed: {f}");
                }
                Category::Fit.exit_code()
            }
        }
        Err(e) => {
            let cat = Category::of(&e);
            eprintln!("error ({}): {e}", serde_json::to_value(cat).expect("category").as_str().unwrap_or(""));
            cat.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;
