//! Batch experiment runner behind the `mixer` binary.
//!
//! A run resolves an [`config::ExperimentConfig`] for one experiment kind,
//! executes the replica ensemble and writes a result bundle: a JSON
//! manifest, `replicas.csv` and, for trajectory kinds, one CSV per replica.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;
use std::time::Instant;

use config::{ExperimentConfig, Kind, Resolved};
use run::RunError;

/// What a completed run reports back to the caller.
#[derive(Debug, Clone)]
pub struct Report {
    pub manifest: PathBuf,
    pub check: Option<(bool, String)>,
}

/// Resolves `cfg` for `kind`, runs it and writes the bundle.
pub fn execute(kind: Kind, cfg: ExperimentConfig) -> Result<Report, RunError> {
    let resolved = Resolved::from_config(cfg, kind)?;
    let start = Instant::now();
    let bundle = run::run(&resolved)?;
    let wall = start.elapsed().as_secs_f64();
    let manifest = output::write_bundle(&resolved.out, kind.name(), &bundle, wall, resolved.threads())?;
    Ok(Report {
        manifest,
        check: bundle.check,
    })
}
