//! On-disk result bundle: `manifest.json`, `replicas.csv` and optional
//! per-replica trajectories under `trajectories/`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Manifest layout version.
pub const SCHEMA_VERSION: u32 = 1;
/// Bumped whenever a CSV header changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const REPLICA_HEADER: [&str; 8] = [
    "replica",
    "outcome",
    "exit_step",
    "settle_step",
    "settled",
    "final_l1",
    "final_counts",
    "good_set_violation",
];
pub const CM_TRAJECTORY_HEADER: [&str; 8] = [
    "t",
    "l1",
    "l2",
    "r2_minus",
    "r3_minus",
    "i1",
    "giant_activated",
    "activated",
];
/// Potts trajectories have `t` followed by one `count_k` column per colour.
pub const POTTS_TRAJECTORY_PREFIX: &str = "t";

/// One row of `replicas.csv`. Fields that do not apply to a kind are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaResult {
    pub replica: usize,
    /// `left | right | timeout` for exit kinds; `ordered | disordered |
    /// unsettled` for mixing kinds.
    pub outcome: String,
    pub exit_step: Option<u64>,
    pub settle_step: Option<u64>,
    pub settled: Option<bool>,
    pub final_l1: Option<u64>,
    /// Colour counts joined by `;`.
    pub final_counts: Option<String>,
    pub good_set_violation: Option<bool>,
}

/// A trajectory table for one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub replica: usize,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Everything an experiment produces, before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub config: Value,
    pub thresholds: Value,
    pub summary: Value,
    pub replicas: Vec<ReplicaResult>,
    pub trajectories: Vec<TrajectoryTable>,
    /// `Some((passed, message))` when the kind has an acceptance check.
    pub check: Option<(bool, String)>,
}

pub fn join_counts(counts: &[u32]) -> String {
    counts.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_replicas(path: &Path, rows: &[ReplicaResult]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(REPLICA_HEADER).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()
}

fn write_table(path: &Path, table: &TrajectoryTable) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()
}

/// Writes the bundle under `dir` and returns the manifest path.
pub fn write_bundle(
    dir: &Path,
    kind: &str,
    bundle: &Bundle,
    wall_clock: f64,
    threads: Option<usize>,
) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let has_replicas = !bundle.replicas.is_empty();
    if has_replicas {
        write_replicas(&dir.join("replicas.csv"), &bundle.replicas)?;
    }
    let traj_dir = dir.join("trajectories");
    if !bundle.trajectories.is_empty() {
        fs::create_dir_all(&traj_dir)?;
        for t in &bundle.trajectories {
            write_table(&traj_dir.join(format!("replica_{:05}.csv", t.replica)), t)?;
        }
    }
    let manifest = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "kind": kind,
        "version": env!("CARGO_PKG_VERSION"),
        "config": bundle.config,
        "thresholds": bundle.thresholds,
        "summary": bundle.summary,
        "replicas_csv": has_replicas.then_some("replicas.csv"),
        "replica_columns": has_replicas.then_some(REPLICA_HEADER),
        "trajectory_dir": (!bundle.trajectories.is_empty()).then_some("trajectories"),
        "check": bundle.check.as_ref().map(|(ok, msg)| serde_json::json!({"passed": ok, "detail": msg})),
        "threads": threads,
        "wall_clock_seconds": wall_clock,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replica_header_matches_struct_fields() {
        let row = ReplicaResult {
            replica: 0,
            outcome: "left".into(),
            exit_step: Some(3),
            settle_step: None,
            settled: None,
            final_l1: Some(10),
            final_counts: None,
            good_set_violation: Some(false),
        };
        let mut w = csv::Writer::from_writer(vec![]);
        w.serialize(&row).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, REPLICA_HEADER.join(","));
        assert_eq!(text.lines().nth(1).unwrap(), "0,left,3,,,10,,false");
    }

    #[test]
    fn counts_are_semicolon_joined() {
        assert_eq!(join_counts(&[3, 1, 0]), "3;1;0");
    }
}
