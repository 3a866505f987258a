//! Bit-stable file output: CSV serialization of states and diagnostics,
//! config canonicalization/hashing, and the run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! parsing a file and re-deriving a quantity reproduces the logged value
//! exactly; reruns of the same config overwrite the same directory with
//! byte-identical data files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hyperac::diagnostics::ExitOutcome;
use hyperac::experiments::{RunReport, SweepTable};
use hyperac::kinetics::{reconstruct, KineticState, SchemeParams};
use hyperac::potential::PotentialSpec;

/// Shortest round-trip decimal text for a float; non-finite values use
/// the fixed spellings `nan` / `inf` / `-inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

/// Canonical JSON text of a config value: serde_json's default map is
/// ordered, so serializing a reparsed value normalizes key order and
/// whitespace.
pub fn canonical_json(value: &serde_json::Value) -> String {
    serde_json::to_string(value).expect("JSON values always serialize")
}

/// First 12 hex digits of the SHA-256 of the canonical config text; names
/// the run directory.
pub fn config_hash(value: &serde_json::Value) -> String {
    let digest = Sha256::digest(canonical_json(value).as_bytes());
    let mut hex = String::with_capacity(12);
    for byte in digest.iter().take(6) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Per-run record of what was produced; written last, after the listed
/// files exist.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub files: Vec<String>,
    pub exit_status: i32,
}

impl RunManifest {
    pub fn begin(config_hash: String) -> Self {
        Self {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: unix_now(),
            finished_unix: 0,
            files: Vec::new(),
            exit_status: 0,
        }
    }

    /// Stamps the end time and writes `manifest.json` (listing itself).
    pub fn finish(mut self, dir: &Path) -> std::io::Result<PathBuf> {
        self.files.push("manifest.json".to_string());
        self.files.sort();
        self.finished_unix = unix_now();
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// `x,alpha,beta,u,v,u_t` rows, one per cell.
pub fn write_snapshot_csv(
    path: &Path,
    state: &KineticState,
    params: &SchemeParams,
    pot: &PotentialSpec,
) -> std::io::Result<()> {
    let grid = state.grid();
    let fields = reconstruct(state, params, pot);
    let mut out = String::with_capacity(64 * grid.cells());
    out.push_str("x,alpha,beta,u,v,u_t\n");
    for (j, x) in grid.nodes().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_f64(x),
            format_f64(state.alpha()[j]),
            format_f64(state.beta()[j]),
            format_f64(fields.u[j]),
            format_f64(fields.v[j]),
            format_f64(fields.u_t[j]),
        ));
    }
    fs::write(path, out)
}

/// One row per snapshot: time, energy decomposition, transition count,
/// then the interface intervals padded with `nan` to the widest row.
pub fn write_diagnostics_csv(path: &Path, report: &RunReport) -> std::io::Result<()> {
    let max_intervals = report
        .snapshots
        .iter()
        .map(|s| s.interface.intervals.components().len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    out.push_str("t,E_scaled,kinetic,gradient,potential,n_transitions");
    for i in 1..=max_intervals {
        out.push_str(&format!(",interface_lo_{i},interface_hi_{i}"));
    }
    out.push('\n');
    for snap in &report.snapshots {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            format_f64(snap.state.t()),
            format_f64(snap.energy.total_scaled),
            format_f64(snap.energy.kinetic),
            format_f64(snap.energy.gradient),
            format_f64(snap.energy.potential),
            snap.transitions,
        ));
        let components = snap.interface.intervals.components();
        for i in 0..max_intervals {
            match components.get(i) {
                Some(&(lo, hi)) => {
                    out.push_str(&format!(",{},{}", format_f64(lo), format_f64(hi)))
                }
                None => out.push_str(",nan,nan"),
            }
        }
        out.push('\n');
    }
    fs::write(path, out)
}

/// One row per ε: resolution, horizon (with cap flag), the sup-L¹ gap to
/// the limit profile, and the exit outcome. `exit_time` is the first
/// exceedance time, or the horizon itself when the interface never left
/// (`exited` disambiguates).
pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("epsilon,cells,horizon,capped,sup_l1,exited,exit_time,final_transitions\n");
    for row in &table.rows {
        let (exited, exit_time) = match row.exit {
            ExitOutcome::Exceeded { t } => (true, t),
            ExitOutcome::WithinHorizon { horizon, .. } => (false, horizon),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_f64(row.epsilon),
            row.cells,
            format_f64(row.horizon),
            row.capped,
            format_f64(row.sup_l1),
            exited,
            format_f64(exit_time),
            row.final_transitions,
        ));
    }
    fs::write(path, out)
}

/// Writes plain text (verify reports); newline-terminated.
pub fn write_text(path: &Path, lines: &[String]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    for line in lines {
        writeln!(f, "{line}")?;
    }
    Ok(())
}
