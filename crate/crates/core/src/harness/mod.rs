//! Sweeps, truncation studies, CSV output and self-checks built on the rate kernels.

mod output;
mod sweep;
mod validate;

pub use output::{
    emit_to, float, sidecar_path, write_channel_csv, write_marcus_csv, write_overlap_csv, write_rate_csv,
    write_sidecar, write_sweep_csv, CHANNEL_HEADER, MARCUS_HEADER, RATE_HEADER, SWEEP_HEADER,
};
pub use sweep::{
    config_hash, parse_grid, run_sweep, with_workers, RowStatus, RunMetadata, SweepAxis, SweepOptions, SweepResult,
    SweepRow, SweepSpec,
};
pub use validate::{validate_suite, CheckOutcome};

use crate::error::Result;
use crate::model::{SystemSpec, TruncationPolicy};
use crate::rate::{Cutoffs, RateOptions, TruncationStep};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    /// First level whose successor changed the rate by less than the tolerance.
    pub cutoffs: Cutoffs,
    pub history: Vec<TruncationStep<f64>>,
}

/// Walks the doubling staircase from the adaptive starting cutoffs.
pub fn converge_truncation(spec: &SystemSpec<f64>, tol: f64) -> Result<TruncationReport> {
    let policy = TruncationPolicy::adaptive(tol)?;
    let result = crate::pmet_rate(&spec.with_truncation(policy), RateOptions::default())?;
    let history = result.history;
    let cutoffs = history[history.len().saturating_sub(2)].cutoffs;
    Ok(TruncationReport { cutoffs, history })
}
