use std::fmt;

use thiserror::Error;

pub type Result<T, E = PmetError> = std::result::Result<T, E>;

/// Where a perturbative energy denominator vanished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleLocation {
    pub gap: &'static str,
    pub n: Option<usize>,
    pub l: Option<usize>,
    pub m: Option<usize>,
}

impl PoleLocation {
    pub fn gap(gap: &'static str) -> Self {
        Self { gap, n: None, l: None, m: None }
    }

    pub fn channel(gap: &'static str, n: usize, l: Option<usize>, m: usize) -> Self {
        Self { gap, n: Some(n), l, m: Some(m) }
    }
}

impl fmt::Display for PoleLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gap)?;
        let mut parts = Vec::new();
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Some(l) = self.l {
            parts.push(format!("l={l}"));
        }
        if let Some(m) = self.m {
            parts.push(format!("m={m}"));
        }
        if !parts.is_empty() {
            write!(f, " at ({})", parts.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PmetError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("resonance singularity in {location}: |denominator| = {denominator:e} eV")]
    Singularity { location: PoleLocation, denominator: f64 },

    #[error("Fock index {index} outside truncated basis of size {size}")]
    Truncation { index: usize, size: usize },

    #[error("truncation did not converge within cap {cap}; last relative change {last_delta:e}")]
    NonConvergence { cap: usize, last_delta: f64 },

    #[error("sweep point {axis} = {value}: {source}")]
    SweepPoint { axis: &'static str, value: f64, source: Box<PmetError> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl PmetError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { key: key.into(), message: message.into() }
    }

    pub fn invalid(name: impl Into<String>, message: impl Into<String>) -> Self {
        Self::InvalidParameter { name: name.into(), message: message.into() }
    }

    /// The underlying error with any sweep annotation removed.
    pub fn root(&self) -> &PmetError {
        match self {
            Self::SweepPoint { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the CLI: 2 config, 3 singularity, 4 non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } | Self::InvalidParameter { .. } | Self::Json(_) => 2,
            Self::Singularity { .. } => 3,
            Self::NonConvergence { .. } => 4,
            Self::SweepPoint { source, .. } => source.exit_code(),
            Self::Truncation { .. } | Self::Io(_) | Self::Csv(_) => 1,
        }
    }
}
