use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{build_system, to_record, ConfigRecord};
use crate::error::{PmetError, Result};
use crate::model::{CavityMode, SystemSpec};
use crate::rate::{Cutoffs, PathwayMode, PolePolicy, RateOptions};
use crate::units::{HBAR_EV_S, KB_EV_PER_K};

/// The system parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// ħg_c/ħω_c, set through χ at fixed photon energy.
    GOverOmega,
    /// Photon energy in eV at fixed χ.
    HbarOmegaC,
    /// U_B − U_D in eV; U_D and U_A stay put.
    BridgeGap,
    /// V_DB = V_BA in eV.
    VSymmetric,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GOverOmega => "g_over_omega",
            Self::HbarOmegaC => "hbar_omega_c",
            Self::BridgeGap => "bridge_gap",
            Self::VSymmetric => "v_symmetric",
        }
    }

    pub fn apply(self, base: &SystemSpec<f64>, value: f64) -> Result<SystemSpec<f64>> {
        match self {
            Self::GOverOmega => base.with_g_over_omega(value),
            Self::HbarOmegaC => base.with_hbar_omega_c(value),
            Self::BridgeGap => base.with_bridge_gap(value),
            Self::VSymmetric => base.with_symmetric_coupling(value),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = PmetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "g_over_omega" => Ok(Self::GOverOmega),
            "hbar_omega_c" => Ok(Self::HbarOmegaC),
            "bridge_gap" => Ok(Self::BridgeGap),
            "v_symmetric" => Ok(Self::VSymmetric),
            other => Err(PmetError::config(
                "sweep_axis",
                format!("unknown axis `{other}` (g_over_omega, hbar_omega_c, bridge_gap, v_symmetric)"),
            )),
        }
    }
}

/// Expands `"log a b n"` or `"linear a b n"` into `n` points from `a` to `b` inclusive.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| PmetError::config("sweep_grid", msg);
    let parts: Vec<&str> = text.split_whitespace().collect();
    let [kind, a, b, n] = parts.as_slice() else {
        return Err(bad(format!("expected `log|linear <start> <stop> <count>`, got `{text}`")));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
    let (a, b) = (num(a)?, num(b)?);
    let n: usize = n.parse().map_err(|_| bad(format!("`{n}` is not a point count")))?;
    if n == 0 {
        return Err(bad("point count must be positive".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    match *kind {
        "linear" | "lin" => Ok((0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * step(i) }).collect()),
        "log" => {
            if !(a > 0.0 && b > 0.0) {
                return Err(bad("log grid endpoints must be positive".into()));
            }
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..n)
                .map(|i| match i {
                    0 => a,
                    _ if i == n - 1 => b,
                    _ => (la + (lb - la) * step(i)).exp(),
                })
                .collect())
        }
        other => Err(bad(format!("unknown grid kind `{other}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemSpec<f64>,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub pathway: PathwayMode,
}

impl SweepSpec {
    pub fn new(base: SystemSpec<f64>, axis: SweepAxis, values: Vec<f64>, pathway: PathwayMode) -> Result<Self> {
        if values.is_empty() {
            return Err(PmetError::config("sweep_values", "a sweep needs at least one value"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(PmetError::config("sweep_values", format!("non-finite value {v}")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(PmetError::config("sweep_values", "values must be strictly increasing"));
        }
        // every point must describe a valid system before any work starts
        for &v in &values {
            axis.apply(&base, v).map_err(|e| PmetError::config("sweep_values", format!("{axis} = {v}: {e}")))?;
        }
        Ok(Self { base, axis, values, pathway })
    }

    pub fn mode(&self) -> CavityMode {
        self.base.mode()
    }

    pub fn from_record(rec: &ConfigRecord) -> Result<Self> {
        let base = build_system(rec)?;
        let axis: SweepAxis = match rec.get("sweep_axis") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(PmetError::config("sweep_axis", "expected a string")),
            None => return Err(PmetError::config("sweep_axis", "missing; a sweep config needs an axis")),
        };
        let values = match (rec.get("sweep_values"), rec.get("sweep_grid")) {
            (Some(_), Some(_)) => {
                return Err(PmetError::config("sweep_values", "give either sweep_values or sweep_grid, not both"))
            }
            (Some(Value::Array(items)), None) => items
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| PmetError::config("sweep_values", "values must be numbers")))
                .collect::<Result<Vec<_>>>()?,
            (Some(_), None) => return Err(PmetError::config("sweep_values", "expected an array of numbers")),
            (None, Some(Value::String(g))) => parse_grid(g)?,
            (None, Some(_)) => return Err(PmetError::config("sweep_grid", "expected a grid string")),
            (None, None) => return Err(PmetError::config("sweep_values", "missing sweep_values or sweep_grid")),
        };
        let pathway = match rec.get("pathway") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(PmetError::config("pathway", "expected a string")),
            None => PathwayMode::Total,
        };
        Self::new(base, axis, values, pathway)
    }

    /// Canonical record: resolved system parameters plus the sweep definition.
    pub fn to_record(&self) -> ConfigRecord {
        let mut rec = to_record(&self.base);
        rec.insert("sweep_axis".into(), self.axis.as_str().into());
        rec.insert("sweep_values".into(), self.values.clone().into());
        rec.insert("pathway".into(), self.pathway.as_str().into());
        rec
    }

    pub fn config_hash(&self) -> String {
        config_hash(&self.to_record())
    }
}

/// SHA-256 over the compact JSON of a record (keys are serialized in sorted order).
pub fn config_hash(rec: &ConfigRecord) -> String {
    let text = serde_json::to_string(rec).expect("a JSON map always serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub poles: PolePolicy,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    /// Some channels sat on a resonance and were excluded.
    PolesSkipped,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::PolesSkipped => "poles_skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Rate for the sweep's pathway.
    pub rate: f64,
    /// Off-resonance only.
    pub direct_rate: Option<f64>,
    /// Off-resonance only.
    pub bridge_rate: Option<f64>,
    pub truncation: Cutoffs,
    pub skipped_poles: usize,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub hbar_ev_s: f64,
    pub kb_ev_per_k: f64,
    pub timestamp_unix: u64,
}

impl RunMetadata {
    pub fn new(command: impl Into<String>, config_hash: String) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: "pmet",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_hash,
            hbar_ev_s: HBAR_EV_S,
            kb_ev_per_k: KB_EV_PER_K,
            timestamp_unix,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub mode: CavityMode,
    pub pathway: PathwayMode,
    pub rows: Vec<SweepRow>,
    pub metadata: RunMetadata,
}

impl SweepResult {
    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.rate).collect()
    }
}

/// Runs `f` on a dedicated pool when a worker count is given.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(PmetError::config("workers", "worker count must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PmetError::config("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn sweep_point(s: &SweepSpec, value: f64, poles: PolePolicy) -> Result<SweepRow> {
    let spec = s.axis.apply(&s.base, value)?;
    let opts = RateOptions { pathway: s.pathway, poles };
    let main = crate::pmet_rate(&spec, opts)?;
    let (direct_rate, bridge_rate) = match s.mode() {
        CavityMode::Resonant => (None, None),
        CavityMode::OffResonant => {
            let part = |p: PathwayMode| -> Result<f64> {
                if p == s.pathway {
                    Ok(main.total_rate)
                } else {
                    Ok(crate::pmet_rate(&spec, RateOptions { pathway: p, poles })?.total_rate)
                }
            };
            (Some(part(PathwayMode::DirectOnly)?), Some(part(PathwayMode::BridgeOnly)?))
        }
    };
    log::debug!("{} = {value}: rate {:e} at {}", s.axis, main.total_rate, main.truncation_used);
    Ok(SweepRow {
        value,
        rate: main.total_rate,
        direct_rate,
        bridge_rate,
        truncation: main.truncation_used,
        skipped_poles: main.skipped_poles,
        status: if main.skipped_poles > 0 { RowStatus::PolesSkipped } else { RowStatus::Ok },
    })
}

/// Evaluates every sweep point, re-converging truncation at each one. Rows follow the input order.
pub fn run_sweep(s: &SweepSpec, opts: SweepOptions) -> Result<SweepResult> {
    let outcomes: Vec<Result<SweepRow>> = with_workers(opts.workers, || {
        s.values.par_iter().map(|&v| sweep_point(s, v, opts.poles)).collect()
    })?;
    let rows = outcomes
        .into_iter()
        .zip(&s.values)
        .map(|(r, &value)| {
            r.map_err(|e| PmetError::SweepPoint { axis: s.axis.as_str(), value, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let skipped: usize = rows.iter().map(|r| r.skipped_poles).sum();
    if skipped > 0 {
        log::warn!("{skipped} channels excluded at resonance poles");
    }
    Ok(SweepResult {
        axis: s.axis,
        mode: s.mode(),
        pathway: s.pathway,
        rows,
        metadata: RunMetadata::new("sweep", s.config_hash()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{bundled, parse_record};

    #[test]
    fn grids() {
        let g = parse_grid("linear 0.5 1.5 21").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[20]), (0.5, 1.5));
        assert!((g[10] - 1.0).abs() < 1e-15);
        let g = parse_grid("log 0.001 0.1 3").unwrap();
        assert_eq!(g[0], 0.001);
        assert!((g[1] - 0.01).abs() < 1e-15);
        assert_eq!(g[2], 0.1);
        assert_eq!(parse_grid("log 2 3 1").unwrap(), vec![2.0]);
        for bad in ["log 0 1 3", "cubic 1 2 3", "linear 1 2", "linear 1 2 0", "linear a 2 3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn axis_names_round_trip() {
        for a in [SweepAxis::GOverOmega, SweepAxis::HbarOmegaC, SweepAxis::BridgeGap, SweepAxis::VSymmetric] {
            assert_eq!(a.as_str().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("omega".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn bundled_sweeps_parse() {
        for text in [
            bundled::SWEEP_RESONANT_860,
            bundled::SWEEP_RESONANT_430,
            bundled::SWEEP_OFFRES_200,
            bundled::SWEEP_OFFRES_40,
            bundled::SWEEP_BRIDGE_GAP_200,
        ] {
            let s = SweepSpec::from_record(&parse_record(text).unwrap()).unwrap();
            assert!(!s.values.is_empty());
            assert_eq!(s.config_hash().len(), 64);
        }
    }

    #[test]
    fn rejects_bad_values() {
        let base = build_system(&parse_record(bundled::RESONANT_REFERENCE).unwrap()).unwrap();
        let mk = |v: Vec<f64>| SweepSpec::new(base, SweepAxis::GOverOmega, v, PathwayMode::Total);
        assert!(mk(vec![]).is_err());
        assert!(mk(vec![0.1, 0.05]).is_err());
        assert!(mk(vec![0.1, 0.1]).is_err());
        assert!(mk(vec![-0.1]).is_err());
        assert!(SweepSpec::new(base, SweepAxis::HbarOmegaC, vec![0.0, 0.2], PathwayMode::Total).is_err());
    }

    #[test]
    fn zero_coupling_point_is_cavity_free() {
        let base = build_system(&parse_record(bundled::RESONANT_REFERENCE).unwrap()).unwrap();
        let s = SweepSpec::new(base, SweepAxis::GOverOmega, vec![0.0], PathwayMode::Total).unwrap();
        let r = run_sweep(&s, SweepOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 1);
        let k = crate::marcus::marcus_from_spec(&base).unwrap().rate;
        assert!((r.rows[0].rate / k - 1.0).abs() < 1e-12);
        assert!(r.rows[0].direct_rate.is_none());
    }

    #[test]
    fn hash_depends_on_content() {
        let base = build_system(&parse_record(bundled::RESONANT_REFERENCE).unwrap()).unwrap();
        let a = SweepSpec::new(base, SweepAxis::GOverOmega, vec![0.01, 0.02], PathwayMode::Total).unwrap();
        let b = SweepSpec::new(base, SweepAxis::GOverOmega, vec![0.01, 0.03], PathwayMode::Total).unwrap();
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash(), a.clone().config_hash());
    }

    #[test]
    fn zero_workers_rejected() {
        assert!(with_workers(Some(0), || 1).is_err());
        assert_eq!(with_workers(Some(2), || 7).unwrap(), 7);
    }
}
