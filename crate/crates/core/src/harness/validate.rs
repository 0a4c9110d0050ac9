use crate::config::{build_system, bundled, parse_record};
use crate::fock::{overlap_matrix, overlap_matrix_oracle, DisplacementParam};
use crate::marcus::marcus_from_spec;
use crate::model::{CavityMode, SystemSpec};
use crate::rate::{thermal_populations, PathwayMode, RateOptions};

/// Result of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn from_error(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

fn overlap_checks(out: &mut Vec<CheckOutcome>) {
    for d in [0.1f64, 0.5, 1.0, 2.0] {
        let name = format!("overlap oracle d={d}");
        let dp = match DisplacementParam::new(d) {
            Ok(dp) => dp,
            Err(e) => {
                out.push(CheckOutcome::from_error(name, e));
                continue;
            }
        };
        match (overlap_matrix(dp, 30), overlap_matrix_oracle(dp, 30, 120)) {
            (Ok(a), Ok(o)) => {
                let diff = a.max_abs_diff(&o);
                out.push(CheckOutcome::new(name, diff < 1e-9, format!("max |analytic - oracle| = {diff:.3e}")));

                let mut parity = 0.0f64;
                for n in 0..30 {
                    for m in 0..30 {
                        let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
                        parity = parity.max((a.get(m, n) - sign * a.get(n, m)).abs());
                    }
                }
                out.push(CheckOutcome::new(
                    format!("transpose parity d={d}"),
                    parity == 0.0,
                    format!("max deviation {parity:.3e}"),
                ));
            }
            (Err(e), _) | (_, Err(e)) => out.push(CheckOutcome::from_error(name, e)),
        }
    }

    let (d1, d2) = (0.7f64, -0.4f64);
    let size = (4.0 * (d1.abs() + d2.abs()).powi(2)).ceil() as usize + 20;
    let composed = (|| -> crate::Result<f64> {
        let a = overlap_matrix(DisplacementParam::new(d1)?, size)?;
        let b = overlap_matrix(DisplacementParam::new(d2)?, size)?;
        let c = overlap_matrix(DisplacementParam::new(d1 + d2)?, size)?;
        let ab = a.product(&b)?;
        let mut worst = 0.0f64;
        for n in 0..size / 4 {
            for m in 0..size / 4 {
                worst = worst.max((ab[n * size + m] - c.get(n, m)).abs());
            }
        }
        Ok(worst)
    })();
    match composed {
        Ok(w) => out.push(CheckOutcome::new("overlap composition", w < 1e-8, format!("max deviation {w:.3e}"))),
        Err(e) => out.push(CheckOutcome::from_error("overlap composition", e)),
    }
}

fn reduction_checks(label: &str, spec: &SystemSpec<f64>, out: &mut Vec<CheckOutcome>) {
    let spec = match spec.with_chi(0.0) {
        Ok(s) => s,
        Err(e) => return out.push(CheckOutcome::from_error(format!("{label} reduction"), e)),
    };
    let marcus = match marcus_from_spec(&spec) {
        Ok(m) => m.rate,
        Err(e) => return out.push(CheckOutcome::from_error(format!("{label} reduction"), e)),
    };
    let pathways: &[PathwayMode] = match spec.mode() {
        CavityMode::Resonant => &[PathwayMode::Total],
        CavityMode::OffResonant => &PathwayMode::ALL,
    };
    for &p in pathways {
        let name = format!("{label} reduction ({p})");
        let result = match crate::pmet_rate(&spec, RateOptions::pathway(p)) {
            Ok(r) => r,
            Err(e) => {
                out.push(CheckOutcome::from_error(name, e));
                continue;
            }
        };
        let p0 = match thermal_populations(spec.thermal.beta, spec.cavity.hbar_omega_c, result.truncation_used.n_max) {
            Ok(p) => p[0],
            Err(e) => {
                out.push(CheckOutcome::from_error(name, e));
                continue;
            }
        };
        let (expected, scale) = match (spec.mode(), p) {
            (CavityMode::Resonant, _) => (p0 * marcus, marcus),
            (_, PathwayMode::DirectOnly) => (0.0, marcus),
            _ => (marcus, marcus),
        };
        let rel = (result.total_rate - expected).abs() / scale;
        out.push(CheckOutcome::new(
            name,
            rel < 1e-10,
            format!("rate {:.6e} vs {:.6e}, relative deviation {rel:.3e}", result.total_rate, expected),
        ));
    }
}

/// Oracle-equivalence and cavity-free reduction checks; `spec` adds a reduction check for that system.
pub fn validate_suite(spec: Option<&SystemSpec<f64>>) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    overlap_checks(&mut out);
    for (label, text) in [("resonant", bundled::RESONANT_REFERENCE), ("off-resonant", bundled::OFFRES_REFERENCE)] {
        match parse_record(text).and_then(|r| build_system(&r)) {
            Ok(s) => reduction_checks(label, &s, &mut out),
            Err(e) => out.push(CheckOutcome::from_error(format!("{label} bundled config"), e)),
        }
    }
    if let Some(s) = spec {
        reduction_checks("config", s, &mut out);
    }
    out
}
