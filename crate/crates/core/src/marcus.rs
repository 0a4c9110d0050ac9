//! Cavity-free superexchange rate.
//!
//! `delta_g` is the free-energy change of the transfer as written in the
//! rate expression; the thermodynamic driving force is `-delta_g`.

use crate::error::{PmetError, PoleLocation, Result};
use crate::model::SystemSpec;
use crate::scalar::Real;
use crate::units::hbar;

/// Energy denominators closer to zero than this (eV) are treated as resonances.
pub const POLE_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcusResult<T> {
    pub v_eff: T,
    pub delta_g: T,
    /// `(delta_g + λ)² / 4λ`
    pub activation: T,
    pub rate: T,
}

pub(crate) fn guard_denominator<T: Real>(value: T, location: impl FnOnce() -> PoleLocation) -> Result<T> {
    if value.abs() < T::lit(POLE_THRESHOLD) || !value.is_finite() {
        Err(PmetError::Singularity { location: location(), denominator: value.as_f64() })
    } else {
        Ok(value)
    }
}

/// `-(v_db·v_ba/2)(1/gap_ba + 1/gap_db)`, with `gap_ba = U_B − U_A` and `gap_db = U_B − U_D`.
pub fn superexchange_coupling<T: Real>(v_db: T, v_ba: T, gap_ba: T, gap_db: T) -> Result<T> {
    let gap_ba = guard_denominator(gap_ba, || PoleLocation::gap("U_B - U_A"))?;
    let gap_db = guard_denominator(gap_db, || PoleLocation::gap("U_B - U_D"))?;
    Ok(-(v_db * v_ba / T::lit(2.0)) * (gap_ba.recip() + gap_db.recip()))
}

/// `(U_A − U_D) − v_ba²/gap_ba + v_db²/gap_db`
pub fn effective_driving_force<T: Real>(u_a_minus_u_d: T, v_db: T, v_ba: T, gap_ba: T, gap_db: T) -> Result<T> {
    let gap_ba = guard_denominator(gap_ba, || PoleLocation::gap("U_B - U_A"))?;
    let gap_db = guard_denominator(gap_db, || PoleLocation::gap("U_B - U_D"))?;
    Ok(u_a_minus_u_d - v_ba * v_ba / gap_ba + v_db * v_db / gap_db)
}

fn check_bath<T: Real>(lambda: T, kt: T) -> Result<()> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(PmetError::invalid("lambda_da", "reorganization energy must be positive"));
    }
    if !(kt > T::zero() && kt.is_finite()) {
        return Err(PmetError::invalid("kT", "thermal energy must be positive"));
    }
    Ok(())
}

/// Nonadiabatic rate in s⁻¹: `(2π|V|²/ħ) · (4πλkT)^{-1/2} · exp(−(ΔG+λ)²/4λkT)`.
pub fn marcus_rate<T: Real>(v_eff: T, delta_g: T, lambda: T, kt: T) -> Result<T> {
    check_bath(lambda, kt)?;
    let two_pi = T::TAU();
    let four = T::lit(4.0);
    let density = (four * T::PI() * lambda * kt).sqrt().recip();
    let shift = delta_g + lambda;
    let franck_condon = (-(shift * shift) / (four * lambda * kt)).exp();
    Ok(two_pi * v_eff * v_eff / hbar::<T>() * density * franck_condon)
}

/// Golden-rule weight of a single channel, `|F|²/ħ · √(π/λkT) · exp(−(ΔG+λ)²/4λkT)`, without validation.
#[inline]
pub(crate) fn golden_rule_factor<T: Real>(delta_g: T, lambda: T, kt: T) -> T {
    let shift = delta_g + lambda;
    (T::PI() / (lambda * kt)).sqrt() * (-(shift * shift) / (T::lit(4.0) * lambda * kt)).exp() / hbar::<T>()
}

/// Same physics as [`marcus_rate`] written in channel form; kept separate so the two can be compared.
pub fn golden_rule_rate<T: Real>(coupling: T, delta_g: T, lambda: T, kt: T) -> Result<T> {
    check_bath(lambda, kt)?;
    Ok(coupling * coupling * golden_rule_factor(delta_g, lambda, kt))
}

pub fn marcus<T: Real>(v_eff: T, delta_g: T, lambda: T, kt: T) -> Result<MarcusResult<T>> {
    let rate = marcus_rate(v_eff, delta_g, lambda, kt)?;
    let shift = delta_g + lambda;
    Ok(MarcusResult { v_eff, delta_g, activation: shift * shift / (T::lit(4.0) * lambda), rate })
}

/// Cavity-free rate for the molecular and thermal parts of `spec`.
pub fn marcus_from_spec<T: Real>(spec: &SystemSpec<T>) -> Result<MarcusResult<T>> {
    let m = &spec.molecular;
    let v_eff = superexchange_coupling(m.v_db, m.v_ba, m.gap_ba(), m.gap_db())?;
    let delta_g = effective_driving_force(-m.u_d_minus_u_a(), m.v_db, m.v_ba, m.gap_ba(), m.gap_db())?;
    marcus(v_eff, delta_g, m.lambda_da, spec.thermal.kt)
}
