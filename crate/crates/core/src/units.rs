//! Unit system: energies in eV, temperatures in K, rates in s⁻¹.

use crate::error::{PmetError, Result};
use crate::scalar::Real;

/// Reduced Planck constant, eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// Boltzmann constant, eV/K (CODATA 2018).
pub const KB_EV_PER_K: f64 = 8.617_333_262e-5;

pub const MEV: f64 = 1e-3;

#[inline]
pub fn hbar<T: Real>() -> T {
    T::lit(HBAR_EV_S)
}

/// Thermal energy k_B·T in eV.
#[allow(non_snake_case)]
pub fn boltzmann_kT<T: Real>(temperature: T) -> Result<T> {
    if !(temperature > T::zero()) || !temperature.is_finite() {
        return Err(PmetError::invalid(
            "temperature",
            format!("temperature must be positive and finite, got {temperature}"),
        ));
    }
    Ok(T::lit(KB_EV_PER_K) * temperature)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn room_temperature() {
        // 8.617333262e-5 * 300 = 0.025851999786
        let kt = boltzmann_kT(300.0f64).unwrap();
        assert!((kt - 0.025_851_999_786).abs() < 1e-15);
        assert!((kt - 0.025_852_00).abs() < 5e-9);
    }

    #[test]
    fn non_positive_temperature_rejected() {
        assert!(boltzmann_kT(0.0f64).is_err());
        assert!(boltzmann_kT(-1.0f64).is_err());
        assert!(boltzmann_kT(f64::NAN).is_err());
    }

    #[test]
    fn linear_in_temperature() {
        let a = boltzmann_kT(300.0f64).unwrap();
        let b = boltzmann_kT(600.0f64).unwrap();
        assert_eq!(b, 2.0 * a);
    }
}
