//! Model parameters for a donor–bridge–acceptor molecule coupled to one cavity mode.
//!
//! Energies are in eV and temperatures in K. The direct donor–acceptor
//! electronic coupling is fixed to zero, so it has no field here.
//! Constant dipole-self-energy shifts cancel in every donor–acceptor energy
//! difference, so they are not carried.

use crate::error::{PmetError, Result};
use crate::fock::{displacement_parameter, DisplacementParam};
use crate::scalar::Real;
use crate::units::boltzmann_kT;

/// Which light–matter model a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CavityMode {
    /// Photon resonant with the donor→acceptor charge-transfer band; the bridge is undressed.
    Resonant,
    /// Photon off resonance; donor, bridge and acceptor are all dressed.
    OffResonant,
}

impl CavityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Resonant => "resonant",
            Self::OffResonant => "off_resonant",
        }
    }
}

impl std::str::FromStr for CavityMode {
    type Err = PmetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resonant" => Ok(Self::Resonant),
            "off_resonant" | "offres" | "off-resonant" => Ok(Self::OffResonant),
            other => Err(PmetError::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

fn require_finite<T: Real>(name: &str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(PmetError::invalid(name, format!("{name} must be finite, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MolecularParams<T> {
    pub u_d: T,
    pub u_b: T,
    pub u_a: T,
    pub v_db: T,
    pub v_ba: T,
    pub lambda_da: T,
}

impl<T: Real> MolecularParams<T> {
    pub fn new(u_d: T, u_b: T, u_a: T, v_db: T, v_ba: T, lambda_da: T) -> Result<Self> {
        for (name, x) in [
            ("u_d", u_d),
            ("u_b", u_b),
            ("u_a", u_a),
            ("v_db", v_db),
            ("v_ba", v_ba),
            ("lambda_da", lambda_da),
        ] {
            require_finite(name, x)?;
        }
        if !(lambda_da > T::zero()) {
            return Err(PmetError::invalid("lambda_da", "lambda_da must be positive"));
        }
        if !(u_b - u_d > T::zero()) {
            return Err(PmetError::invalid(
                "u_b",
                "bridge must lie above the donor (u_b - u_d > 0)",
            ));
        }
        if !(u_b - u_a > T::zero()) {
            return Err(PmetError::invalid(
                "u_b",
                "bridge must lie above the acceptor (u_b - u_a > 0)",
            ));
        }
        Ok(Self { u_d, u_b, u_a, v_db, v_ba, lambda_da })
    }

    /// U_B − U_D.
    pub fn gap_db(&self) -> T {
        self.u_b - self.u_d
    }

    /// U_B − U_A.
    pub fn gap_ba(&self) -> T {
        self.u_b - self.u_a
    }

    pub fn u_d_minus_u_a(&self) -> T {
        self.u_d - self.u_a
    }

    pub fn cast<U: Real>(&self) -> MolecularParams<U> {
        MolecularParams {
            u_d: U::lit(self.u_d.as_f64()),
            u_b: U::lit(self.u_b.as_f64()),
            u_a: U::lit(self.u_a.as_f64()),
            v_db: U::lit(self.v_db.as_f64()),
            v_ba: U::lit(self.v_ba.as_f64()),
            lambda_da: U::lit(self.lambda_da.as_f64()),
        }
    }
}

/// Dimensionless dipole matrix elements.
///
/// Off resonance, the three permanent-dipole differences are independent
/// inputs; no additivity (`d_da = d_db + d_ba`) is enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DipoleSet<T> {
    Resonant {
        mu_da: T,
        mu_dd: T,
        mu_aa: T,
    },
    OffResonant {
        mu_db: T,
        mu_ba: T,
        /// μ_DD − μ_BB
        d_db: T,
        /// μ_BB − μ_AA
        d_ba: T,
        /// μ_DD − μ_AA
        d_da: T,
    },
}

impl<T: Real> DipoleSet<T> {
    pub fn resonant(mu_da: T, mu_dd: T, mu_aa: T) -> Result<Self> {
        require_finite("mu_da", mu_da)?;
        require_finite("mu_dd", mu_dd)?;
        require_finite("mu_aa", mu_aa)?;
        if mu_da == T::zero() {
            return Err(PmetError::invalid("mu_da", "transition dipole mu_da must be nonzero"));
        }
        Ok(Self::Resonant { mu_da, mu_dd, mu_aa })
    }

    pub fn off_resonant(mu_db: T, mu_ba: T, d_db: T, d_ba: T, d_da: T) -> Result<Self> {
        for (name, x) in [("mu_db", mu_db), ("mu_ba", mu_ba), ("d_db", d_db), ("d_ba", d_ba), ("d_da", d_da)] {
            require_finite(name, x)?;
        }
        if mu_db == T::zero() {
            return Err(PmetError::invalid("mu_db", "transition dipole mu_db must be nonzero"));
        }
        if mu_ba == T::zero() {
            return Err(PmetError::invalid("mu_ba", "transition dipole mu_ba must be nonzero"));
        }
        Ok(Self::OffResonant { mu_db, mu_ba, d_db, d_ba, d_da })
    }

    pub fn mode(&self) -> CavityMode {
        match self {
            Self::Resonant { .. } => CavityMode::Resonant,
            Self::OffResonant { .. } => CavityMode::OffResonant,
        }
    }

    /// μ_DA on resonance, μ_DB off resonance; sets ħg_c = χ·μ.
    pub fn primary_transition(&self) -> T {
        match *self {
            Self::Resonant { mu_da, .. } => mu_da,
            Self::OffResonant { mu_db, .. } => mu_db,
        }
    }

    /// μ_BA off resonance; sets ħη_c = χ·μ. Absent on resonance.
    pub fn secondary_transition(&self) -> Option<T> {
        match *self {
            Self::Resonant { .. } => None,
            Self::OffResonant { mu_ba, .. } => Some(mu_ba),
        }
    }

    pub fn cast<U: Real>(&self) -> DipoleSet<U> {
        let c = |x: T| U::lit(x.as_f64());
        match *self {
            Self::Resonant { mu_da, mu_dd, mu_aa } => DipoleSet::Resonant {
                mu_da: c(mu_da),
                mu_dd: c(mu_dd),
                mu_aa: c(mu_aa),
            },
            Self::OffResonant { mu_db, mu_ba, d_db, d_ba, d_da } => DipoleSet::OffResonant {
                mu_db: c(mu_db),
                mu_ba: c(mu_ba),
                d_db: c(d_db),
                d_ba: c(d_ba),
                d_da: c(d_da),
            },
        }
    }
}

/// Cavity mode: photon energy, field strength χ (eV per unit dipole), and the derived couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams<T> {
    pub hbar_omega_c: T,
    pub chi: T,
    /// χ times the primary transition dipole.
    pub hbar_g_c: T,
    /// χ·μ_BA off resonance; zero on resonance.
    pub hbar_eta_c: T,
}

impl<T: Real> CavityParams<T> {
    pub fn new(hbar_omega_c: T, chi: T, dipoles: &DipoleSet<T>) -> Result<Self> {
        require_finite("hbar_omega_c", hbar_omega_c)?;
        require_finite("chi", chi)?;
        if !(hbar_omega_c > T::zero()) {
            return Err(PmetError::invalid("hbar_omega_c", "photon energy must be positive"));
        }
        if chi < T::zero() {
            return Err(PmetError::invalid("chi", "chi must be non-negative"));
        }
        Ok(Self {
            hbar_omega_c,
            chi,
            hbar_g_c: chi * dipoles.primary_transition(),
            hbar_eta_c: dipoles.secondary_transition().map_or(T::zero(), |mu| chi * mu),
        })
    }

    /// Back-derives χ from a requested ħg_c.
    pub fn from_coupling(hbar_omega_c: T, hbar_g_c: T, dipoles: &DipoleSet<T>) -> Result<Self> {
        let chi = hbar_g_c / dipoles.primary_transition();
        if chi < T::zero() {
            return Err(PmetError::invalid(
                "hbar_g_c",
                "hbar_g_c must have the sign of the transition dipole (chi >= 0)",
            ));
        }
        Self::new(hbar_omega_c, chi, dipoles)
    }

    pub fn g_over_omega(&self) -> T {
        self.hbar_g_c / self.hbar_omega_c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams<T> {
    pub temperature: T,
    pub kt: T,
    pub beta: T,
}

impl<T: Real> ThermalParams<T> {
    pub fn new(temperature: T) -> Result<Self> {
        let kt = boltzmann_kT(temperature)?;
        Ok(Self { temperature, kt, beta: kt.recip() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationMode {
    Fixed,
    /// Double the cutoffs until the relative change of the total rate drops below `tol`.
    Adaptive { tol: f64 },
}

/// Photon-number cutoffs: donor `n ∈ [0, n_max]`, bridge `l ∈ [0, l_max]`, acceptor `m ∈ [0, m_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub n_max: usize,
    pub l_max: usize,
    pub m_max: usize,
    pub mode: TruncationMode,
}

impl TruncationPolicy {
    pub const DEFAULT_TOL: f64 = 1e-8;
    pub const ADAPTIVE_START: usize = 8;
    pub const ADAPTIVE_CAP: usize = 256;

    pub fn fixed(n_max: usize, l_max: usize, m_max: usize) -> Result<Self> {
        Self::validated(n_max, l_max, m_max, TruncationMode::Fixed)
    }

    pub fn adaptive(tol: f64) -> Result<Self> {
        let s = Self::ADAPTIVE_START;
        Self::validated(s, s, s, TruncationMode::Adaptive { tol })
    }

    pub fn validated(n_max: usize, l_max: usize, m_max: usize, mode: TruncationMode) -> Result<Self> {
        for (name, c) in [("n_max", n_max), ("l_max", l_max), ("m_max", m_max)] {
            if c < 1 {
                return Err(PmetError::invalid(name, format!("{name} must be at least 1")));
            }
        }
        if let TruncationMode::Adaptive { tol } = mode {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(PmetError::invalid("tol", format!("tolerance must lie in (0, 1), got {tol}")));
            }
        }
        Ok(Self { n_max, l_max, m_max, mode })
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::adaptive(Self::DEFAULT_TOL).expect("default tolerance is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacements<T> {
    pub db: DisplacementParam<T>,
    pub ba: DisplacementParam<T>,
    pub da: DisplacementParam<T>,
}

/// A complete, validated system description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec<T> {
    pub molecular: MolecularParams<T>,
    pub cavity: CavityParams<T>,
    pub dipoles: DipoleSet<T>,
    pub thermal: ThermalParams<T>,
    pub truncation: TruncationPolicy,
}

impl<T: Real> SystemSpec<T> {
    pub fn new(
        molecular: MolecularParams<T>,
        cavity: CavityParams<T>,
        dipoles: DipoleSet<T>,
        thermal: ThermalParams<T>,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        // re-derive couplings so they can never disagree with the dipoles
        let cavity = CavityParams::new(cavity.hbar_omega_c, cavity.chi, &dipoles)?;
        Ok(Self { molecular, cavity, dipoles, thermal, truncation })
    }

    pub fn mode(&self) -> CavityMode {
        self.dipoles.mode()
    }

    pub fn require_mode(&self, mode: CavityMode) -> Result<()> {
        if self.mode() == mode {
            Ok(())
        } else {
            Err(PmetError::invalid(
                "mode",
                format!("spec is {} but a {} rate was requested", self.mode().as_str(), mode.as_str()),
            ))
        }
    }

    pub fn with_chi(&self, chi: T) -> Result<Self> {
        let cavity = CavityParams::new(self.cavity.hbar_omega_c, chi, &self.dipoles)?;
        Ok(Self { cavity, ..*self })
    }

    /// Sets χ so that ħg_c / ħω_c equals `ratio`.
    pub fn with_g_over_omega(&self, ratio: T) -> Result<Self> {
        let chi = ratio * self.cavity.hbar_omega_c / self.dipoles.primary_transition();
        self.with_chi(chi)
    }

    /// Changes the photon energy at fixed χ.
    pub fn with_hbar_omega_c(&self, hbar_omega_c: T) -> Result<Self> {
        let cavity = CavityParams::new(hbar_omega_c, self.cavity.chi, &self.dipoles)?;
        Ok(Self { cavity, ..*self })
    }

    /// Sets U_B − U_D, keeping U_D and U_A fixed.
    pub fn with_bridge_gap(&self, gap_db: T) -> Result<Self> {
        let m = self.molecular;
        let molecular = MolecularParams::new(m.u_d, m.u_d + gap_db, m.u_a, m.v_db, m.v_ba, m.lambda_da)?;
        Ok(Self { molecular, ..*self })
    }

    /// Sets V_DB = V_BA = `v`.
    pub fn with_symmetric_coupling(&self, v: T) -> Result<Self> {
        let m = self.molecular;
        let molecular = MolecularParams::new(m.u_d, m.u_b, m.u_a, v, v, m.lambda_da)?;
        Ok(Self { molecular, ..*self })
    }

    /// Displacements of the donor-bridge, bridge-acceptor and donor-acceptor overlaps.
    ///
    /// On resonance the bridge carries no dipole, so these come from `μ_DD`,
    /// `−μ_AA` and `μ_DD − μ_AA`; off resonance from `d_db`, `d_ba`, `d_da`.
    pub fn displacements(&self) -> Result<Displacements<T>> {
        let (db, ba, da) = match self.dipoles {
            DipoleSet::Resonant { mu_dd, mu_aa, .. } => (mu_dd, -mu_aa, mu_dd - mu_aa),
            DipoleSet::OffResonant { d_db, d_ba, d_da, .. } => (d_db, d_ba, d_da),
        };
        let (chi, w) = (self.cavity.chi, self.cavity.hbar_omega_c);
        Ok(Displacements {
            db: displacement_parameter(chi, db, w)?,
            ba: displacement_parameter(chi, ba, w)?,
            da: displacement_parameter(chi, da, w)?,
        })
    }

    pub fn with_truncation(&self, truncation: TruncationPolicy) -> Self {
        Self { truncation, ..*self }
    }

    pub fn cast<U: Real>(&self) -> Result<SystemSpec<U>> {
        let dipoles = self.dipoles.cast::<U>();
        SystemSpec::new(
            self.molecular.cast(),
            CavityParams::new(U::lit(self.cavity.hbar_omega_c.as_f64()), U::lit(self.cavity.chi.as_f64()), &dipoles)?,
            dipoles,
            ThermalParams::new(U::lit(self.thermal.temperature.as_f64()))?,
            self.truncation,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dipoles() -> DipoleSet<f64> {
        DipoleSet::off_resonant(1.0, 1.0, 5.0, 5.0, 1.0).unwrap()
    }

    #[test]
    fn lambda_must_be_positive() {
        let err = MolecularParams::new(0.0, 1.5, 0.0, 0.02, 0.02, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda_da must be positive"), "{err}");
    }

    #[test]
    fn bridge_must_be_above_both_wells() {
        assert!(MolecularParams::new(0.0, -0.1, -1.0, 0.02, 0.02, 0.65).is_err());
        assert!(MolecularParams::new(0.0, 0.5, 0.6, 0.02, 0.02, 0.65).is_err());
        assert!(MolecularParams::new(0.15, 1.65, 0.0, 0.005, 0.005, 0.65).is_ok());
    }

    #[test]
    fn chi_scaling_is_exact() {
        let d = dipoles();
        let a = CavityParams::new(0.2, 0.004, &d).unwrap();
        let b = CavityParams::new(0.2, 3.0 * 0.004, &d).unwrap();
        assert_eq!(b.hbar_g_c, 3.0 * 0.004 * 1.0);
        assert_eq!(b.hbar_g_c, 3.0 * a.hbar_g_c);
        assert_eq!(b.hbar_eta_c, 3.0 * a.hbar_eta_c);
    }

    #[test]
    fn negative_chi_and_zero_photon_energy_rejected() {
        let d = dipoles();
        assert!(CavityParams::new(0.2, -1e-3, &d).is_err());
        assert!(CavityParams::new(0.0, 1e-3, &d).is_err());
    }

    #[test]
    fn coupling_back_derivation() {
        let d = DipoleSet::resonant(2.0f64, 5.0, -5.0).unwrap();
        let c = CavityParams::from_coupling(0.86, 0.043, &d).unwrap();
        assert!((c.chi - 0.0215).abs() < 1e-17);
        assert!((c.hbar_g_c - 0.043).abs() < 1e-17);
        assert_eq!(c.hbar_eta_c, 0.0);
    }

    #[test]
    fn transition_dipoles_nonzero() {
        assert!(DipoleSet::resonant(0.0, 5.0, -5.0).is_err());
        assert!(DipoleSet::off_resonant(1.0, 0.0, 5.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn truncation_validation() {
        assert!(TruncationPolicy::fixed(0, 4, 4).is_err());
        assert!(TruncationPolicy::adaptive(0.0).is_err());
        assert!(TruncationPolicy::adaptive(1.0).is_err());
        let p = TruncationPolicy::default();
        assert_eq!(p.mode, TruncationMode::Adaptive { tol: 1e-8 });
        assert_eq!(p.n_max, 8);
    }
}
