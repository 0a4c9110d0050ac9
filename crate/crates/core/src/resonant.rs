//! Cavity mode resonant with the donor-acceptor charge-transfer transition.
//!
//! Donor and acceptor are dressed by the photon field through their permanent
//! dipoles; the bridge is not. With `ħg_c` the transition coupling and
//! `S^XY` the displacement overlaps:
//!
//! * direct: `ħg_c [√n S^DA(n−1, m) + √(n+1) S^DA(n+1, m)]`
//! * bridge: `−(Ṽ^DB_n Ṽ^BA_m / 2) [1/(gap_ba − mħω) + 1/(gap_db − nħω)]`
//!   with `Ṽ^DB_n = V_DB S^DB(n, 0)` and `Ṽ^BA_m = V_BA S^BA(0, m)`.
//!
//! The donor displacement uses `χμ_DD`, the acceptor one `−χμ_AA` and the
//! direct term `χ(μ_DD − μ_AA)`, each divided by `ħω_c`.

use crate::error::{PmetError, PoleLocation, Result};
use crate::fock::{headroom, overlap_matrix, OverlapMatrix};
use crate::marcus::guard_denominator;
use crate::model::{CavityMode, Displacements, SystemSpec};
use crate::rate::{assemble, drive, thermal_populations, Amplitudes, ChannelSource, Cutoffs, RateOptions, RateResult};
use crate::scalar::Real;

pub fn dressed_db_coupling<T: Real>(n: usize, v_db: T, s_db: &OverlapMatrix<T>) -> Result<T> {
    Ok(v_db * s_db.entry(n, 0)?)
}

pub fn dressed_ba_coupling<T: Real>(m: usize, v_ba: T, s_ba: &OverlapMatrix<T>) -> Result<T> {
    Ok(v_ba * s_ba.entry(0, m)?)
}

pub fn direct_da_coupling<T: Real>(n: usize, m: usize, hbar_g_c: T, s_da: &OverlapMatrix<T>) -> Result<T> {
    let raising = T::from_index(n + 1).sqrt() * s_da.entry(n + 1, m)?;
    let lowering = if n == 0 { T::zero() } else { T::from_index(n).sqrt() * s_da.entry(n - 1, m)? };
    Ok(hbar_g_c * (lowering + raising))
}

/// `value / denominator`, skipping the pole check when the numerator is exactly zero.
pub(crate) fn quotient<T: Real>(value: T, denominator: T, location: impl FnOnce() -> PoleLocation) -> Result<T> {
    if value == T::zero() {
        return Ok(T::zero());
    }
    Ok(value / guard_denominator(denominator, location)?)
}

/// Bridge-mediated amplitude of channel `(n, m)` from the already dressed couplings.
pub fn bridge_coupling<T: Real>(
    n: usize,
    m: usize,
    v_db_dressed: T,
    v_ba_dressed: T,
    gap_ba: T,
    gap_db: T,
    hbar_omega_c: T,
) -> Result<T> {
    let half = v_db_dressed * v_ba_dressed / T::lit(2.0);
    let to_acceptor = quotient(half, gap_ba - T::from_index(m) * hbar_omega_c, || {
        PoleLocation::channel("U_B - U_A - m*hbar_omega_c", n, None, m)
    })?;
    let from_donor = quotient(half, gap_db - T::from_index(n) * hbar_omega_c, || {
        PoleLocation::channel("U_B - U_D - n*hbar_omega_c", n, None, m)
    })?;
    Ok(-(to_acceptor + from_donor))
}

/// Overlaps, dressed couplings and thermal weights for one set of cutoffs.
#[derive(Debug, Clone)]
pub struct ResonantModel<T> {
    spec: SystemSpec<T>,
    cutoffs: Cutoffs,
    s_db: OverlapMatrix<T>,
    s_ba: OverlapMatrix<T>,
    s_da: OverlapMatrix<T>,
    v_db: Vec<T>,
    v_ba: Vec<T>,
    populations: Vec<T>,
}

impl<T: Real> ResonantModel<T> {
    pub fn new(spec: &SystemSpec<T>, n_max: usize, m_max: usize) -> Result<Self> {
        spec.require_mode(CavityMode::Resonant)?;
        let cav = &spec.cavity;
        let Displacements { db: d_db, ba: d_ba, da: d_da } = spec.displacements()?;

        // ΔG_nm reads the donor coupling at m and the acceptor coupling at n
        let k = n_max.max(m_max);
        let s_db = overlap_matrix(d_db, k + 1 + headroom(d_db))?;
        let s_ba = overlap_matrix(d_ba, k + 1 + headroom(d_ba))?;
        let s_da = overlap_matrix(d_da, k + 2 + headroom(d_da))?;

        let mol = &spec.molecular;
        let v_db = (0..=k).map(|i| dressed_db_coupling(i, mol.v_db, &s_db)).collect::<Result<Vec<_>>>()?;
        let v_ba = (0..=k).map(|i| dressed_ba_coupling(i, mol.v_ba, &s_ba)).collect::<Result<Vec<_>>>()?;
        let populations = thermal_populations(spec.thermal.beta, cav.hbar_omega_c, n_max)?;

        Ok(Self {
            spec: *spec,
            cutoffs: Cutoffs { n_max, l_max: None, m_max },
            s_db,
            s_ba,
            s_da,
            v_db,
            v_ba,
            populations,
        })
    }

    pub fn overlaps(&self) -> [&OverlapMatrix<T>; 3] {
        [&self.s_db, &self.s_ba, &self.s_da]
    }

    fn check(&self, n: usize, m: usize) -> Result<()> {
        let c = self.cutoffs;
        if n > c.n_max {
            return Err(PmetError::Truncation { index: n, size: c.n_max + 1 });
        }
        if m > c.m_max {
            return Err(PmetError::Truncation { index: m, size: c.m_max + 1 });
        }
        Ok(())
    }

    pub fn dressed_db(&self, n: usize) -> Result<T> {
        self.v_db.get(n).copied().ok_or(PmetError::Truncation { index: n, size: self.v_db.len() })
    }

    pub fn dressed_ba(&self, m: usize) -> Result<T> {
        self.v_ba.get(m).copied().ok_or(PmetError::Truncation { index: m, size: self.v_ba.len() })
    }

    pub fn direct(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        direct_da_coupling(n, m, self.spec.cavity.hbar_g_c, &self.s_da)
    }

    pub fn bridge(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        let mol = &self.spec.molecular;
        bridge_coupling(n, m, self.v_db[n], self.v_ba[m], mol.gap_ba(), mol.gap_db(), self.spec.cavity.hbar_omega_c)
    }

    pub fn driving_force(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        let mol = &self.spec.molecular;
        let w = self.spec.cavity.hbar_omega_c;
        let (nt, mt) = (T::from_index(n), T::from_index(m));
        let acceptor = quotient(self.v_ba[n] * self.v_ba[m], mol.gap_ba() - mt * w, || {
            PoleLocation::channel("U_B - U_A - m*hbar_omega_c", n, None, m)
        })?;
        let donor = quotient(self.v_db[n] * self.v_db[m], mol.gap_db() - nt * w, || {
            PoleLocation::channel("U_B - U_D - n*hbar_omega_c", n, None, m)
        })?;
        Ok(-mol.u_d_minus_u_a() + (mt - nt) * w - acceptor + donor)
    }
}

impl<T: Real> ChannelSource<T> for ResonantModel<T> {
    fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    fn populations(&self) -> &[T] {
        &self.populations
    }

    fn lambda(&self) -> T {
        self.spec.molecular.lambda_da
    }

    fn kt(&self) -> T {
        self.spec.thermal.kt
    }

    fn amplitudes(&self, n: usize, m: usize) -> Result<Amplitudes<T>> {
        Ok(Amplitudes { f_direct: self.direct(n, m)?, f_bridge: self.bridge(n, m)?, delta_g: self.driving_force(n, m)? })
    }
}

/// ΔG of channel `(n, m)`; builds a model just large enough for the indices.
pub fn channel_driving_force<T: Real>(n: usize, m: usize, spec: &SystemSpec<T>) -> Result<T> {
    ResonantModel::new(spec, n.max(1), m.max(1))?.driving_force(n, m)
}

pub fn pmet_rate_resonant<T: Real>(spec: &SystemSpec<T>) -> Result<RateResult<T>> {
    pmet_rate_resonant_with(spec, RateOptions::default())
}

pub fn pmet_rate_resonant_with<T: Real>(spec: &SystemSpec<T>, opts: RateOptions) -> Result<RateResult<T>> {
    spec.require_mode(CavityMode::Resonant)?;
    drive(CavityMode::Resonant, spec.truncation, opts, false, |cut| {
        let model = ResonantModel::new(spec, cut.n_max, cut.m_max)?;
        assemble(&model, opts)
    })
}
