//! Cavity mode detuned from every electronic transition.
//!
//! All three sites are photon dressed. The donor-bridge and bridge-acceptor
//! couplings pick up a transition-dipole term in addition to the overlap:
//!
//! ```text
//! Ṽ^DB(n, l) = V_DB S^DB(n, l) + ħg_c [√n S^DB(n−1, l) + √(n+1) S^DB(n+1, l)]
//! Ṽ^BA(l, m) = V_BA S^BA(l, m) + ħη_c [√l S^BA(l−1, m) + √(l+1) S^BA(l+1, m)]
//! ```
//!
//! The direct amplitude is `(ħg_c ħη_c / ħω_c) S^DA(n, m)` and the bridge
//! amplitude sums virtual bridge photon numbers `l`. Amplitudes are real, so
//! every conjugate and transpose is the identity.

use crate::error::{PmetError, PoleLocation, Result};
use crate::fock::{headroom, overlap_matrix, OverlapMatrix};
use crate::model::{CavityMode, Displacements, SystemSpec, TruncationPolicy};
use crate::rate::{
    assemble, drive, thermal_populations, Amplitudes, ChannelSource, Cutoffs, PathwayMode, RateOptions, RateResult,
};
use crate::resonant::quotient;
use crate::scalar::Real;

/// `v·S(i, j) + g [√i S(i−1, j) + √(i+1) S(i+1, j)]`
fn dressed<T: Real>(i: usize, j: usize, v: T, g: T, s: &OverlapMatrix<T>) -> Result<T> {
    let mut value = v * s.entry(i, j)?;
    if g != T::zero() {
        let lowering = if i == 0 { T::zero() } else { T::from_index(i).sqrt() * s.entry(i - 1, j)? };
        value = value + g * (lowering + T::from_index(i + 1).sqrt() * s.entry(i + 1, j)?);
    }
    Ok(value)
}

/// Precomputed overlaps and dressed coupling tables for one set of cutoffs.
#[derive(Debug, Clone)]
pub struct OffResonantModel<T> {
    spec: SystemSpec<T>,
    cutoffs: Cutoffs,
    s_da: OverlapMatrix<T>,
    /// `[n][l]`, `n ≤ max(n_max, m_max)`
    v_db: Vec<Vec<T>>,
    /// `[l][m]`, `m ≤ max(n_max, m_max)`
    v_ba: Vec<Vec<T>>,
    direct_scale: T,
    populations: Vec<T>,
}

impl<T: Real> OffResonantModel<T> {
    pub fn new(spec: &SystemSpec<T>, n_max: usize, l_max: usize, m_max: usize) -> Result<Self> {
        spec.require_mode(CavityMode::OffResonant)?;
        let cav = &spec.cavity;
        let Displacements { db: disp_db, ba: disp_ba, da: disp_da } = spec.displacements()?;

        // the driving force reads Ṽ^DB at row m and Ṽ^BA at column n
        let k = n_max.max(m_max);
        let s_db = overlap_matrix(disp_db, k.max(l_max) + 2 + headroom(disp_db))?;
        let s_ba = overlap_matrix(disp_ba, k.max(l_max) + 2 + headroom(disp_ba))?;
        let s_da = overlap_matrix(disp_da, k + 1 + headroom(disp_da))?;

        let mol = &spec.molecular;
        let v_db = (0..=k)
            .map(|n| (0..=l_max).map(|l| dressed(n, l, mol.v_db, cav.hbar_g_c, &s_db)).collect())
            .collect::<Result<Vec<Vec<T>>>>()?;
        let v_ba = (0..=l_max)
            .map(|l| (0..=k).map(|m| dressed(l, m, mol.v_ba, cav.hbar_eta_c, &s_ba)).collect())
            .collect::<Result<Vec<Vec<T>>>>()?;

        Ok(Self {
            spec: *spec,
            cutoffs: Cutoffs { n_max, l_max: Some(l_max), m_max },
            s_da,
            v_db,
            v_ba,
            direct_scale: cav.hbar_g_c * cav.hbar_eta_c / cav.hbar_omega_c,
            populations: thermal_populations(spec.thermal.beta, cav.hbar_omega_c, n_max)?,
        })
    }

    fn l_max(&self) -> usize {
        self.v_ba.len() - 1
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

    pub fn dressed_db(&self, n: usize, l: usize) -> Result<T> {
        let row = self.v_db.get(n).ok_or(PmetError::Truncation { index: n, size: self.v_db.len() })?;
        row.get(l).copied().ok_or(PmetError::Truncation { index: l, size: row.len() })
    }

    pub fn dressed_ba(&self, l: usize, m: usize) -> Result<T> {
        let row = self.v_ba.get(l).ok_or(PmetError::Truncation { index: l, size: self.v_ba.len() })?;
        row.get(m).copied().ok_or(PmetError::Truncation { index: m, size: row.len() })
    }

    pub fn direct(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        Ok(self.direct_scale * self.s_da.get(n, m))
    }

    /// Bridge-mediated amplitude, summed over `l = 0..=l_max` in ascending order.
    pub fn indirect(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        let mol = &self.spec.molecular;
        let w = self.spec.cavity.hbar_omega_c;
        let (gap_ba, gap_db) = (mol.gap_ba(), mol.gap_db());
        let (nt, mt) = (T::from_index(n), T::from_index(m));
        let mut sum = T::zero();
        for l in 0..=self.l_max() {
            let half = self.v_db[n][l] * self.v_ba[l][m] / T::lit(2.0);
            let lt = T::from_index(l);
            let to_acceptor = quotient(half, gap_ba + (lt - mt) * w, || {
                PoleLocation::channel("U_B - U_A + (l-m)*hbar_omega_c", n, Some(l), m)
            })?;
            let from_donor = quotient(half, gap_db + (lt - nt) * w, || {
                PoleLocation::channel("U_B - U_D + (l-n)*hbar_omega_c", n, Some(l), m)
            })?;
            sum = sum - to_acceptor - from_donor;
        }
        Ok(sum)
    }

    pub fn total(&self, n: usize, m: usize, mode: PathwayMode) -> Result<T> {
        let direct = if mode == PathwayMode::BridgeOnly { T::zero() } else { self.direct(n, m)? };
        let bridge = if mode == PathwayMode::DirectOnly { T::zero() } else { self.indirect(n, m)? };
        Ok(direct + bridge)
    }

    pub fn driving_force(&self, n: usize, m: usize) -> Result<T> {
        self.check(n, m)?;
        let mol = &self.spec.molecular;
        let w = self.spec.cavity.hbar_omega_c;
        let (nt, mt) = (T::from_index(n), T::from_index(m));
        let mut acceptor = T::zero();
        let mut donor = T::zero();
        for l in 0..=self.l_max() {
            let lt = T::from_index(l);
            acceptor = acceptor
                + quotient(self.v_ba[l][n] * self.v_ba[l][m], mol.gap_ba() + (lt - mt) * w, || {
                    PoleLocation::channel("U_B - U_A + (l-m)*hbar_omega_c", n, Some(l), m)
                })?;
            donor = donor
                + quotient(self.v_db[n][l] * self.v_db[m][l], mol.gap_db() + (lt - nt) * w, || {
                    PoleLocation::channel("U_B - U_D + (l-n)*hbar_omega_c", n, Some(l), m)
                })?;
        }
        Ok(-mol.u_d_minus_u_a() + (mt - nt) * w - acceptor + donor)
    }
}

impl<T: Real> ChannelSource<T> for OffResonantModel<T> {
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
        Ok(Amplitudes { f_direct: self.direct(n, m)?, f_bridge: self.indirect(n, m)?, delta_g: self.driving_force(n, m)? })
    }
}

fn probe<T: Real>(spec: &SystemSpec<T>, n: usize, m: usize) -> Result<OffResonantModel<T>> {
    let t = spec.truncation;
    OffResonantModel::new(spec, t.n_max.max(n).max(m), t.l_max, t.n_max.max(n).max(m))
}

fn probe_l<T: Real>(spec: &SystemSpec<T>, l: usize) -> Result<OffResonantModel<T>> {
    let t = spec.truncation;
    OffResonantModel::new(spec, t.n_max.max(l), t.l_max.max(l), t.m_max.max(l))
}

pub fn dressed_db_offres<T: Real>(n: usize, l: usize, spec: &SystemSpec<T>) -> Result<T> {
    probe_l(spec, n.max(l))?.dressed_db(n, l)
}

pub fn dressed_ba_offres<T: Real>(l: usize, m: usize, spec: &SystemSpec<T>) -> Result<T> {
    probe_l(spec, l.max(m))?.dressed_ba(l, m)
}

pub fn direct_da_offres<T: Real>(n: usize, m: usize, spec: &SystemSpec<T>) -> Result<T> {
    probe(spec, n, m)?.direct(n, m)
}

pub fn indirect_da_offres<T: Real>(n: usize, m: usize, spec: &SystemSpec<T>, l_max: usize) -> Result<T> {
    let k = n.max(m);
    OffResonantModel::new(spec, k, l_max, k)?.indirect(n, m)
}

pub fn total_da_offres<T: Real>(n: usize, m: usize, spec: &SystemSpec<T>, mode: PathwayMode) -> Result<T> {
    probe(spec, n, m)?.total(n, m, mode)
}

pub fn channel_driving_force_offres<T: Real>(n: usize, m: usize, spec: &SystemSpec<T>, l_max: usize) -> Result<T> {
    let k = n.max(m);
    OffResonantModel::new(spec, k, l_max, k)?.driving_force(n, m)
}

pub fn pmet_rate_offres<T: Real>(spec: &SystemSpec<T>, mode: PathwayMode) -> Result<RateResult<T>> {
    pmet_rate_offres_with(spec, RateOptions::pathway(mode))
}

pub fn pmet_rate_offres_with<T: Real>(spec: &SystemSpec<T>, opts: RateOptions) -> Result<RateResult<T>> {
    spec.require_mode(CavityMode::OffResonant)?;
    drive(CavityMode::OffResonant, spec.truncation, opts, true, |cut| {
        let l_max = cut.l_max.unwrap_or(TruncationPolicy::ADAPTIVE_START);
        let model = OffResonantModel::new(spec, cut.n_max, l_max, cut.m_max)?;
        assemble(&model, opts)
    })
}
