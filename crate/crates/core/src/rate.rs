//! Golden-rule assembly over photon channels, shared by both cavity models.
//!
//! A model only has to produce the direct amplitude, the bridge amplitude and
//! the driving force of channel `(n, m)`. Everything else lives here: thermal
//! weights, the parallel channel sweep with an index-ordered reduction, pole
//! handling and the adaptive truncation staircase.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{PmetError, Result};
use crate::marcus::golden_rule_factor;
use crate::model::{CavityMode, TruncationMode, TruncationPolicy};
use crate::scalar::Real;

/// Amplitudes smaller than this are dropped from the channel table.
pub const NEGLIGIBLE_AMPLITUDE: f64 = 1e-300;

/// Which part of the donor-acceptor amplitude enters the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PathwayMode {
    #[default]
    Total,
    DirectOnly,
    BridgeOnly,
}

impl PathwayMode {
    pub const ALL: [PathwayMode; 3] = [PathwayMode::Total, PathwayMode::DirectOnly, PathwayMode::BridgeOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Total => "total",
            Self::DirectOnly => "direct_only",
            Self::BridgeOnly => "bridge_only",
        }
    }

    #[inline]
    pub fn select<T: Real>(self, f_direct: T, f_bridge: T) -> T {
        match self {
            Self::Total => f_direct + f_bridge,
            Self::DirectOnly => f_direct,
            Self::BridgeOnly => f_bridge,
        }
    }
}

impl fmt::Display for PathwayMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PathwayMode {
    type Err = PmetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "total" => Ok(Self::Total),
            "direct" | "direct_only" => Ok(Self::DirectOnly),
            "bridge" | "bridge_only" => Ok(Self::BridgeOnly),
            other => Err(PmetError::config("pathway", format!("unknown pathway `{other}` (total, direct, bridge)"))),
        }
    }
}

/// What to do when a photon-shifted denominator lands on a resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolePolicy {
    #[default]
    Abort,
    /// Drop the offending channel and count it.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RateOptions {
    pub pathway: PathwayMode,
    pub poles: PolePolicy,
}

impl RateOptions {
    pub fn pathway(pathway: PathwayMode) -> Self {
        Self { pathway, ..Self::default() }
    }

    pub fn skip_poles(self) -> Self {
        Self { poles: PolePolicy::Skip, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoffs {
    pub n_max: usize,
    /// Bridge photon cutoff; only the off-resonance model has one.
    pub l_max: Option<usize>,
    pub m_max: usize,
}

impl Cutoffs {
    pub fn largest(&self) -> usize {
        self.n_max.max(self.m_max).max(self.l_max.unwrap_or(0))
    }

    fn doubled(&self) -> Self {
        Self { n_max: self.n_max * 2, l_max: self.l_max.map(|l| l * 2), m_max: self.m_max * 2 }
    }
}

impl fmt::Display for Cutoffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.l_max {
            Some(l) => write!(f, "n<={}, l<={}, m<={}", self.n_max, l, self.m_max),
            None => write!(f, "n<={}, m<={}", self.n_max, self.m_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRow<T> {
    pub n: usize,
    pub m: usize,
    pub f_direct: T,
    pub f_bridge: T,
    /// Always `f_direct + f_bridge`, whatever pathway was selected.
    pub f_total: T,
    pub delta_g: T,
    pub p_n: T,
    /// Unweighted channel rate for the selected pathway; the total is `Σ p_n · partial_rate`.
    pub partial_rate: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelTable<T> {
    rows: Vec<ChannelRow<T>>,
}

impl<T: Real> ChannelTable<T> {
    pub fn rows(&self) -> &[ChannelRow<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ChannelRow<T>> {
        self.rows.iter()
    }

    pub fn get(&self, n: usize, m: usize) -> Option<&ChannelRow<T>> {
        self.rows.iter().find(|r| r.n == n && r.m == m)
    }

    pub fn weighted_sum(&self) -> T {
        self.rows.iter().fold(T::zero(), |acc, r| acc + r.p_n * r.partial_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub converged: bool,
    /// Relative change of the total over the last doubling; `None` for fixed truncation.
    pub rel_change: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationStep<T> {
    pub cutoffs: Cutoffs,
    pub total_rate: T,
    pub skipped_poles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult<T> {
    pub mode: CavityMode,
    pub pathway: PathwayMode,
    pub total_rate: T,
    pub table: ChannelTable<T>,
    pub truncation_used: Cutoffs,
    pub convergence: Convergence,
    pub skipped_poles: usize,
    /// Every cutoff level evaluated, in order.
    pub history: Vec<TruncationStep<T>>,
}

/// Boltzmann weights of the photon number, normalized over `0..=n_max`.
pub fn thermal_populations<T: Real>(beta: T, hbar_omega_c: T, n_max: usize) -> Result<Vec<T>> {
    if !(beta > T::zero() && beta.is_finite()) {
        return Err(PmetError::invalid("beta", "inverse temperature must be positive"));
    }
    if !(hbar_omega_c > T::zero() && hbar_omega_c.is_finite()) {
        return Err(PmetError::invalid("hbar_omega_c", "photon energy must be positive"));
    }
    let step = beta * hbar_omega_c;
    let weights: Vec<T> = (0..=n_max).map(|n| (-step * T::from_index(n)).exp()).collect();
    let z = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    Ok(weights.into_iter().map(|w| w / z).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Amplitudes<T> {
    pub f_direct: T,
    pub f_bridge: T,
    pub delta_g: T,
}

/// A photon-dressed model evaluated at fixed cutoffs.
pub(crate) trait ChannelSource<T: Real>: Sync {
    fn cutoffs(&self) -> Cutoffs;
    fn populations(&self) -> &[T];
    fn lambda(&self) -> T;
    fn kt(&self) -> T;
    fn amplitudes(&self, n: usize, m: usize) -> Result<Amplitudes<T>>;
}

#[derive(Debug, Clone)]
pub(crate) struct Assembly<T> {
    pub total: T,
    pub table: ChannelTable<T>,
    pub skipped: usize,
}

enum Outcome<T> {
    Row(ChannelRow<T>),
    Negligible,
    Skipped,
}

/// Evaluates every channel in parallel, then reduces in `(n, m)` order so the sum never depends on scheduling.
pub(crate) fn assemble<T: Real, S: ChannelSource<T>>(src: &S, opts: RateOptions) -> Result<Assembly<T>> {
    let cut = src.cutoffs();
    let width = cut.m_max + 1;
    let count = (cut.n_max + 1) * width;
    let populations = src.populations();
    let (lambda, kt) = (src.lambda(), src.kt());
    let tiny = T::lit(NEGLIGIBLE_AMPLITUDE);

    let outcomes: Vec<Result<Outcome<T>>> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let (n, m) = (idx / width, idx % width);
            let a = match src.amplitudes(n, m) {
                Ok(a) => a,
                Err(PmetError::Singularity { .. }) if opts.poles == PolePolicy::Skip => return Ok(Outcome::Skipped),
                Err(e) => return Err(e),
            };
            if a.f_direct.abs() < tiny && a.f_bridge.abs() < tiny {
                return Ok(Outcome::Negligible);
            }
            let f = opts.pathway.select(a.f_direct, a.f_bridge);
            Ok(Outcome::Row(ChannelRow {
                n,
                m,
                f_direct: a.f_direct,
                f_bridge: a.f_bridge,
                f_total: a.f_direct + a.f_bridge,
                delta_g: a.delta_g,
                p_n: populations[n],
                partial_rate: f * f * golden_rule_factor(a.delta_g, lambda, kt),
            }))
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = 0;
    let mut total = T::zero();
    for outcome in outcomes {
        match outcome? {
            Outcome::Row(row) => {
                total = total + row.p_n * row.partial_rate;
                rows.push(row);
            }
            Outcome::Negligible => {}
            Outcome::Skipped => skipped += 1,
        }
    }
    if !total.is_finite() {
        return Err(PmetError::invalid("rate", format!("non-finite total rate at {cut}")));
    }
    Ok(Assembly { total, table: ChannelTable { rows }, skipped })
}

fn relative_change<T: Real>(prev: T, cur: T) -> f64 {
    let (prev, cur) = (prev.as_f64(), cur.as_f64());
    if prev == cur {
        0.0
    } else {
        (cur - prev).abs() / cur.abs().max(prev.abs())
    }
}

/// Runs `evaluate` at the policy's cutoffs, doubling them jointly in adaptive mode
/// until the total moves by less than the tolerance. The finer level is returned.
pub(crate) fn drive<T: Real>(
    mode: CavityMode,
    policy: TruncationPolicy,
    opts: RateOptions,
    with_bridge_index: bool,
    mut evaluate: impl FnMut(Cutoffs) -> Result<Assembly<T>>,
) -> Result<RateResult<T>> {
    let mut cut = Cutoffs {
        n_max: policy.n_max,
        l_max: with_bridge_index.then_some(policy.l_max),
        m_max: policy.m_max,
    };
    let finish = |a: Assembly<T>, cut: Cutoffs, convergence: Convergence, history: Vec<TruncationStep<T>>| RateResult {
        mode,
        pathway: opts.pathway,
        total_rate: a.total,
        table: a.table,
        truncation_used: cut,
        convergence,
        skipped_poles: a.skipped,
        history,
    };

    let first = evaluate(cut)?;
    let mut history = vec![TruncationStep { cutoffs: cut, total_rate: first.total, skipped_poles: first.skipped }];
    let tol = match policy.mode {
        TruncationMode::Fixed => {
            return Ok(finish(first, cut, Convergence { converged: true, rel_change: None }, history));
        }
        TruncationMode::Adaptive { tol } => tol,
    };

    let mut prev = first.total;
    let mut last_delta = f64::INFINITY;
    loop {
        let next = cut.doubled();
        if next.largest() > TruncationPolicy::ADAPTIVE_CAP {
            return Err(PmetError::NonConvergence { cap: TruncationPolicy::ADAPTIVE_CAP, last_delta });
        }
        let level = evaluate(next)?;
        let delta = relative_change(prev, level.total);
        log::debug!("truncation {next}: rate {:e}, relative change {delta:e}", level.total.as_f64());
        history.push(TruncationStep { cutoffs: next, total_rate: level.total, skipped_poles: level.skipped });
        cut = next;
        if delta < tol {
            return Ok(finish(level, cut, Convergence { converged: true, rel_change: Some(delta) }, history));
        }
        prev = level.total;
        last_delta = delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn populations_at_high_frequency() {
        let beta = 1.0 / crate::units::boltzmann_kT(300.0).unwrap();
        let p: Vec<f64> = thermal_populations(beta, 0.86, 8).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn populations_geometric_series() {
        let p = thermal_populations(std::f64::consts::LN_2, 1.0, 80).unwrap();
        for (n, pn) in p.iter().enumerate().take(20) {
            assert!((pn - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15, "n = {n}");
        }
        let s: f64 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn populations_sum_to_one() {
        for (b, w, n) in [(40.0, 0.04, 3), (1.0, 0.01, 200), (3.0, 2.0, 0)] {
            let s: f64 = thermal_populations(b, w, n).unwrap().iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert!(thermal_populations(0.0, 0.2, 4).is_err());
        assert!(thermal_populations(1.0, -0.2, 4).is_err());
    }

    #[test]
    fn pathway_parsing() {
        assert_eq!("direct".parse::<PathwayMode>().unwrap(), PathwayMode::DirectOnly);
        assert_eq!("BRIDGE_ONLY".parse::<PathwayMode>().unwrap(), PathwayMode::BridgeOnly);
        assert_eq!("total".parse::<PathwayMode>().unwrap(), PathwayMode::Total);
        assert!("both".parse::<PathwayMode>().is_err());
        for p in PathwayMode::ALL {
            assert_eq!(p.as_str().parse::<PathwayMode>().unwrap(), p);
        }
    }

    #[test]
    fn relative_change_handles_zero() {
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert_eq!(relative_change(1.0, 2.0), 0.5);
    }

    struct Toy {
        cut: Cutoffs,
        p: Vec<f64>,
        pole_at: Option<(usize, usize)>,
    }

    impl ChannelSource<f64> for Toy {
        fn cutoffs(&self) -> Cutoffs {
            self.cut
        }
        fn populations(&self) -> &[f64] {
            &self.p
        }
        fn lambda(&self) -> f64 {
            0.65
        }
        fn kt(&self) -> f64 {
            0.025
        }
        fn amplitudes(&self, n: usize, m: usize) -> Result<Amplitudes<f64>> {
            if self.pole_at == Some((n, m)) {
                return Err(PmetError::Singularity {
                    location: crate::error::PoleLocation::channel("toy", n, None, m),
                    denominator: 0.0,
                });
            }
            let f = 1e-3 * 0.5f64.powi((n + m) as i32);
            Ok(Amplitudes { f_direct: f, f_bridge: if n == m { -0.5 * f } else { 0.0 }, delta_g: -0.1 })
        }
    }

    fn toy(k: usize, pole_at: Option<(usize, usize)>) -> Toy {
        Toy {
            cut: Cutoffs { n_max: k, l_max: None, m_max: k },
            p: thermal_populations(2.0, 1.0, k).unwrap(),
            pole_at,
        }
    }

    #[test]
    fn assembly_is_index_ordered_and_consistent() {
        let a = assemble(&toy(5, None), RateOptions::default()).unwrap();
        assert_eq!(a.table.len(), 36);
        let keys: Vec<_> = a.table.iter().map(|r| (r.n, r.m)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(a.total, a.table.weighted_sum());
        for r in a.table.iter() {
            assert_eq!(r.f_total, r.f_direct + r.f_bridge);
            assert!(r.partial_rate >= 0.0);
        }
    }

    #[test]
    fn poles_abort_or_skip() {
        let err = assemble(&toy(3, Some((1, 2))), RateOptions::default()).unwrap_err();
        assert!(matches!(err, PmetError::Singularity { .. }));
        let a = assemble(&toy(3, Some((1, 2))), RateOptions::default().skip_poles()).unwrap();
        assert_eq!(a.skipped, 1);
        assert_eq!(a.table.len(), 15);
        assert!(a.table.get(1, 2).is_none());
    }

    #[test]
    fn staircase_doubles_and_caps() {
        let policy = TruncationPolicy::adaptive(1e-6).unwrap();
        let mut seen = Vec::new();
        let r = drive(CavityMode::Resonant, policy, RateOptions::default(), false, |c| {
            seen.push(c.n_max);
            assemble(&toy(c.n_max, None), RateOptions::default())
        })
        .unwrap();
        assert_eq!(seen, vec![8, 16, 32]);
        assert!(r.convergence.converged);
        assert_eq!(r.truncation_used.n_max, 32);
        assert_eq!(r.history.len(), 3);

        let policy = TruncationPolicy::adaptive(1e-3).unwrap();
        let err = drive(CavityMode::Resonant, policy, RateOptions::default(), true, |c| {
            Ok(Assembly { total: c.n_max as f64, table: ChannelTable::default(), skipped: 0 })
        })
        .unwrap_err();
        assert!(matches!(err, PmetError::NonConvergence { cap: 256, .. }));
    }

    #[test]
    fn fixed_policy_evaluates_once() {
        let policy = TruncationPolicy::fixed(4, 4, 6).unwrap();
        let mut calls = 0;
        let r = drive(CavityMode::OffResonant, policy, RateOptions::default(), true, |c| {
            calls += 1;
            assert_eq!(c.l_max, Some(4));
            assemble(&toy(4, None), RateOptions::default())
        })
        .unwrap();
        assert_eq!(calls, 1);
        assert_eq!(r.convergence.rel_change, None);
    }
}
