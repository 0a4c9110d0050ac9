//! Displacement-operator matrix elements between photon Fock states.
//!
//! `S[n][m] = ⟨n| exp(d (a† − a)) |m⟩` for real `d`. The analytic path uses
//! the associated-Laguerre closed form; [`overlap_matrix_oracle`] exponentiates
//! the truncated generator directly and shares no code with it.

use crate::error::{PmetError, Result};
use crate::scalar::Real;
use crate::special::ln_factorial;

/// Real displacement amplitude `d = χ·Δμ / ħω_c`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DisplacementParam<T>(T);

impl<T: Real> DisplacementParam<T> {
    pub fn new(d: T) -> Result<Self> {
        if d.is_finite() {
            Ok(Self(d))
        } else {
            Err(PmetError::invalid("d", format!("displacement must be finite, got {d}")))
        }
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn value(self) -> T {
        self.0
    }
}

impl<T: Real> std::ops::Neg for DisplacementParam<T> {
    type Output = Self;

    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Reduces the polaron exponent to `d = chi * delta_mu / hbar_omega_c`.
pub fn displacement_parameter<T: Real>(chi: T, delta_mu: T, hbar_omega_c: T) -> Result<DisplacementParam<T>> {
    if !(hbar_omega_c > T::zero()) {
        return Err(PmetError::invalid("hbar_omega_c", "photon energy must be positive"));
    }
    DisplacementParam::new(chi * delta_mu / hbar_omega_c)
}

/// Extra basis states needed before a truncated exponential can be trusted: `ceil(4d² + 10)`.
pub fn headroom<T: Real>(d: DisplacementParam<T>) -> usize {
    let d = d.value().as_f64();
    (4.0 * d * d + 10.0).ceil() as usize
}

/// Dense, row-major `size × size` block of the displacement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix<T> {
    d: DisplacementParam<T>,
    size: usize,
    data: Vec<T>,
}

impl<T: Real> OverlapMatrix<T> {
    pub fn d(&self) -> DisplacementParam<T> {
        self.d
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry `(n, m)`; panics outside the block.
    #[inline]
    pub fn get(&self, n: usize, m: usize) -> T {
        assert!(n < self.size && m < self.size, "({n}, {m}) outside {}x{} overlap block", self.size, self.size);
        self.data[n * self.size + m]
    }

    pub fn entry(&self, n: usize, m: usize) -> Result<T> {
        let worst = n.max(m);
        if worst >= self.size {
            return Err(PmetError::Truncation { index: worst, size: self.size });
        }
        Ok(self.data[n * self.size + m])
    }

    pub fn row(&self, n: usize) -> &[T] {
        &self.data[n * self.size..(n + 1) * self.size]
    }

    pub fn transpose(&self) -> Self {
        let s = self.size;
        let mut data = vec![T::zero(); s * s];
        for n in 0..s {
            for m in 0..s {
                data[m * s + n] = self.data[n * s + m];
            }
        }
        Self { d: self.d, size: s, data }
    }

    /// Truncated matrix product, row-major.
    pub fn product(&self, other: &Self) -> Result<Vec<T>> {
        if other.size != self.size {
            return Err(PmetError::invalid("size", "overlap blocks must have equal size"));
        }
        Ok(matmul(&self.data, &other.data, self.size))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let s = self.size.min(other.size);
        let mut worst = T::zero();
        for n in 0..s {
            for m in 0..s {
                worst = worst.max((self.get(n, m) - other.get(n, m)).abs());
            }
        }
        worst
    }

    pub fn cast<U: Real>(&self) -> OverlapMatrix<U> {
        OverlapMatrix {
            d: DisplacementParam(U::lit(self.d.0.as_f64())),
            size: self.size,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }
}

/// Closed-form block.
///
/// For `n = m + k ≥ m`:
/// `S[n][m] = √(m!/n!) · d^k · e^{−d²/2} · L_m^{(k)}(d²)`, and
/// `S[m][n] = (−1)^k S[n][m]`. Each diagonal `k` is filled with one pass of
/// the three-term Laguerre recurrence, run on the normalized sequence
/// `ℓ_j = L_j^{(k)}(d²) · √(j!·k!/(j+k)!)` so that no factorial is formed.
pub fn overlap_matrix<T: Real>(d: DisplacementParam<T>, size: usize) -> Result<OverlapMatrix<T>> {
    if size == 0 {
        return Err(PmetError::invalid("size", "overlap matrix needs at least one Fock state"));
    }
    let mut data = vec![T::zero(); size * size];
    let dv = d.value();
    if dv == T::zero() {
        for i in 0..size {
            data[i * size + i] = T::one();
        }
        return Ok(OverlapMatrix { d, size, data });
    }

    let x = dv * dv;
    let half = T::lit(0.5);
    let ln_abs_d = dv.abs().ln();
    let big = T::lit(1e30);
    let ln_big = big.ln();

    for k in 0..size {
        let kt = T::from_index(k);
        let negative = dv < T::zero() && k % 2 == 1;
        let ln_prefactor = kt * ln_abs_d - half * ln_factorial::<T>(k) - half * x;
        let mut log_scale = T::zero();
        let mut prev = T::zero();
        let mut cur = T::one();
        for m in 0..size - k {
            let mut value = (ln_prefactor + log_scale).exp() * cur;
            if negative {
                value = -value;
            }
            let n = m + k;
            data[n * size + m] = value;
            if k > 0 {
                data[m * size + n] = if k % 2 == 1 { -value } else { value };
            }

            let mt = T::from_index(m);
            let next = ((T::lit(2.0) * mt + T::one() + kt - x) * cur - (mt * (mt + kt)).sqrt() * prev)
                / ((mt + T::one()) * (mt + T::one() + kt)).sqrt();
            prev = cur;
            cur = next;
            if cur.abs() > big {
                cur = cur / big;
                prev = prev / big;
                log_scale = log_scale + ln_big;
            }
        }
    }
    Ok(OverlapMatrix { d, size, data })
}

fn matmul<T: Real>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == T::zero() {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (o, &bkj) in dst.iter_mut().zip(row) {
                *o = *o + aik * bkj;
            }
        }
    }
    out
}

/// exp(A) by scaling and squaring around a Taylor core.
fn expm<T: Real>(a: &[T], n: usize) -> Vec<T> {
    let norm = (0..n)
        .map(|i| a[i * n..(i + 1) * n].iter().fold(T::zero(), |acc, &v| acc + v.abs()))
        .fold(T::zero(), T::max);
    let mut squarings = 0u32;
    let mut scale = T::one();
    while norm * scale > T::lit(0.5) {
        scale = scale * T::lit(0.5);
        squarings += 1;
    }
    let b: Vec<T> = a.iter().map(|&v| v * scale).collect();

    let mut result = vec![T::zero(); n * n];
    let mut term = vec![T::zero(); n * n];
    for i in 0..n {
        result[i * n + i] = T::one();
        term[i * n + i] = T::one();
    }
    for j in 1..=40 {
        term = matmul(&term, &b, n);
        let inv = T::from_index(j).recip();
        let mut biggest = T::zero();
        for (r, t) in result.iter_mut().zip(term.iter_mut()) {
            *t = *t * inv;
            *r = *r + *t;
            biggest = biggest.max(t.abs());
        }
        if biggest < T::epsilon() * T::lit(1e-3) {
            break;
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result, n);
    }
    result
}

/// Independent check: exponentiate `d (a† − a)` in a `work`-state basis and keep the top-left `size` block.
pub fn overlap_matrix_oracle<T: Real>(d: DisplacementParam<T>, size: usize, work: usize) -> Result<OverlapMatrix<T>> {
    if size == 0 {
        return Err(PmetError::invalid("size", "overlap matrix needs at least one Fock state"));
    }
    if work < 2 * size {
        return Err(PmetError::invalid(
            "n_work",
            format!("working basis {work} must be at least twice the block size {size}"),
        ));
    }
    let dv = d.value();
    let mut gen = vec![T::zero(); work * work];
    for j in 0..work - 1 {
        let amp = dv * T::from_index(j + 1).sqrt();
        gen[(j + 1) * work + j] = amp; // a†
        gen[j * work + j + 1] = -amp; // −a
    }
    let full = expm(&gen, work);
    let mut data = Vec::with_capacity(size * size);
    for n in 0..size {
        data.extend_from_slice(&full[n * work..n * work + size]);
    }
    Ok(OverlapMatrix { d, size, data })
}
