//! Special functions: log-gamma and log-factorial.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive real arguments (Lanczos, g = 7).
///
/// Arguments below 0.5 go through the reflection formula.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // ln Γ(x) = ln(π / |sin πx|) − ln Γ(1 − x)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_index(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// ln(k!) — exact table for k ≤ 20, log-gamma beyond.
pub fn ln_factorial<T: Real>(k: usize) -> T {
    if k <= 20 {
        let mut acc = 1.0f64;
        for j in 2..=k {
            acc *= j as f64;
        }
        // 20! < 2^62 so the product above is exact in f64
        return T::lit(acc.ln());
    }
    ln_gamma(T::from_index(k) + T::one())
}
