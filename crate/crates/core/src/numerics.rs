//! Log-space special functions and probability kernels.
//!
//! Everything here is a pure function of its arguments. Probabilities are
//! carried as natural logs so that products over hundreds of observations
//! never underflow.

use std::f64::consts::PI;
use std::ops::Add;

use crate::error::{Error, Result};

/// A natural-log probability (or log-likelihood). Never NaN; `-inf` encodes
/// an impossible event.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::domain("log-probability is NaN"));
        }
        Ok(LogProb(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

impl Add for LogProb {
    type Output = LogProb;

    /// Product of the underlying probabilities.
    fn add(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

impl std::iter::Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> LogProb {
        iter.fold(LogProb::ONE, |acc, x| acc + x)
    }
}

// Below this the argument is shifted up with the recurrence before the
// asymptotic series is applied.
const STIRLING_CUTOFF: f64 = 10.0;

// B_{2k} / (2k (2k - 1)) for k = 1..=8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    // Horner over 1/z^2, highest order first.
    let series = STIRLING_COEFFS
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * inv2 + c)
        * inv;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series
}

/// `ln Γ(x)` for finite `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    if x >= STIRLING_CUTOFF {
        return Ok(stirling(x));
    }
    let mut z = x;
    let mut prod = 1.0;
    while z < STIRLING_CUTOFF {
        prod *= z;
        z += 1.0;
    }
    Ok(stirling(z) - prod.ln())
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!("ln_beta requires a, b > 0, got ({a}, {b})")));
    }
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::domain(format!("ln_choose requires k <= n, got n={n}, k={k}")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let n = n as f64;
    let k = k as f64;
    Ok(ln_gamma(n + 1.0)? - ln_gamma(k + 1.0)? - ln_gamma(n - k + 1.0)?)
}

/// Log pmf of the Beta-Binomial compound: `x` successes in `n` trials with
/// the success rate drawn from `Beta(a, b)` and integrated out.
pub fn beta_binomial_log_pmf(x: u64, n: u64, a: f64, b: f64) -> Result<LogProb> {
    if x > n {
        return Err(Error::domain(format!(
            "beta-binomial requires x <= n, got x={x}, n={n}"
        )));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "beta-binomial requires a, b > 0, got ({a}, {b})"
        )));
    }
    if n == 0 {
        return Ok(LogProb::ONE);
    }
    let (xf, nf) = (x as f64, n as f64);
    let value = ln_choose(n, x)? + ln_beta(a + xf, b + nf - xf)? - ln_beta(a, b)?;
    LogProb::new(value)
}

/// Log-odds of `p`; `p` must lie strictly inside `(0, 1)`.
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("logit requires 0 < p < 1, got {p}")));
    }
    Ok((p / (1.0 - p)).ln())
}

/// `ln Σ exp(v)`; `-inf` for an empty slice or all `-inf` inputs.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Reference values from a 40-digit arbitrary-precision evaluation.
    const LN_GAMMA_REFERENCE: [(f64, f64); 8] = [
        (0.1, 2.252_712_651_734_206),
        (0.5, 0.572_364_942_924_700_1),
        (1.5, -0.120_782_237_635_245_2),
        (3.7, 1.428_072_326_665_388),
        (10.0, 12.801_827_480_081_47),
        (25.25, 55.585_686_044_869_43),
        (100.0, 359.134_205_369_575_4),
        (1000.5, 5_908.674_175_848_677),
    ];

    #[test]
    fn ln_gamma_spot_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-14);
        assert_abs_diff_eq!(ln_gamma(0.5).unwrap(), 0.572_364_942_9, epsilon = 1e-10);
        for (x, want) in LN_GAMMA_REFERENCE {
            assert_abs_diff_eq!(ln_gamma(x).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn ln_gamma_large_argument_relative() {
        // f64 spacing at 1.3e7 is ~2e-9, so only relative accuracy is meaningful.
        let want = 12_815_504.569_147_612;
        let got = ln_gamma(1e6).unwrap();
        assert!(((got - want) / want).abs() < 1e-15, "{got}");
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut ln_fact = 0.0_f64;
        for n in 1..60u32 {
            assert_abs_diff_eq!(ln_gamma(n as f64).unwrap(), ln_fact, epsilon = 1e-10 * ln_fact.max(1.0));
            ln_fact += (n as f64).ln();
        }
    }

    #[test]
    fn ln_gamma_rejects_bad_input() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(ln_gamma(x).is_err(), "{x}");
        }
    }

    #[test]
    fn ln_beta_examples() {
        assert_abs_diff_eq!(ln_beta(1.0, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ln_beta(2.0, 2.0).unwrap(), -1.791_759_469_2, epsilon = 1e-10);
        assert_abs_diff_eq!(ln_beta(0.5, 0.5).unwrap(), 1.144_729_885_8, epsilon = 1e-10);
        assert!(ln_beta(0.0, 1.0).is_err());
        assert!(ln_beta(1.0, -2.0).is_err());
    }

    #[test]
    fn ln_choose_examples() {
        assert_abs_diff_eq!(ln_choose(4, 2).unwrap(), 6f64.ln(), epsilon = 1e-12);
        assert_eq!(ln_choose(100, 0).unwrap(), 0.0);
        assert_eq!(ln_choose(100, 100).unwrap(), 0.0);
        assert!(ln_choose(3, 4).is_err());
    }

    #[test]
    fn beta_binomial_examples() {
        let v = |x, n, a, b| beta_binomial_log_pmf(x, n, a, b).unwrap().value();
        assert_abs_diff_eq!(v(1, 2, 1.0, 1.0), (1.0f64 / 3.0).ln(), epsilon = 1e-10);
        assert_eq!(v(0, 0, 3.2, 1.7), 0.0);
        assert_abs_diff_eq!(v(2, 3, 2.0, 1.0), 0.3f64.ln(), epsilon = 1e-10);
        assert!(beta_binomial_log_pmf(3, 2, 1.0, 1.0).is_err());
        assert!(beta_binomial_log_pmf(1, 2, 0.0, 1.0).is_err());
    }

    #[test]
    fn logit_examples() {
        assert_eq!(logit(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(logit(0.6).unwrap(), 0.405_465_1, epsilon = 1e-7);
        assert_abs_diff_eq!(logit(0.25).unwrap(), -1.098_612_3, epsilon = 1e-7);
        assert!(logit(0.0).is_err());
        assert!(logit(1.0).is_err());
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_abs_diff_eq!(log_sum_exp(&[-1000.0, -1000.0]), -1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(log_sum_exp(&[0.0, f64::NEG_INFINITY]), 0.0, epsilon = 1e-15);
    }

    /// Rising-factorial form of the compound pmf, computed without ln_gamma.
    fn beta_binomial_product_form(x: u64, n: u64, a: f64, b: f64) -> f64 {
        let mut ln = 0.0;
        for i in 0..x {
            ln += (a + i as f64).ln();
        }
        for j in 0..(n - x) {
            ln += (b + j as f64).ln();
        }
        for k in 0..n {
            ln -= (a + b + k as f64).ln();
        }
        // C(n, x) by direct multiplication.
        let mut choose = 0.0;
        for i in 0..x {
            choose += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        ln + choose
    }

    proptest! {
        #[test]
        fn ln_beta_is_symmetric(a in 0.01f64..100.0, b in 0.01f64..100.0) {
            prop_assert_eq!(ln_beta(a, b).unwrap(), ln_beta(b, a).unwrap());
        }

        #[test]
        fn beta_binomial_normalizes(n in 0u64..=50, a in 0.1f64..50.0, b in 0.1f64..50.0) {
            let total: f64 = (0..=n)
                .map(|x| beta_binomial_log_pmf(x, n, a, b).unwrap().prob())
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-9, "sum = {}", total);
        }

        #[test]
        fn beta_binomial_mirror(n in 0u64..=60, frac in 0.0f64..=1.0, a in 0.1f64..50.0, b in 0.1f64..50.0) {
            let x = (frac * n as f64).floor() as u64;
            let lhs = beta_binomial_log_pmf(x, n, a, b).unwrap().value();
            let rhs = beta_binomial_log_pmf(n - x, n, b, a).unwrap().value();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn beta_binomial_matches_product_form(n in 1u64..=80, frac in 0.0f64..=1.0, a in 0.05f64..30.0, b in 0.05f64..30.0) {
            let x = (frac * n as f64).floor() as u64;
            let got = beta_binomial_log_pmf(x, n, a, b).unwrap().value();
            let want = beta_binomial_product_form(x, n, a, b);
            prop_assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{} vs {}", got, want);
        }

        #[test]
        fn logit_is_odd_and_increasing(p in 0.001f64..0.999, dp in 1e-6f64..1e-3) {
            let l = logit(p).unwrap();
            prop_assert!((l + logit(1.0 - p).unwrap()).abs() < 1e-9);
            if p + dp < 1.0 {
                prop_assert!(logit(p + dp).unwrap() > l);
            }
        }
    }
}
