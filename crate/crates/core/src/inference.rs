//! Posterior inference for the two-level model.
//!
//! The global bias Θ has a uniform prior and each verb bias is
//! `Beta(αΘ, α(1-Θ))`. Verb biases are integrated out analytically, which
//! leaves a one-dimensional posterior over Θ. That posterior is evaluated on
//! a midpoint grid; verb-level predictives then follow from conditional
//! conjugacy. [`oracle_predictive`] is an importance-sampling estimate of the
//! same quantity that shares none of the grid code.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CountTable, HbmConfig, VerbId};
use crate::numerics::{beta_binomial_log_pmf, log_sum_exp, LogProb};

/// Discretized posterior over the global bias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPosterior {
    grid: Vec<f64>,
    weights: Vec<f64>,
}

impl ThetaPosterior {
    /// Build from explicit grid points and weights. The grid must be strictly
    /// increasing inside `(0, 1)` and the weights must sum to one.
    pub fn from_parts(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if grid.is_empty() || grid.len() != weights.len() {
            return Err(Error::domain("grid and weights must be non-empty and of equal length"));
        }
        if grid.iter().any(|&t| !(t > 0.0 && t < 1.0)) || grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("grid must be strictly increasing inside (0, 1)"));
        }
        if weights.iter().any(|&w| w.is_nan() || w < 0.0) {
            return Err(Error::domain("weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(ThetaPosterior { grid, weights })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Posterior mean of Θ.
    pub fn mean(&self) -> f64 {
        theta_mean(self)
    }

    /// Posterior density (weight / cell width) at each grid point, for plotting.
    pub fn density(&self) -> Vec<f64> {
        let k = self.grid.len() as f64;
        self.weights.iter().map(|w| w * k).collect()
    }
}

/// Midpoints `(k + 0.5) / K` for `k = 0..K`.
pub fn midpoint_grid(k: usize) -> Vec<f64> {
    let kf = k as f64;
    (0..k).map(|i| (i as f64 + 0.5) / kf).collect()
}

/// Log-likelihood of all verb counts given the global bias, with each verb
/// bias integrated out.
pub fn theta_log_likelihood(theta: f64, data: &CountTable, alpha: f64) -> Result<LogProb> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let (a, b) = (alpha * theta, alpha * (1.0 - theta));
    data.counts()
        .iter()
        .filter(|c| c.total > 0)
        .map(|c| beta_binomial_log_pmf(c.do_count, c.total, a, b))
        .sum()
}

/// Grid posterior over the global bias under a uniform prior.
pub fn theta_posterior(data: &CountTable, cfg: &HbmConfig) -> Result<ThetaPosterior> {
    cfg.validate()?;
    let grid = midpoint_grid(cfg.grid_size);
    let log_lik = grid
        .iter()
        .map(|&t| theta_log_likelihood(t, data, cfg.alpha).map(LogProb::value))
        .collect::<Result<Vec<f64>>>()?;
    let norm = log_sum_exp(&log_lik);
    if !norm.is_finite() {
        return Err(Error::domain("posterior over theta has no finite mass"));
    }
    let weights = log_lik.iter().map(|l| (l - norm).exp()).collect();
    Ok(ThetaPosterior { grid, weights })
}

/// `Σ w_k θ_k`.
pub fn theta_mean(post: &ThetaPosterior) -> f64 {
    post.grid.iter().zip(&post.weights).map(|(t, w)| t * w).sum()
}

/// Posterior-predictive probability of DO for `verb`:
/// `E[(αΘ + x_v) / (α + n_v) | data]`. For a verb without data this is the
/// posterior mean of Θ, i.e. pure top-down generalization.
pub fn verb_predictive(
    post: &ThetaPosterior,
    data: &CountTable,
    verb: &VerbId,
    cfg: &HbmConfig,
) -> Result<f64> {
    let c = data.get(verb)?;
    Ok(predictive_from_counts(post, c.do_count, c.total, cfg.alpha))
}

/// [`verb_predictive`] for every verb of the lexicon, in lexicon order.
pub fn all_verb_predictives(
    post: &ThetaPosterior,
    data: &CountTable,
    cfg: &HbmConfig,
) -> Vec<f64> {
    data.counts()
        .iter()
        .map(|c| predictive_from_counts(post, c.do_count, c.total, cfg.alpha))
        .collect()
}

fn predictive_from_counts(post: &ThetaPosterior, x: u64, n: u64, alpha: f64) -> f64 {
    let (x, denom) = (x as f64, alpha + n as f64);
    post.grid
        .iter()
        .zip(&post.weights)
        .map(|(t, w)| w * (alpha * t + x) / denom)
        .sum()
}

/// Minimum number of importance samples accepted by the oracle.
pub const ORACLE_MIN_SAMPLES: usize = 10_000;

/// Effective sample size below which an oracle estimate is flagged.
pub const ORACLE_MIN_ESS: f64 = 100.0;

/// Self-normalized importance-sampling estimate with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub effective_sample_size: f64,
    /// Set when the effective sample size fell below [`ORACLE_MIN_ESS`].
    pub degenerate: bool,
}

/// Monte Carlo estimate of the DO predictive for `verb`: draw Θ from its
/// uniform prior, weight by the integrated likelihood and average the
/// conditional verb mean.
pub fn oracle_predictive<R: Rng + ?Sized>(
    data: &CountTable,
    verb: &VerbId,
    cfg: &HbmConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<OracleEstimate> {
    let idx = data.index_of(verb)?;
    Ok(oracle_predictive_all(data, cfg, n_samples, rng)?.swap_remove(idx))
}

/// Oracle estimates for every verb of the lexicon from one shared set of
/// draws.
pub fn oracle_predictive_all<R: Rng + ?Sized>(
    data: &CountTable,
    cfg: &HbmConfig,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<OracleEstimate>> {
    if n_samples < ORACLE_MIN_SAMPLES {
        return Err(Error::Config(format!(
            "oracle needs at least {ORACLE_MIN_SAMPLES} samples, got {n_samples}"
        )));
    }
    let alpha = cfg.alpha;
    let mut thetas = Vec::with_capacity(n_samples);
    let mut log_w = Vec::with_capacity(n_samples);
    while thetas.len() < n_samples {
        let t: f64 = rng.random();
        if t == 0.0 {
            continue;
        }
        log_w.push(theta_log_likelihood(t, data, alpha)?.value());
        thetas.push(t);
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::domain("all importance weights vanished"));
    }
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    let ess = sum_w * sum_w / sum_w2;

    let estimates = data
        .counts()
        .iter()
        .map(|c| {
            let (x, denom) = (c.do_count as f64, alpha + c.total as f64);
            let f = |t: f64| (alpha * t + x) / denom;
            let est = thetas.iter().zip(&w).map(|(&t, wi)| wi * f(t)).sum::<f64>() / sum_w;
            // Delta-method variance of a ratio estimator.
            let var = thetas
                .iter()
                .zip(&w)
                .map(|(&t, wi)| {
                    let d = wi * (f(t) - est);
                    d * d
                })
                .sum::<f64>()
                / (sum_w * sum_w);
            OracleEstimate {
                estimate: est,
                std_error: var.sqrt(),
                effective_sample_size: ess,
                degenerate: ess < ORACLE_MIN_ESS,
            }
        })
        .collect();
    Ok(estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin_prior_table;
    use crate::model::{Construction, Observation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(alpha: f64, k: usize) -> HbmConfig {
        HbmConfig { alpha, grid_size: k, seed: 7, replications: 1 }
    }

    fn verb(s: &str) -> VerbId {
        VerbId::new(s).unwrap()
    }

    #[test]
    fn log_likelihood_examples() {
        let empty = CountTable::from_rows([("v", 0, 0)]).unwrap();
        assert_eq!(theta_log_likelihood(0.5, &empty, 5.0).unwrap().value(), 0.0);
        let one = CountTable::from_rows([("v", 1, 2)]).unwrap();
        let got = theta_log_likelihood(0.5, &one, 2.0).unwrap().value();
        assert!((got - (1.0f64 / 3.0).ln()).abs() < 1e-10);
        assert!(theta_log_likelihood(0.0, &one, 2.0).is_err());
        assert!(theta_log_likelihood(1.0, &one, 2.0).is_err());
    }

    #[test]
    fn log_likelihood_table_one() {
        // Summed independently with log-gamma from a scientific library.
        let got = theta_log_likelihood(0.3, &builtin_prior_table(), 5.0).unwrap().value();
        assert!((got - -13.182_511_954_123_571).abs() < 1e-9, "{got}");
    }

    #[test]
    fn empty_data_gives_uniform_posterior() {
        let data = CountTable::from_rows([("a", 0, 0), ("b", 0, 0)]).unwrap();
        let post = theta_posterior(&data, &cfg(5.0, 401)).unwrap();
        assert!(post.weights().iter().all(|w| (w - 1.0 / 401.0).abs() < 1e-15));
        assert!((post.mean() - 0.5).abs() < 1e-12);
        let p = verb_predictive(&post, &data, &verb("a"), &cfg(5.0, 401)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_is_interior_midpoints() {
        let g = midpoint_grid(4);
        assert_eq!(g, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn point_mass_mean_and_predictive() {
        let post = ThetaPosterior::from_parts(vec![0.25, 0.75], vec![0.0, 1.0]).unwrap();
        assert_eq!(theta_mean(&post), 0.75);

        let post = ThetaPosterior::from_parts(vec![0.2, 0.4, 0.6], vec![0.0, 1.0, 0.0]).unwrap();
        let data = CountTable::from_rows([("give", 51, 71)]).unwrap();
        let p = verb_predictive(&post, &data, &verb("give"), &cfg(5.0, 3)).unwrap();
        assert!((p - 53.0 / 76.0).abs() < 1e-12);
    }

    #[test]
    fn from_parts_validation() {
        assert!(ThetaPosterior::from_parts(vec![0.0, 0.5], vec![0.5, 0.5]).is_err());
        assert!(ThetaPosterior::from_parts(vec![0.6, 0.5], vec![0.5, 0.5]).is_err());
        assert!(ThetaPosterior::from_parts(vec![0.4, 0.5], vec![0.5, 0.6]).is_err());
        assert!(ThetaPosterior::from_parts(vec![], vec![]).is_err());
    }

    #[test]
    fn unknown_verb_is_rejected() {
        let data = builtin_prior_table();
        let post = theta_posterior(&data, &cfg(5.0, 51)).unwrap();
        assert!(matches!(
            verb_predictive(&post, &data, &verb("donate"), &cfg(5.0, 51)),
            Err(Error::UnknownVerb(_))
        ));
    }

    #[test]
    fn table_one_posterior_matches_fine_grid_reference() {
        // K = 100001 midpoint grid with an independent Beta-Binomial.
        let post = theta_posterior(&builtin_prior_table(), &cfg(5.0, 401)).unwrap();
        assert!((post.mean() - 0.412_165_710_722_832_4).abs() < 1e-4);
        assert!(post.mean() < 0.5 && post.mean() > 0.3);
    }

    #[test]
    fn show_prime_reference_values() {
        // Fine-grid reference: show under Table 1 alone and after one <show:DO>.
        let c = cfg(5.0, 401);
        let prior = builtin_prior_table();
        let primed = prior
            .with_observation(&Observation::new(verb("show"), Construction::Do))
            .unwrap();
        let p0 = verb_predictive(&theta_posterior(&prior, &c).unwrap(), &prior, &verb("show"), &c).unwrap();
        let p1 = verb_predictive(&theta_posterior(&primed, &c).unwrap(), &primed, &verb("show"), &c).unwrap();
        assert!((p0 - 0.340_092_061_512_684_8).abs() < 1e-6, "{p0}");
        assert!((p1 - 0.414_656_395_399_045_86).abs() < 1e-6, "{p1}");
        assert!(p1 > p0);
    }

    #[test]
    fn oracle_on_empty_data_is_centered() {
        let data = CountTable::from_rows([("v", 0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = oracle_predictive(&data, &verb("v"), &cfg(5.0, 401), 20_000, &mut rng).unwrap();
        assert!((est.estimate - 0.5).abs() < 3.0 * est.std_error, "{est:?}");
        assert!(!est.degenerate);
    }

    #[test]
    fn two_of_two_with_unit_concentration() {
        // Likelihood θ(θ+1)/2 and conditional mean (θ+2)/3 integrate to 0.9.
        let data = CountTable::from_rows([("v", 2, 2)]).unwrap();
        let c = cfg(1.0, 4001);
        let post = theta_posterior(&data, &c).unwrap();
        let grid_p = verb_predictive(&post, &data, &verb("v"), &c).unwrap();
        assert!((grid_p - 0.9).abs() < 1e-6, "{grid_p}");

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let est = oracle_predictive(&data, &verb("v"), &c, 100_000, &mut rng).unwrap();
        assert!((est.estimate - 0.9).abs() < 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn oracle_rejects_small_sample_counts() {
        let data = builtin_prior_table();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(oracle_predictive(&data, &verb("give"), &cfg(5.0, 401), 100, &mut rng).is_err());
    }

    #[test]
    fn mirror_symmetry_of_predictives() {
        let c = cfg(5.0, 401);
        let data = builtin_prior_table();
        let swapped = data.swap_constructions();
        let p = all_verb_predictives(&theta_posterior(&data, &c).unwrap(), &data, &c);
        let q = all_verb_predictives(&theta_posterior(&swapped, &c).unwrap(), &swapped, &c);
        for (a, b) in p.iter().zip(&q) {
            assert!((a + b - 1.0).abs() < 1e-12, "{a} {b}");
        }
    }
}
