//! Priming experiments: the 2×2 materials, the lexical-boost / inverse
//! frequency simulation and the batch-interference decay simulation.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::{all_verb_predictives, theta_posterior};
use crate::model::{Construction, CountTable, HbmConfig, Observation, VerbId};
use crate::numerics::logit;

/// Prior corpus: nine ditransitive verbs, `(verb, DO, PO)`.
pub const BUILTIN_PRIOR_ROWS: [(&str, u64, u64); 9] = [
    ("give", 51, 20),
    ("show", 1, 3),
    ("send", 5, 8),
    ("lend", 1, 0),
    ("hand", 0, 3),
    ("loan", 0, 0),
    ("offer", 2, 4),
    ("sell", 0, 2),
    ("post", 0, 0),
];

pub const DEFAULT_ITEMS: usize = 32;
pub const DEFAULT_MAX_BATCHES: usize = 2;
pub const DEFAULT_BATCH_SIZE: u64 = 100;

/// The built-in nine-verb prior table.
pub fn builtin_prior_table() -> CountTable {
    CountTable::from_rows(BUILTIN_PRIOR_ROWS.iter().map(|&(v, d, p)| (v, d, d + p)))
        .expect("built-in table is well formed")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Overlap {
    Same,
    Different,
}

impl Overlap {
    pub fn as_str(self) -> &'static str {
        match self {
            Overlap::Same => "Same",
            Overlap::Different => "Different",
        }
    }
}

impl fmt::Display for Overlap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One cell of the prime-structure × verb-overlap design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Condition {
    pub prime_structure: Construction,
    pub overlap: Overlap,
}

impl Condition {
    /// The four conditions in report order.
    pub const ALL: [Condition; 4] = [
        Condition { prime_structure: Construction::Do, overlap: Overlap::Same },
        Condition { prime_structure: Construction::Do, overlap: Overlap::Different },
        Condition { prime_structure: Construction::Po, overlap: Overlap::Same },
        Condition { prime_structure: Construction::Po, overlap: Overlap::Different },
    ];

    /// Sign that makes movement toward the primed structure positive.
    pub fn sign(self) -> f64 {
        match self.prime_structure {
            Construction::Do => 1.0,
            Construction::Po => -1.0,
        }
    }

    pub fn index(self) -> usize {
        Condition::ALL.iter().position(|c| *c == self).expect("condition is in ALL")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.prime_structure, self.overlap)
    }
}

/// A prime/target pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentItem {
    pub item_id: usize,
    pub target_verb: VerbId,
    pub same_prime_verb: VerbId,
    pub diff_prime_verb: VerbId,
}

impl ExperimentItem {
    pub fn prime_verb(&self, overlap: Overlap) -> &VerbId {
        match overlap {
            Overlap::Same => &self.same_prime_verb,
            Overlap::Different => &self.diff_prime_verb,
        }
    }
}

/// Items cycle through the lexicon; the different-verb prime is the next verb
/// in lexicon order.
pub fn build_materials(lexicon: &[VerbId], n_items: usize) -> Result<Vec<ExperimentItem>> {
    if lexicon.len() < 2 {
        return Err(Error::Config(format!(
            "materials need at least two verbs, got {}",
            lexicon.len()
        )));
    }
    let m = lexicon.len();
    Ok((0..n_items)
        .map(|i| ExperimentItem {
            item_id: i,
            target_verb: lexicon[i % m].clone(),
            same_prime_verb: lexicon[i % m].clone(),
            diff_prime_verb: lexicon[(i + 1) % m].clone(),
        })
        .collect())
}

/// Structure-congruent log-odds shift from `p_prior` to `p_post`.
pub fn effect_size(p_prior: f64, p_post: f64, prime: Construction) -> Result<f64> {
    let s = match prime {
        Construction::Do => 1.0,
        Construction::Po => -1.0,
    };
    Ok(s * (logit(p_post)? - logit(p_prior)?))
}

/// Per-condition averages over items for Simulation 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectRecord {
    pub condition: Condition,
    pub mean_prior_do: f64,
    pub mean_post_do: f64,
    /// Mean per-item effect in log-odds.
    pub effect: f64,
}

/// Per-condition, per-batch-count averages for Simulation 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRecord {
    pub condition: Condition,
    pub n_batches: usize,
    pub effect: f64,
    pub replications: usize,
    pub std_error: f64,
}

/// Condition every item on its prime against `base` (independently per item)
/// and average over items. Records follow [`Condition::ALL`].
fn condition_effects(
    base: &CountTable,
    items: &[ExperimentItem],
    cfg: &HbmConfig,
) -> Result<[EffectRecord; 4]> {
    if items.is_empty() {
        return Err(Error::Config("no experiment items".into()));
    }
    let control = all_verb_predictives(&theta_posterior(base, cfg)?, base, cfg);

    // Exposure predictives depend only on the prime observation, so cache them
    // per (prime verb, structure).
    let n_verbs = base.len();
    let mut exposure: Vec<Option<Vec<f64>>> = vec![None; 2 * n_verbs];
    let mut records = Condition::ALL.map(|condition| EffectRecord {
        condition,
        mean_prior_do: 0.0,
        mean_post_do: 0.0,
        effect: 0.0,
    });

    for rec in records.iter_mut() {
        let cond = rec.condition;
        let (mut sum_prior, mut sum_post, mut sum_effect) = (0.0, 0.0, 0.0);
        for item in items {
            let target = base.index_of(&item.target_verb)?;
            let prime_verb = item.prime_verb(cond.overlap);
            let slot = 2 * base.index_of(prime_verb)?
                + usize::from(cond.prime_structure == Construction::Po);
            if exposure[slot].is_none() {
                let primed = base
                    .with_observation(&Observation::new(prime_verb.clone(), cond.prime_structure))?;
                let post = theta_posterior(&primed, cfg)?;
                exposure[slot] = Some(all_verb_predictives(&post, &primed, cfg));
            }
            let p_prior = control[target];
            let p_post = exposure[slot].as_ref().expect("filled above")[target];
            sum_prior += p_prior;
            sum_post += p_post;
            sum_effect += effect_size(p_prior, p_post, cond.prime_structure)?;
        }
        let n = items.len() as f64;
        rec.mean_prior_do = sum_prior / n;
        rec.mean_post_do = sum_post / n;
        rec.effect = sum_effect / n;
    }
    Ok(records)
}

/// Simulation 1: each item is primed once against the common prior.
pub fn run_sim1(
    prior: &CountTable,
    items: &[ExperimentItem],
    cfg: &HbmConfig,
) -> Result<Vec<EffectRecord>> {
    cfg.validate()?;
    Ok(condition_effects(prior, items, cfg)?.to_vec())
}

/// Draw a batch of post-priming observations from the prior's frequencies:
/// verb totals are multinomial in the verb frequencies, and DO counts are
/// binomial in each verb's DO rate.
pub fn sample_batch<R: Rng + ?Sized>(
    prior: &CountTable,
    batch_size: u64,
    rng: &mut R,
) -> Result<CountTable> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let totals = prior.totals();
    if totals.total == 0 {
        return Err(Error::DegeneratePrior);
    }
    let global_do = totals.do_count as f64 / totals.total as f64;

    // Multinomial via sequential conditional binomials.
    let mut remaining_n = batch_size;
    let mut remaining_mass = totals.total;
    let mut rows = Vec::with_capacity(prior.len());
    for (verb, c) in prior.iter() {
        let verb_total = if c.total == 0 || remaining_n == 0 {
            0
        } else if c.total == remaining_mass {
            remaining_n
        } else {
            let p = c.total as f64 / remaining_mass as f64;
            draw_binomial(remaining_n, p, rng)?
        };
        remaining_n -= verb_total;
        remaining_mass -= c.total;

        let rate = if c.total > 0 {
            c.do_count as f64 / c.total as f64
        } else {
            global_do
        };
        let do_count = draw_binomial(verb_total, rate, rng)?;
        rows.push((verb.as_str(), do_count, verb_total));
    }
    CountTable::from_rows(rows)
}

fn draw_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64> {
    if n == 0 || p <= 0.0 {
        return Ok(0);
    }
    if p >= 1.0 {
        return Ok(n);
    }
    let dist = Binomial::new(n, p).map_err(|e| Error::domain(format!("binomial({n}, {p}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Independent RNG stream for one replication.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// One replication of Simulation 2: per-condition effects for `b = 0..=max`.
fn sim2_replication(
    prior: &CountTable,
    items: &[ExperimentItem],
    cfg: &HbmConfig,
    max_batches: usize,
    batch_size: u64,
    replication: usize,
) -> Result<Vec<[f64; 4]>> {
    let mut rng = replication_rng(cfg.seed, replication);
    let mut base = prior.clone();
    let mut out = Vec::with_capacity(max_batches + 1);
    for b in 0..=max_batches {
        if b > 0 && batch_size > 0 {
            let batch = sample_batch(prior, batch_size, &mut rng)?;
            base = base.merge(&batch)?;
        }
        // Exposure and control share `base`, hence the same batch draws.
        let recs = condition_effects(&base, items, cfg)?;
        out.push(recs.map(|r| r.effect));
    }
    Ok(out)
}

/// Simulation 2: exposure (prior + prime + batches) against control
/// (prior + batches) as batches of post-priming data accumulate.
///
/// `batch_size = 0` makes every batch empty. Records are ordered by
/// condition, then by batch count.
pub fn run_sim2(
    prior: &CountTable,
    items: &[ExperimentItem],
    cfg: &HbmConfig,
    max_batches: usize,
    batch_size: u64,
) -> Result<Vec<DecayRecord>> {
    cfg.validate()?;
    let per_rep = replicate(cfg.replications, |r| {
        sim2_replication(prior, items, cfg, max_batches, batch_size, r)
    })?;

    let mut records = Vec::with_capacity(4 * (max_batches + 1));
    for cond in Condition::ALL {
        let ci = cond.index();
        for b in 0..=max_batches {
            let stats = RunningStats::from_iter(per_rep.iter().map(|rep| rep[b][ci]));
            records.push(DecayRecord {
                condition: cond,
                n_batches: b,
                effect: stats.mean,
                replications: stats.count,
                std_error: stats.std_error(),
            });
        }
    }
    Ok(records)
}

// Results come back in replication order whatever the thread count.
#[cfg(feature = "parallel")]
fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn replicate<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}

/// Welford accumulator. Identical inputs leave the mean bit-exact and the
/// variance exactly zero.
#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::default();
        for x in iter {
            s.push(x);
        }
        s
    }
}
