//! Domain vocabulary: constructions, verbs, count tables and configuration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two ditransitive alternatives. `Do` is the modelled "success"
/// outcome; PO probabilities are always `1 - p(DO)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Construction {
    #[serde(rename = "DO")]
    Do,
    #[serde(rename = "PO")]
    Po,
}

impl Construction {
    pub const ALL: [Construction; 2] = [Construction::Do, Construction::Po];

    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Do => "DO",
            Construction::Po => "PO",
        }
    }

    pub fn other(self) -> Construction {
        match self {
            Construction::Do => Construction::Po,
            Construction::Po => Construction::Do,
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A lowercase verb token such as `give`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VerbId(String);

impl VerbId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        let valid = !name.is_empty()
            && name
                .chars()
                .all(|c| !c.is_whitespace() && c != ',' && !c.is_uppercase());
        if valid {
            Ok(VerbId(name))
        } else {
            Err(Error::InvalidVerb(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for VerbId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        VerbId::new(value)
    }
}

impl From<VerbId> for String {
    fn from(v: VerbId) -> String {
        v.0
    }
}

impl fmt::Display for VerbId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Build a lexicon from string tokens, rejecting duplicates.
pub fn lexicon<S: AsRef<str>>(names: &[S]) -> Result<Vec<VerbId>> {
    let verbs = names
        .iter()
        .map(|n| VerbId::new(n.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    check_unique(&verbs)?;
    Ok(verbs)
}

fn check_unique(verbs: &[VerbId]) -> Result<()> {
    for (i, v) in verbs.iter().enumerate() {
        if verbs[..i].contains(v) {
            return Err(Error::DuplicateVerb(v.to_string()));
        }
    }
    Ok(())
}

/// One verb use, e.g. `<give:DO>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Observation {
    pub verb: VerbId,
    pub construction: Construction,
}

impl Observation {
    pub fn new(verb: VerbId, construction: Construction) -> Self {
        Observation { verb, construction }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}:{}>", self.verb, self.construction)
    }
}

/// Sufficient statistics for one verb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VerbCounts {
    pub do_count: u64,
    pub total: u64,
}

impl VerbCounts {
    pub fn new(do_count: u64, total: u64) -> Option<Self> {
        (do_count <= total).then_some(VerbCounts { do_count, total })
    }

    pub fn po_count(self) -> u64 {
        self.total - self.do_count
    }

    fn swapped(self) -> Self {
        VerbCounts { do_count: self.po_count(), total: self.total }
    }
}

/// Per-verb DO and total counts over a fixed, ordered lexicon. Verbs with no
/// data are explicit `(0, 0)` rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    lexicon: Vec<VerbId>,
    counts: Vec<VerbCounts>,
}

impl CountTable {
    /// All-zero table over `lexicon`.
    pub fn empty(lexicon: Vec<VerbId>) -> Result<Self> {
        check_unique(&lexicon)?;
        let counts = vec![VerbCounts::default(); lexicon.len()];
        Ok(CountTable { lexicon, counts })
    }

    /// Table from `(verb, do_count, total)` rows, in lexicon order.
    pub fn from_rows<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64, u64)>,
        S: AsRef<str>,
    {
        let mut lexicon = Vec::new();
        let mut counts = Vec::new();
        for (name, do_count, total) in rows {
            let verb = VerbId::new(name.as_ref())?;
            let c = VerbCounts::new(do_count, total).ok_or_else(|| Error::InvalidCount {
                verb: verb.to_string(),
                do_count,
                total,
            })?;
            lexicon.push(verb);
            counts.push(c);
        }
        check_unique(&lexicon)?;
        Ok(CountTable { lexicon, counts })
    }

    pub fn lexicon(&self) -> &[VerbId] {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn index_of(&self, verb: &VerbId) -> Result<usize> {
        self.lexicon
            .iter()
            .position(|v| v == verb)
            .ok_or_else(|| Error::UnknownVerb(verb.to_string()))
    }

    pub fn get(&self, verb: &VerbId) -> Result<VerbCounts> {
        Ok(self.counts[self.index_of(verb)?])
    }

    pub fn counts(&self) -> &[VerbCounts] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VerbId, VerbCounts)> + '_ {
        self.lexicon.iter().zip(self.counts.iter().copied())
    }

    /// Summed `(do_count, total)` over all verbs.
    pub fn totals(&self) -> VerbCounts {
        self.counts.iter().fold(VerbCounts::default(), |acc, c| VerbCounts {
            do_count: acc.do_count + c.do_count,
            total: acc.total + c.total,
        })
    }

    /// Record one more observation in place.
    pub fn observe(&mut self, obs: &Observation) -> Result<()> {
        let i = self.index_of(&obs.verb)?;
        let c = &mut self.counts[i];
        c.total += 1;
        if obs.construction == Construction::Do {
            c.do_count += 1;
        }
        Ok(())
    }

    /// Copy of this table with one extra observation.
    pub fn with_observation(&self, obs: &Observation) -> Result<Self> {
        let mut out = self.clone();
        out.observe(obs)?;
        Ok(out)
    }

    /// Relabel DO as PO and vice versa in every row.
    pub fn swap_constructions(&self) -> Self {
        CountTable {
            lexicon: self.lexicon.clone(),
            counts: self.counts.iter().map(|c| c.swapped()).collect(),
        }
    }

    /// Coordinatewise sum of two tables over the same lexicon.
    pub fn merge(&self, other: &CountTable) -> Result<CountTable> {
        if self.lexicon != other.lexicon {
            return Err(Error::LexiconMismatch);
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| VerbCounts {
                do_count: a.do_count + b.do_count,
                total: a.total + b.total,
            })
            .collect();
        Ok(CountTable { lexicon: self.lexicon.clone(), counts })
    }
}

/// Tally observations over an explicit lexicon.
pub fn dataset_from_observations(
    observations: &[Observation],
    lexicon: &[VerbId],
) -> Result<CountTable> {
    let mut table = CountTable::empty(lexicon.to_vec())?;
    for obs in observations {
        table.observe(obs)?;
    }
    Ok(table)
}

/// `merge(left, right)` as a free function.
pub fn merge(left: &CountTable, right: &CountTable) -> Result<CountTable> {
    left.merge(right)
}

/// Parameters of a Beta distribution for the single-level model.
///
/// Observed counts are kept apart from the base pseudocounts so that
/// sequential and batched updates agree exactly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BetaParams {
    base_a: f64,
    base_b: f64,
    successes: u64,
    failures: u64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(BetaParams { base_a: a, base_b: b, successes: 0, failures: 0 })
        } else {
            Err(Error::domain(format!("Beta parameters must be positive, got ({a}, {b})")))
        }
    }

    pub fn uniform() -> Self {
        BetaParams { base_a: 1.0, base_b: 1.0, successes: 0, failures: 0 }
    }

    pub fn a(&self) -> f64 {
        self.base_a + self.successes as f64
    }

    pub fn b(&self) -> f64 {
        self.base_b + self.failures as f64
    }

    pub fn mean(&self) -> f64 {
        self.a() / (self.a() + self.b())
    }
}

impl PartialEq for BetaParams {
    fn eq(&self, other: &Self) -> bool {
        self.a() == other.a() && self.b() == other.b()
    }
}

/// Posterior of the non-hierarchical model after `x` DO outcomes in `n`
/// observations: `Beta(a + x, b + n - x)`.
pub fn conjugate_update(prior: BetaParams, x: u64, n: u64) -> Result<BetaParams> {
    if x > n {
        return Err(Error::domain(format!("conjugate_update requires x <= n, got x={x}, n={n}")));
    }
    Ok(BetaParams {
        successes: prior.successes + x,
        failures: prior.failures + (n - x),
        ..prior
    })
}

/// Knobs of the hierarchical model and the simulation harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HbmConfig {
    /// Concentration of verb biases around the global bias.
    pub alpha: f64,
    /// Number of midpoint grid cells over the global bias.
    pub grid_size: usize,
    pub seed: u64,
    pub replications: usize,
}

impl HbmConfig {
    pub const DEFAULT_ALPHA: f64 = 5.0;
    pub const DEFAULT_GRID: usize = 401;
    pub const DEFAULT_SEED: u64 = 42;
    pub const DEFAULT_REPLICATIONS: usize = 200;

    pub fn new(alpha: f64, grid_size: usize, seed: u64, replications: usize) -> Result<Self> {
        let cfg = HbmConfig { alpha, grid_size, seed, replications };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.grid_size < 3 {
            return Err(Error::Config(format!("grid size must be at least 3, got {}", self.grid_size)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        HbmConfig { alpha, ..self }
    }

    pub fn with_grid(self, grid_size: usize) -> Self {
        HbmConfig { grid_size, ..self }
    }
}

impl Default for HbmConfig {
    fn default() -> Self {
        HbmConfig {
            alpha: Self::DEFAULT_ALPHA,
            grid_size: Self::DEFAULT_GRID,
            seed: Self::DEFAULT_SEED,
            replications: Self::DEFAULT_REPLICATIONS,
        }
    }
}
