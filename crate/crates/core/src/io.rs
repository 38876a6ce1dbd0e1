//! Corpus files, CSV/JSON reports and the command entry points shared by the
//! CLI and the browser demo.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    build_materials, builtin_prior_table, run_sim1, run_sim2, DecayRecord, EffectRecord,
    DEFAULT_BATCH_SIZE, DEFAULT_ITEMS, DEFAULT_MAX_BATCHES,
};
use crate::inference::{all_verb_predictives, theta_posterior};
use crate::model::{CountTable, HbmConfig, VerbId};

pub const CORPUS_HEADER: &str = "verb,do,po";
pub const SIM1_CSV_HEADER: &str = "prime_structure,overlap,mean_prior_do,mean_post_do,effect";
pub const SIM2_CSV_HEADER: &str = "prime_structure,overlap,n_batches,effect,std_error,replications";

/// Parse a `verb,do,po` corpus. The lexicon follows file order; blank lines
/// are ignored. Line numbers in errors are 1-based and count the header.
pub fn parse_corpus(text: &str) -> Result<CountTable> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let header = lines.by_ref().find(|(_, l)| !l.is_empty());
    match header {
        Some((_, h)) if h.split(',').map(str::trim).eq(CORPUS_HEADER.split(',')) => {}
        Some((line, h)) => {
            return Err(Error::Parse {
                line,
                message: format!("expected header `{CORPUS_HEADER}`, found `{h}`"),
            })
        }
        None => return Err(Error::EmptyCorpus),
    }

    let mut rows: Vec<(String, u64, u64)> = Vec::new();
    for (line, text) in lines {
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        let parse_err = |message: String| Error::Parse { line, message };
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "row `{text}` has {} fields, expected 3",
                fields.len()
            )));
        }
        let count = |field: &str, what: &str| -> Result<u64> {
            field.parse::<u64>().map_err(|_| {
                parse_err(format!(
                    "row `{text}`: {what} count `{field}` is not a non-negative integer"
                ))
            })
        };
        let do_count = count(fields[1], "DO")?;
        let po_count = count(fields[2], "PO")?;
        let verb = fields[0];
        VerbId::new(verb).map_err(|e| parse_err(e.to_string()))?;
        if rows.iter().any(|(v, _, _)| v == verb) {
            return Err(parse_err(format!("duplicate verb `{verb}`")));
        }
        let total = do_count
            .checked_add(po_count)
            .ok_or_else(|| parse_err(format!("row `{text}`: count overflow")))?;
        rows.push((verb.to_string(), do_count, total));
    }
    if rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    CountTable::from_rows(rows)
}

/// Inverse of [`parse_corpus`].
pub fn serialize_corpus(table: &CountTable) -> String {
    let mut out = String::from(CORPUS_HEADER);
    out.push('\n');
    for (verb, c) in table.iter() {
        let _ = writeln!(out, "{verb},{},{}", c.do_count, c.po_count());
    }
    out
}

/// Everything needed to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub replications: usize,
    pub n_items: usize,
    pub max_batches: usize,
    pub batch_size: u64,
}

impl RunConfig {
    pub fn hbm(&self) -> HbmConfig {
        HbmConfig {
            alpha: self.alpha,
            grid_size: self.grid_size,
            seed: self.seed,
            replications: self.replications,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let h = HbmConfig::default();
        RunConfig {
            alpha: h.alpha,
            grid_size: h.grid_size,
            seed: h.seed,
            replications: h.replications,
            n_items: DEFAULT_ITEMS,
            max_batches: DEFAULT_MAX_BATCHES,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

/// Predictive DO probability of one verb under the prior alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerbPrior {
    pub verb: String,
    pub do_count: u64,
    pub total: u64,
    pub p_do: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Records {
    Prior(Vec<VerbPrior>),
    Sim1(Vec<EffectRecord>),
    Sim2(Vec<DecayRecord>),
}

/// Structured summary of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    /// The corpus the run was conditioned on, in `verb,do,po` form.
    pub corpus: String,
    pub prior_theta_mean: f64,
    pub records: Records,
}

impl RunReport {
    fn new(command: &'static str, cfg: &RunConfig, corpus: &CountTable, prior_theta_mean: f64, records: Records) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: cfg.clone(),
            corpus: serialize_corpus(corpus),
            prior_theta_mean,
            records,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn resolve_corpus(corpus: Option<&CountTable>) -> Result<CountTable> {
    let table = corpus.cloned().unwrap_or_else(builtin_prior_table);
    if table.totals().total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(table)
}

/// Global bias and per-verb predictives under the prior corpus (the
/// built-in table when `corpus` is `None`).
pub fn cmd_prior(corpus: Option<&CountTable>, cfg: &RunConfig) -> Result<RunReport> {
    let table = resolve_corpus(corpus)?;
    let hbm = cfg.hbm();
    let post = theta_posterior(&table, &hbm)?;
    let preds = all_verb_predictives(&post, &table, &hbm);
    let rows = table
        .iter()
        .zip(preds)
        .map(|((v, c), p)| VerbPrior {
            verb: v.to_string(),
            do_count: c.do_count,
            total: c.total,
            p_do: p,
        })
        .collect();
    Ok(RunReport::new("prior", cfg, &table, post.mean(), Records::Prior(rows)))
}

/// Simulation 1 report plus its CSV.
pub fn cmd_sim1(corpus: Option<&CountTable>, cfg: &RunConfig) -> Result<(RunReport, String)> {
    let table = resolve_corpus(corpus)?;
    let hbm = cfg.hbm();
    let items = build_materials(table.lexicon(), cfg.n_items)?;
    let records = run_sim1(&table, &items, &hbm)?;
    let csv = sim1_csv(&records);
    let theta = theta_posterior(&table, &hbm)?.mean();
    Ok((RunReport::new("sim1", cfg, &table, theta, Records::Sim1(records)), csv))
}

/// Simulation 2 report, CSV and SVG chart.
pub fn cmd_sim2(corpus: Option<&CountTable>, cfg: &RunConfig) -> Result<(RunReport, String, String)> {
    let table = resolve_corpus(corpus)?;
    let hbm = cfg.hbm();
    let items = build_materials(table.lexicon(), cfg.n_items)?;
    let records = run_sim2(&table, &items, &hbm, cfg.max_batches, cfg.batch_size)?;
    let csv = sim2_csv(&records);
    let svg = crate::svg::decay_chart(&records);
    let theta = theta_posterior(&table, &hbm)?.mean();
    Ok((RunReport::new("sim2", cfg, &table, theta, Records::Sim2(records)), csv, svg))
}

pub fn sim1_csv(records: &[EffectRecord]) -> String {
    let mut out = String::from(SIM1_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6}",
            r.condition.prime_structure, r.condition.overlap, r.mean_prior_do, r.mean_post_do, r.effect
        );
    }
    out
}

pub fn sim2_csv(records: &[DecayRecord]) -> String {
    let mut out = String::from(SIM2_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{}",
            r.condition.prime_structure, r.condition.overlap, r.n_batches, r.effect, r.std_error, r.replications
        );
    }
    out
}
