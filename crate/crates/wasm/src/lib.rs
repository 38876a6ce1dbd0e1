//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes the corpus as `verb,do,po` text (empty string for the
//! built-in table) and returns a JSON document for the page to draw.

use priming_core::inference::all_verb_predictives;
use priming_core::io::Records;
use priming_core::{
    builtin_prior_table, cmd_sim1, cmd_sim2, parse_corpus, theta_posterior, CountTable, HbmConfig,
    RunConfig,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn corpus(text: &str) -> Result<CountTable, String> {
    if text.trim().is_empty() {
        Ok(builtin_prior_table())
    } else {
        parse_corpus(text).map_err(|e| e.to_string())
    }
}

fn posterior_json(corpus_text: &str, alpha: f64, grid_size: usize) -> Result<String, String> {
    let table = corpus(corpus_text)?;
    let cfg = HbmConfig { alpha, grid_size, ..HbmConfig::default() };
    cfg.validate().map_err(|e| e.to_string())?;
    let post = theta_posterior(&table, &cfg).map_err(|e| e.to_string())?;
    let verbs: Vec<_> = table
        .iter()
        .zip(all_verb_predictives(&post, &table, &cfg))
        .map(|((v, c), p)| json!({ "verb": v.as_str(), "do": c.do_count, "total": c.total, "p_do": p }))
        .collect();
    Ok(json!({
        "grid": post.grid(),
        "density": post.density(),
        "mean": post.mean(),
        "verbs": verbs,
    })
    .to_string())
}

fn sim1_json(corpus_text: &str, alpha: f64, grid_size: usize, n_items: usize) -> Result<String, String> {
    let table = corpus(corpus_text)?;
    let cfg = RunConfig { alpha, grid_size, n_items, ..RunConfig::default() };
    let (report, csv) = cmd_sim1(Some(&table), &cfg).map_err(|e| e.to_string())?;
    let Records::Sim1(records) = report.records else {
        return Err("unexpected record type".into());
    };
    Ok(json!({ "theta_mean": report.prior_theta_mean, "records": records, "csv": csv }).to_string())
}

#[allow(clippy::too_many_arguments)]
fn sim2_json(
    corpus_text: &str,
    alpha: f64,
    grid_size: usize,
    n_items: usize,
    seed: u64,
    replications: usize,
    max_batches: usize,
    batch_size: u64,
) -> Result<String, String> {
    let table = corpus(corpus_text)?;
    let cfg = RunConfig { alpha, grid_size, n_items, seed, replications, max_batches, batch_size };
    let (report, csv, svg) = cmd_sim2(Some(&table), &cfg).map_err(|e| e.to_string())?;
    let Records::Sim2(records) = report.records else {
        return Err("unexpected record type".into());
    };
    Ok(json!({ "records": records, "csv": csv, "svg": svg }).to_string())
}

/// Posterior density over the global bias plus per-verb DO probabilities.
#[wasm_bindgen]
pub fn posterior(corpus_text: &str, alpha: f64, grid_size: usize) -> Result<String, JsValue> {
    posterior_json(corpus_text, alpha, grid_size).map_err(|e| JsValue::from_str(&e))
}

/// Simulation 1 records for the four prime conditions.
#[wasm_bindgen]
pub fn simulate_priming(
    corpus_text: &str,
    alpha: f64,
    grid_size: usize,
    n_items: usize,
) -> Result<String, JsValue> {
    sim1_json(corpus_text, alpha, grid_size, n_items).map_err(|e| JsValue::from_str(&e))
}

/// Simulation 2 decay records and the rendered SVG chart.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_decay(
    corpus_text: &str,
    alpha: f64,
    grid_size: usize,
    n_items: usize,
    seed: u32,
    replications: usize,
    max_batches: usize,
    batch_size: u32,
) -> Result<String, JsValue> {
    sim2_json(
        corpus_text,
        alpha,
        grid_size,
        n_items,
        u64::from(seed),
        replications,
        max_batches,
        u64::from(batch_size),
    )
        .map_err(|e| JsValue::from_str(&e))
}
