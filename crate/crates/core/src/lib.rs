//! Hierarchical Beta-Binomial model of syntactic priming.
//!
//! Verb-specific DO/PO biases are pooled through a global bias. Priming is a
//! Bayesian update on one extra observation; decay is further updating on
//! post-priming data sampled from the prior corpus.
//!
//! ```
//! use priming_core::{builtin_prior_table, theta_posterior, HbmConfig};
//!
//! let post = theta_posterior(&builtin_prior_table(), &HbmConfig::default()).unwrap();
//! assert!(post.mean() < 0.5);
//! ```

pub mod error;
pub mod experiments;
pub mod inference;
pub mod io;
pub mod model;
pub mod numerics;
pub mod svg;

pub use error::{Error, Result};
pub use experiments::{
    build_materials, builtin_prior_table, effect_size, run_sim1, run_sim2, sample_batch,
    Condition, DecayRecord, EffectRecord, ExperimentItem, Overlap,
};
pub use inference::{
    oracle_predictive, theta_log_likelihood, theta_mean, theta_posterior, verb_predictive,
    OracleEstimate, ThetaPosterior,
};
pub use io::{cmd_prior, cmd_sim1, cmd_sim2, parse_corpus, serialize_corpus, RunConfig, RunReport};
pub use model::{
    conjugate_update, dataset_from_observations, merge, BetaParams, Construction, CountTable,
    HbmConfig, Observation, VerbCounts, VerbId,
};
pub use numerics::LogProb;
