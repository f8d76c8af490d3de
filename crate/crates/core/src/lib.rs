//! Author name disambiguation for bibliographic corpora.
//!
//! `byline` answers the question "which of these name occurrences belong to
//! the same person?" for corpora of citation records. The pipeline:
//!
//! 1. **[`corpus`]** — ingest JSON Lines citation records, normalize author
//!    names, and partition every (citation, author position) reference into
//!    last-name + first-initial blocks.
//! 2. **[`profile`]** — compare two references within a block and produce a
//!    discretized similarity profile over title, journal, coauthors,
//!    subjects, language, affiliation, email, and name attributes.
//! 3. **[`training`]** — auto-generate a match set (shared email, or full
//!    name agreement in rare blocks) and a non-match set (cross-block
//!    samples), then fit a smoothed likelihood-ratio table `r(x)` over
//!    profiles.
//! 4. **[`inference`]** — estimate a per-block match prior and convert
//!    r-values into pairwise same-author probabilities via Bayes' rule.
//! 5. **[`transitivity`]** — detect triplets whose probabilities are
//!    logically inconsistent and project them back onto the transitivity
//!    boundary by weighted least squares.
//! 6. **[`clustering`]** — greedily merge clusters by geometric-mean match
//!    odds until the best linkage falls below a stop threshold.
//! 7. **[`metrics`]** — score a predicted clustering against a gold
//!    partition: pairwise accuracy/precision/recall/F1, cluster and author
//!    purity with their K-measure, and B-cubed precision/recall.
//!
//! [`pipeline`] wires the stages together; the `byline` CLI (a separate
//! crate) exposes them as `ingest`, `train`, `disambiguate`, `evaluate`,
//! and `inspect pair` subcommands. All randomness flows from a single seed
//! and every stage is deterministic, so identical inputs produce
//! byte-identical outputs regardless of thread count.

pub mod clustering;
pub mod config;
pub mod corpus;
mod error;
pub mod inference;
pub mod metrics;
pub mod pipeline;
pub mod profile;
pub mod synth;
pub mod training;
pub mod transitivity;

pub use config::RunConfig;
pub use corpus::{Author, Block, CitationRecord, Corpus, NameParts, RefId};
pub use error::{Error, Result};
pub use metrics::EvaluationReport;
pub use profile::{ProfileSchema, SimilarityProfile};
pub use training::RatioModel;
