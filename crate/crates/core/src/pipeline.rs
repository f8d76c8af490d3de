//! End-to-end orchestration: train a model on a corpus, disambiguate every
//! block, and serialize clusters as JSON Lines.
//!
//! Blocks are independent units of work and run in parallel; outputs are
//! assembled in block-key order, so results do not depend on the thread
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{agglomerate, Clustering};
use crate::config::RunConfig;
use crate::corpus::{Corpus, RefId};
use crate::inference::{
    block_r_values, estimate_prior_from_r, matrix_from_r, BlockPrior, PRIOR_MAX_ITER, PRIOR_TOL,
};
use crate::training::{
    fit_ratio_model, generate_match_set, generate_nonmatch_set, RatioModel, ReferencePairSets,
};
use crate::transitivity::{repair_block, RepairReport};
use crate::Result;

/// Non-match sets are at least this large; bigger match sets are matched
/// one-for-one to keep the totals balanced.
pub const MIN_NONMATCH_SIZE: usize = 1000;

/// Pair-set sizes recorded alongside a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingStats {
    pub match_pairs: usize,
    pub nonmatch_pairs: usize,
}

/// Everything produced for one block during disambiguation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOutcome {
    pub clustering: Clustering,
    /// Absent for blocks with a single reference, which skip scoring.
    pub prior: Option<BlockPrior>,
    pub repair: Option<RepairReport>,
}

/// Per-block outcomes in block-key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationRun {
    pub blocks: Vec<BlockOutcome>,
}

impl DisambiguationRun {
    pub fn cluster_count(&self) -> usize {
        self.blocks.iter().map(|b| b.clustering.clusters.len()).sum()
    }
}

/// Generates the training pair sets: all auto-match pairs plus a seeded
/// sample of cross-block pairs sized `max(1000, |M|)`.
pub fn generate_pair_sets(corpus: &Corpus, seed: u64) -> Result<ReferencePairSets> {
    let match_pairs = generate_match_set(corpus)?;
    let nonmatch_size = match_pairs.len().max(MIN_NONMATCH_SIZE);
    let nonmatch_pairs = generate_nonmatch_set(corpus, seed, nonmatch_size)?;
    Ok(ReferencePairSets {
        match_pairs,
        nonmatch_pairs,
    })
}

/// Auto-generates training sets and fits the ratio model.
pub fn train(corpus: &Corpus, config: &RunConfig) -> Result<(RatioModel, TrainingStats)> {
    config.validate()?;
    let sets = generate_pair_sets(corpus, config.seed)?;
    let stats = TrainingStats {
        match_pairs: sets.match_pairs.len(),
        nonmatch_pairs: sets.nonmatch_pairs.len(),
    };
    let model = fit_ratio_model(corpus, &sets, config.alpha, config.min_count)?;
    Ok((model, stats))
}

/// Scores, repairs, and clusters one block.
pub fn disambiguate_block(
    block: &crate::corpus::Block,
    corpus: &Corpus,
    model: &RatioModel,
    config: &RunConfig,
) -> Result<BlockOutcome> {
    if block.refs.len() < 2 {
        return Ok(BlockOutcome {
            clustering: Clustering {
                block_key: block.key.clone(),
                clusters: block.refs.iter().map(|r| vec![r.clone()]).collect(),
                merges: vec![],
            },
            prior: None,
            repair: None,
        });
    }
    let r_values = block_r_values(block, corpus, model)?;
    let prior = estimate_prior_from_r(
        &block.key,
        &r_values,
        config.prior_p0,
        PRIOR_TOL,
        PRIOR_MAX_ITER,
    )?;
    let mut matrix = matrix_from_r(block, &r_values, prior.prior)?;
    let repair = repair_block(&mut matrix, &config.repair())?;
    let clustering = agglomerate(&matrix, config.stop_threshold);
    Ok(BlockOutcome {
        clustering,
        prior: Some(prior),
        repair: Some(repair),
    })
}

/// Runs the full per-block pipeline over the corpus, in parallel, with
/// outcomes in block-key order.
pub fn disambiguate(
    corpus: &Corpus,
    model: &RatioModel,
    config: &RunConfig,
) -> Result<DisambiguationRun> {
    config.validate()?;
    let blocks = corpus
        .blocks()
        .par_iter()
        .map(|block| disambiguate_block(block, corpus, model, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(DisambiguationRun { blocks })
}

// ---------------------------------------------------------------------------
// Cluster file format
// ---------------------------------------------------------------------------

/// One line of a clusters JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLine {
    pub block: String,
    pub cluster_id: u32,
    pub refs: Vec<RefId>,
}

/// Serializes a run as JSON Lines, one line per cluster, in block-key order
/// with cluster ids numbered within each block.
pub fn clusters_to_jsonl(run: &DisambiguationRun) -> Result<String> {
    let mut out = String::new();
    for block in &run.blocks {
        for (i, refs) in block.clustering.clusters.iter().enumerate() {
            let line = ClusterLine {
                block: block.clustering.block_key.clone(),
                cluster_id: i as u32,
                refs: refs.clone(),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses a clusters JSONL file (blank lines ignored).
pub fn parse_clusters_jsonl(text: &str) -> Result<Vec<ClusterLine>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(lineno, line)| {
            serde_json::from_str(line).map_err(|e| crate::Error::InvalidRecord {
                line: lineno + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Serializes merge logs as JSON Lines, one line per block.
pub fn merges_to_jsonl(run: &DisambiguationRun) -> Result<String> {
    #[derive(Serialize)]
    struct MergeLine<'a> {
        block: &'a str,
        merges: &'a [crate::clustering::MergeStep],
    }
    let mut out = String::new();
    for block in &run.blocks {
        let line = MergeLine {
            block: &block.clustering.block_key,
            merges: &block.clustering.merges,
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    Ok(out)
}
