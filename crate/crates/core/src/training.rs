//! Auto-generated training sets and the likelihood-ratio table r(x).
//!
//! The match set M holds within-block pairs that are almost certainly the
//! same person (identical email, or full-name agreement in a rare block);
//! the non-match set N holds cross-block pairs, which different block keys
//! guarantee to be different persons. Profiles counted over both sets give
//! the ratio r(x) = P(x|M) / P(x|N), additively smoothed, with a
//! per-dimension independence backoff for profiles seen fewer than
//! `min_count` times.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, RefId};
use crate::profile::{
    compute_cross_block_profile, compute_profile, profile_index, ProfileSchema, SimilarityProfile,
};
use crate::{Error, Result};

/// Current on-disk format version for persisted models.
pub const MODEL_FORMAT_VERSION: u64 = 1;

/// r-values are clamped to this range to keep the Bayes conversion stable.
pub const R_CLAMP: (f64, f64) = (1e-6, 1e6);

/// Default additive smoothing constant.
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Default minimum full-table count below which lookups back off to the
/// per-dimension product.
pub const DEFAULT_MIN_COUNT: u64 = 5;

/// The auto-generated training pair sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferencePairSets {
    pub match_pairs: Vec<(RefId, RefId)>,
    pub nonmatch_pairs: Vec<(RefId, RefId)>,
}

/// Trained likelihood-ratio model: profile counts over M and N plus the
/// smoothing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioModel {
    pub schema_version: u32,
    pub alpha: f64,
    pub min_count: u64,
    pub total_m: u64,
    pub total_n: u64,
    /// Sparse full-profile counts keyed by mixed-radix profile index.
    pub full_counts_m: BTreeMap<u32, u64>,
    pub full_counts_n: BTreeMap<u32, u64>,
    /// `dim_counts_*[d][level]` counts observations of `level` in dimension `d`.
    pub dim_counts_m: Vec<Vec<u64>>,
    pub dim_counts_n: Vec<Vec<u64>>,
}

/// All within-block pairs that pass one of the two auto-match rules:
/// identical non-absent email, or (in a rare block) agreement on a full
/// first name plus middle initial and suffix, with both-absent counting as
/// agreement.
pub fn generate_match_set(corpus: &Corpus) -> Result<Vec<(RefId, RefId)>> {
    let mut pairs = Vec::new();
    for block in corpus.blocks() {
        for i in 0..block.refs.len() {
            for j in (i + 1)..block.refs.len() {
                let a = &block.refs[i];
                let b = &block.refs[j];
                let (_, author_a) = corpus.author(a)?;
                let (_, author_b) = corpus.author(b)?;

                let email_match = match (&author_a.email, &author_b.email) {
                    (Some(x), Some(y)) => x == y,
                    _ => false,
                };

                let full_name_match = block.popularity_bin == 0
                    && author_a.name.first.chars().count() > 1
                    && author_a.name.first == author_b.name.first
                    && author_a.name.middle_initial == author_b.name.middle_initial
                    && author_a.name.suffix == author_b.name.suffix;

                if email_match || full_name_match {
                    pairs.push((a.clone(), b.clone()));
                }
            }
        }
    }
    Ok(pairs)
}

/// Samples `size` cross-block reference pairs uniformly, seeded. The first
/// element's block supplies the name-popularity dimension when the pair is
/// profiled.
pub fn generate_nonmatch_set(
    corpus: &Corpus,
    seed: u64,
    size: usize,
) -> Result<Vec<(RefId, RefId)>> {
    let blocks = corpus.blocks();
    if blocks.len() < 2 {
        return Err(Error::InsufficientBlocks);
    }

    // flat reference list grouped by block, with each block's start offset
    let mut refs: Vec<&RefId> = Vec::new();
    let mut block_of: Vec<usize> = Vec::new();
    let mut starts = Vec::with_capacity(blocks.len());
    for (bi, block) in blocks.iter().enumerate() {
        starts.push(refs.len());
        for r in &block.refs {
            refs.push(r);
            block_of.push(bi);
        }
    }
    let total = refs.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(size);
    for _ in 0..size {
        let i = rng.random_range(0..total);
        let bi = block_of[i];
        let block_len = blocks[bi].refs.len();
        // uniform index over all refs outside block bi
        let off = rng.random_range(0..total - block_len);
        let j = if off < starts[bi] { off } else { off + block_len };
        pairs.push((refs[i].clone(), refs[j].clone()));
    }
    Ok(pairs)
}

/// Counts profiles over both training sets and assembles the model.
pub fn fit_ratio_model(
    corpus: &Corpus,
    sets: &ReferencePairSets,
    alpha: f64,
    min_count: u64,
) -> Result<RatioModel> {
    if sets.match_pairs.is_empty() {
        return Err(Error::EmptyTrainingSet("match set M"));
    }
    if sets.nonmatch_pairs.is_empty() {
        return Err(Error::EmptyTrainingSet("non-match set N"));
    }
    if !(alpha > 0.0) {
        return Err(Error::DomainError(format!(
            "smoothing constant alpha must be positive, got {alpha}"
        )));
    }
    if min_count < 1 {
        return Err(Error::DomainError(
            "min_count must be at least 1".to_string(),
        ));
    }

    let schema = ProfileSchema::v1();
    let dims = schema.dimension_count();
    let mut model = RatioModel {
        schema_version: schema.version(),
        alpha,
        min_count,
        total_m: 0,
        total_n: 0,
        full_counts_m: BTreeMap::new(),
        full_counts_n: BTreeMap::new(),
        dim_counts_m: (0..dims)
            .map(|d| vec![0u64; schema.cardinality(d) as usize])
            .collect(),
        dim_counts_n: (0..dims)
            .map(|d| vec![0u64; schema.cardinality(d) as usize])
            .collect(),
    };

    for (a, b) in &sets.match_pairs {
        let x = compute_profile(corpus, a, b, &schema)?;
        tally(&mut model.full_counts_m, &mut model.dim_counts_m, &x, &schema)?;
        model.total_m += 1;
    }
    for (a, b) in &sets.nonmatch_pairs {
        let x = compute_cross_block_profile(corpus, a, b, &schema)?;
        tally(&mut model.full_counts_n, &mut model.dim_counts_n, &x, &schema)?;
        model.total_n += 1;
    }
    Ok(model)
}

fn tally(
    full: &mut BTreeMap<u32, u64>,
    dims: &mut [Vec<u64>],
    x: &SimilarityProfile,
    schema: &ProfileSchema,
) -> Result<()> {
    let index = profile_index(x, schema)? as u32;
    *full.entry(index).or_insert(0) += 1;
    for (d, &level) in x.levels.iter().enumerate() {
        dims[d][level as usize] += 1;
    }
    Ok(())
}

impl RatioModel {
    pub fn schema(&self) -> ProfileSchema {
        ProfileSchema::v1()
    }

    /// The likelihood ratio for a profile: the smoothed full-table estimate
    /// when the profile was seen at least `min_count` times across both
    /// sets, otherwise the per-dimension independence backoff. Clamped to
    /// [1e-6, 1e6].
    pub fn r_value(&self, x: &SimilarityProfile) -> Result<f64> {
        if x.schema_version != self.schema_version {
            return Err(Error::SchemaMismatch {
                model: self.schema_version,
                profile: x.schema_version,
            });
        }
        let schema = self.schema();
        let index = profile_index(x, &schema)? as u32;
        let c_m = self.full_counts_m.get(&index).copied().unwrap_or(0);
        let c_n = self.full_counts_n.get(&index).copied().unwrap_or(0);
        let a = self.alpha;
        let (t_m, t_n) = (self.total_m as f64, self.total_n as f64);

        let r = if c_m + c_n >= self.min_count {
            let p_m = (c_m as f64 + a) / (t_m + 2.0 * a);
            let p_n = (c_n as f64 + a) / (t_n + 2.0 * a);
            p_m / p_n
        } else {
            let mut r = 1.0;
            for (d, &level) in x.levels.iter().enumerate() {
                let card = schema.cardinality(d) as f64;
                let m_d = self.dim_counts_m[d][level as usize] as f64;
                let n_d = self.dim_counts_n[d][level as usize] as f64;
                let p_m = (m_d + a) / (t_m + a * card);
                let p_n = (n_d + a) / (t_n + a * card);
                r *= p_m / p_n;
            }
            r
        };
        Ok(r.clamp(R_CLAMP.0, R_CLAMP.1))
    }

    /// Hex SHA-256 of the model's canonical JSON serialization; embedded in
    /// the model file and echoed into run summaries.
    pub fn checksum(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let checksum = self.checksum()?;
        let mut value = serde_json::to_value(self)?;
        let obj = value
            .as_object_mut()
            .expect("model serializes to an object");
        obj.insert(
            "format_version".to_string(),
            serde_json::Value::from(MODEL_FORMAT_VERSION),
        );
        obj.insert("checksum".to_string(), serde_json::Value::from(checksum));
        std::fs::write(path, serde_json::to_string(&value)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::CorruptModel(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::CorruptModel("not a JSON object".to_string()))?;
        let version = obj
            .remove("format_version")
            .and_then(|v| v.as_u64())
            .unwrap_or(0);
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::FormatVersionUnsupported {
                found: version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let stored_checksum = obj
            .remove("checksum")
            .and_then(|v| v.as_str().map(String::from))
            .ok_or_else(|| Error::CorruptModel("missing checksum".to_string()))?;
        let model: RatioModel = serde_json::from_value(value)
            .map_err(|e| Error::CorruptModel(e.to_string()))?;
        let actual = model.checksum()?;
        if actual != stored_checksum {
            return Err(Error::CorruptModel(format!(
                "checksum mismatch: stored {stored_checksum}, computed {actual}"
            )));
        }
        Ok(model)
    }
}
