//! Bayes conversion of r-values into pairwise same-author probabilities.
//!
//! Each block gets its own match prior, found by fixed-point iteration on
//! the mean posterior over the block's pairs: common names settle on a low
//! prior, distinctive names on a high one. Posteriors are clamped away from
//! 0 and 1 so the least-squares weights 1/(P(1-P)) used downstream stay
//! finite.

use serde::{Deserialize, Serialize};

use crate::corpus::{Block, Corpus, RefId};
use crate::profile::{profile_from_features, ProfileSchema, RefFeatures};
use crate::training::RatioModel;
use crate::{Error, Result};

/// Posterior clamp bounds.
pub const POSTERIOR_CLAMP: (f64, f64) = (1e-6, 1.0 - 1e-6);

/// Prior clamp bounds.
pub const PRIOR_CLAMP: (f64, f64) = (1e-4, 0.999);

/// Default starting point for the prior fixed-point iteration.
pub const DEFAULT_PRIOR_P0: f64 = 0.1;

/// Convergence tolerance and iteration cap for prior estimation.
pub const PRIOR_TOL: f64 = 1e-4;
pub const PRIOR_MAX_ITER: u32 = 50;

/// A per-block match prior and the number of fixed-point iterations it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPrior {
    pub block_key: String,
    pub prior: f64,
    pub iterations_used: u32,
}

/// Symmetric matrix of pairwise same-author probabilities for one block,
/// stored as the strict upper triangle over the block's reference order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairProbabilityMatrix {
    pub block_key: String,
    pub ref_ids: Vec<RefId>,
    /// Row-major strict upper triangle: entry (i, j) with i < j lives at
    /// `i*(2n-i-1)/2 + (j-i-1)`.
    probabilities: Vec<f64>,
}

impl PairProbabilityMatrix {
    pub fn new(block_key: String, ref_ids: Vec<RefId>, probabilities: Vec<f64>) -> Self {
        let n = ref_ids.len();
        assert_eq!(probabilities.len(), n * n.saturating_sub(1) / 2, "triangle size");
        PairProbabilityMatrix {
            block_key,
            ref_ids,
            probabilities,
        }
    }

    pub fn len(&self) -> usize {
        self.ref_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ref_ids.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.probabilities.len()
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.len());
        i * (2 * self.len() - i - 1) / 2 + (j - i - 1)
    }

    /// Probability for the unordered pair (i, j), i != j.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.probabilities[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let k = self.offset(i, j);
        self.probabilities[k] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Bayes' rule: converts a likelihood ratio and a prior into the posterior
/// match probability r·p / (r·p + 1 − p), clamped.
pub fn posterior(r: f64, prior: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::DomainError(format!(
            "likelihood ratio must be positive and finite, got {r}"
        )));
    }
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::DomainError(format!(
            "prior must lie strictly between 0 and 1, got {prior}"
        )));
    }
    let p = r * prior / (r * prior + (1.0 - prior));
    Ok(p.clamp(POSTERIOR_CLAMP.0, POSTERIOR_CLAMP.1))
}

/// r-values for every pair of a block, in upper-triangle order. Profile
/// features are computed once per reference.
pub fn block_r_values(block: &Block, corpus: &Corpus, model: &RatioModel) -> Result<Vec<f64>> {
    let schema = ProfileSchema::v1();
    let features = block
        .refs
        .iter()
        .map(|r| {
            let (citation, _) = corpus.author(r)?;
            Ok(RefFeatures::new(citation, r.position))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = features.len();
    let mut r_values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let x = profile_from_features(
                &features[i],
                &features[j],
                block.popularity_bin,
                &schema,
            );
            r_values.push(model.r_value(&x)?);
        }
    }
    Ok(r_values)
}

/// Fixed-point iteration p ← mean over pairs of posterior(r, p), from `p0`,
/// stopping when the update moves less than `tol` or after `max_iter`
/// rounds. The result is clamped to [1e-4, 0.999].
pub fn estimate_prior_from_r(
    block_key: &str,
    r_values: &[f64],
    p0: f64,
    tol: f64,
    max_iter: u32,
) -> Result<BlockPrior> {
    if r_values.is_empty() {
        return Err(Error::DomainError(format!(
            "block '{block_key}' has no pairs to estimate a prior from"
        )));
    }
    let mut p = p0.clamp(PRIOR_CLAMP.0, PRIOR_CLAMP.1);
    let mut iterations_used = 0;
    for _ in 0..max_iter {
        iterations_used += 1;
        let mean = r_values
            .iter()
            .map(|&r| posterior(r, p))
            .sum::<Result<f64>>()?
            / r_values.len() as f64;
        let next = mean.clamp(PRIOR_CLAMP.0, PRIOR_CLAMP.1);
        let delta = (next - p).abs();
        p = next;
        if delta < tol {
            break;
        }
    }
    Ok(BlockPrior {
        block_key: block_key.to_string(),
        prior: p,
        iterations_used,
    })
}

/// Estimates the block's match prior from its pairwise r-values.
pub fn estimate_prior(
    block: &Block,
    corpus: &Corpus,
    model: &RatioModel,
    p0: f64,
) -> Result<BlockPrior> {
    let r_values = block_r_values(block, corpus, model)?;
    estimate_prior_from_r(&block.key, &r_values, p0, PRIOR_TOL, PRIOR_MAX_ITER)
}

/// Converts r-values into a probability matrix under a fixed prior.
pub fn matrix_from_r(
    block: &Block,
    r_values: &[f64],
    prior: f64,
) -> Result<PairProbabilityMatrix> {
    let probabilities = r_values
        .iter()
        .map(|&r| posterior(r, prior))
        .collect::<Result<Vec<_>>>()?;
    Ok(PairProbabilityMatrix::new(
        block.key.clone(),
        block.refs.clone(),
        probabilities,
    ))
}

/// Scores every pair of a block under the given prior.
pub fn score_block(
    block: &Block,
    corpus: &Corpus,
    model: &RatioModel,
    prior: f64,
) -> Result<PairProbabilityMatrix> {
    let r_values = block_r_values(block, corpus, model)?;
    matrix_from_r(block, &r_values, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{normalize_name, Author, CitationRecord, DEFAULT_POPULARITY_THRESHOLDS};
    use crate::training::{fit_ratio_model, generate_match_set, generate_nonmatch_set, ReferencePairSets};
    use proptest::prelude::*;

    #[test]
    fn posterior_examples() {
        assert!((posterior(1.0, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((posterior(9.0, 0.1).unwrap() - 0.5).abs() < 1e-15);
        assert!((posterior(3.0, 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn posterior_domain_errors() {
        assert!(posterior(0.0, 0.5).is_err());
        assert!(posterior(-1.0, 0.5).is_err());
        assert!(posterior(f64::NAN, 0.5).is_err());
        assert!(posterior(1.0, 0.0).is_err());
        assert!(posterior(1.0, 1.0).is_err());
    }

    #[test]
    fn posterior_clamps() {
        assert_eq!(posterior(1e9, 0.999).unwrap(), POSTERIOR_CLAMP.1);
        assert_eq!(posterior(1e-12, 0.001).unwrap(), POSTERIOR_CLAMP.0);
    }

    proptest! {
        #[test]
        fn posterior_monotone_in_both_arguments(
            r1 in 0.01f64..100.0,
            r2 in 0.01f64..100.0,
            p1 in 0.05f64..0.95,
            p2 in 0.05f64..0.95,
        ) {
            let (rl, rh) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            let (pl, ph) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(posterior(rl, pl).unwrap() <= posterior(rh, pl).unwrap());
            prop_assert!(posterior(rl, pl).unwrap() <= posterior(rl, ph).unwrap());
        }

        /// Bayes symmetry: posterior(r, p) + posterior(1/r, 1-p) = 1.
        #[test]
        fn posterior_bayes_symmetry(r in 0.01f64..100.0, p in 0.05f64..0.95) {
            let a = posterior(r, p).unwrap();
            let b = posterior(1.0 / r, 1.0 - p).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-9, "a = {a}, b = {b}");
        }
    }

    #[test]
    fn prior_fixed_point_at_r_one() {
        let prior = estimate_prior_from_r("k", &[1.0; 10], 0.1, PRIOR_TOL, PRIOR_MAX_ITER)
            .unwrap();
        assert!((prior.prior - 0.1).abs() < 1e-12);
        assert_eq!(prior.iterations_used, 1);
    }

    #[test]
    fn prior_converges_to_upper_clamp_for_huge_r() {
        let prior = estimate_prior_from_r("k", &[1e6; 10], 0.1, PRIOR_TOL, PRIOR_MAX_ITER)
            .unwrap();
        assert_eq!(prior.prior, PRIOR_CLAMP.1);
    }

    #[test]
    fn prior_converges_to_lower_clamp_for_tiny_r() {
        let prior = estimate_prior_from_r("k", &[1e-6; 10], 0.1, PRIOR_TOL, PRIOR_MAX_ITER)
            .unwrap();
        assert_eq!(prior.prior, PRIOR_CLAMP.0);
    }

    fn twin_corpus() -> Corpus {
        // two identical-metadata citations by one author plus unrelated noise
        let twin = |id: &str| CitationRecord {
            id: id.to_string(),
            title: "Spectral analysis of protein folding networks".to_string(),
            journal: Some("J Comp Bio".to_string()),
            authors: vec![Author {
                name: normalize_name("Twin", "Tara", "B", "").unwrap(),
                affiliation: Some("University of Testing".to_string()),
                email: Some("tara@uni.edu".to_string()),
            }],
            subjects: vec!["proteins".to_string(), "networks".to_string()],
            language: Some("eng".to_string()),
            year: Some(2010),
        };
        let other = |id: &str, last: &str, first: &str| CitationRecord {
            id: id.to_string(),
            title: format!("Unrelated {last} paper on galaxies"),
            journal: Some("Astro J".to_string()),
            authors: vec![Author {
                name: normalize_name(last, first, "", "").unwrap(),
                affiliation: None,
                email: None,
            }],
            subjects: vec!["galaxies".to_string()],
            language: Some("eng".to_string()),
            year: Some(2011),
        };
        Corpus::from_records(
            vec![
                twin("t1"),
                twin("t2"),
                other("o1", "Orbit", "Oya"),
                other("o2", "Orbit", "Oya"),
                other("o3", "Comet", "Cal"),
            ],
            DEFAULT_POPULARITY_THRESHOLDS,
        )
        .unwrap()
    }

    fn twin_model(corpus: &Corpus) -> RatioModel {
        let sets = ReferencePairSets {
            match_pairs: generate_match_set(corpus).unwrap(),
            nonmatch_pairs: generate_nonmatch_set(corpus, 3, 100).unwrap(),
        };
        fit_ratio_model(corpus, &sets, 0.5, 5).unwrap()
    }

    #[test]
    fn score_block_saturated_pair_beats_prior() {
        let corpus = twin_corpus();
        let model = twin_model(&corpus);
        let block = corpus.block("twin_t").unwrap();
        let prior = estimate_prior(block, &corpus, &model, DEFAULT_PRIOR_P0).unwrap();
        let matrix = score_block(block, &corpus, &model, prior.prior).unwrap();
        assert_eq!(matrix.pair_count(), 1);
        assert!(matrix.get(0, 1) > prior.prior);
    }

    #[test]
    fn score_block_pair_counts() {
        let corpus = twin_corpus();
        let model = twin_model(&corpus);

        // n = 1 -> empty matrix
        let single = corpus.block("comet_c").unwrap();
        let matrix = score_block(single, &corpus, &model, 0.5).unwrap();
        assert_eq!(matrix.pair_count(), 0);

        // C(4,2) = 6
        let records: Vec<CitationRecord> = (0..4)
            .map(|i| CitationRecord {
                id: format!("q{i}"),
                title: "t".to_string(),
                journal: None,
                authors: vec![Author {
                    name: normalize_name("Quad", "Q", "", "").unwrap(),
                    affiliation: None,
                    email: None,
                }],
                subjects: vec![],
                language: None,
                year: None,
            })
            .collect();
        let mut all = twin_corpus().records().to_vec();
        all.extend(records);
        let corpus = Corpus::from_records(all, DEFAULT_POPULARITY_THRESHOLDS).unwrap();
        let model = twin_model(&corpus);
        let block = corpus.block("quad_q").unwrap();
        let matrix = score_block(block, &corpus, &model, 0.5).unwrap();
        assert_eq!(matrix.pair_count(), 6);
    }

    #[test]
    fn matrix_symmetry_and_bounds() {
        let corpus = twin_corpus();
        let model = twin_model(&corpus);
        let block = corpus.block("orbit_o").unwrap();
        let matrix = score_block(block, &corpus, &model, 0.3).unwrap();
        for i in 0..matrix.len() {
            for j in 0..matrix.len() {
                if i != j {
                    let p = matrix.get(i, j);
                    assert_eq!(p, matrix.get(j, i));
                    assert!(p > 0.0 && p < 1.0);
                }
            }
        }
    }

    #[test]
    fn triangle_offsets_cover_all_pairs() {
        let ids: Vec<RefId> = (0..5).map(|i| RefId::new(format!("c{i}"), 0)).collect();
        let mut m = PairProbabilityMatrix::new("k".to_string(), ids, vec![0.0; 10]);
        let mut v = 0.0;
        for i in 0..5 {
            for j in (i + 1)..5 {
                v += 0.01;
                m.set(i, j, v);
            }
        }
        let mut seen: Vec<f64> = m.values().to_vec();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(seen.len(), 10);
        for w in seen.windows(2) {
            assert!(w[0] < w[1], "all offsets distinct");
        }
    }
}
