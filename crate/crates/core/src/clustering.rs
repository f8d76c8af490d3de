//! Greedy agglomerative clustering over a block's pair probabilities.
//!
//! Every reference starts in its own cluster. At each step the pair of
//! clusters with the highest linkage score merges, where the linkage odds
//! of two clusters is the geometric mean of `Q/(1-Q)` over all cross pairs;
//! for singleton merges this reduces to the pairwise probability itself.
//! Clustering stops when the best linkage probability drops below the stop
//! threshold. The geometric mean resists single spurious high pairs, which
//! would otherwise chain unrelated references together.

use serde::{Deserialize, Serialize};

use crate::corpus::RefId;
use crate::inference::PairProbabilityMatrix;

/// Default stop threshold: merge while the best linkage probability is at
/// least one half.
pub const DEFAULT_STOP_THRESHOLD: f64 = 0.5;

/// One merge in the provenance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub left: Vec<RefId>,
    pub right: Vec<RefId>,
    pub probability: f64,
}

/// The clustering of one block plus its merge provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub block_key: String,
    /// Disjoint reference sets covering the block, each sorted, ordered by
    /// first reference id.
    pub clusters: Vec<Vec<RefId>>,
    pub merges: Vec<MergeStep>,
}

/// Linkage score of two disjoint clusters given as matrix indices: the
/// geometric mean of cross-pair odds, and that value as a probability.
pub fn linkage_odds(
    a: &[usize],
    b: &[usize],
    matrix: &PairProbabilityMatrix,
) -> (f64, f64) {
    let mut sum = 0.0;
    for &i in a {
        for &j in b {
            let q = matrix.get(i, j);
            sum += (q / (1.0 - q)).ln();
        }
    }
    let mean = sum / (a.len() * b.len()) as f64;
    let odds = mean.exp();
    (odds, odds / (1.0 + odds))
}

/// Greedy agglomeration with deterministic tie-breaking: among equal-score
/// pairs, the pair whose (smallest ref id of the earlier cluster, smallest
/// ref id of the later cluster) is lexicographically least merges first.
pub fn agglomerate(matrix: &PairProbabilityMatrix, stop_threshold: f64) -> Clustering {
    let n = matrix.len();
    let mut clusters: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut merges = Vec::new();

    struct Candidate {
        prob: f64,
        tie_key: (RefId, RefId),
        slot_a: usize,
        slot_b: usize,
    }

    loop {
        let mut best: Option<Candidate> = None;
        let active: Vec<usize> = (0..clusters.len()).filter(|&s| clusters[s].is_some()).collect();
        for (ai, &sa) in active.iter().enumerate() {
            for &sb in &active[ai + 1..] {
                let a = clusters[sa].as_ref().unwrap();
                let b = clusters[sb].as_ref().unwrap();
                let (_, prob) = linkage_odds(a, b, matrix);
                let min_a = min_ref(a, matrix);
                let min_b = min_ref(b, matrix);
                let tie_key = if min_a < min_b {
                    (min_a, min_b)
                } else {
                    (min_b, min_a)
                };
                let better = match &best {
                    None => true,
                    Some(c) => prob > c.prob || (prob == c.prob && tie_key < c.tie_key),
                };
                if better {
                    best = Some(Candidate { prob, tie_key, slot_a: sa, slot_b: sb });
                }
            }
        }

        let Some(Candidate { prob, slot_a: sa, slot_b: sb, .. }) = best else {
            break; // zero or one cluster left
        };
        if prob < stop_threshold {
            break;
        }

        let a = clusters[sa].take().unwrap();
        let b = clusters[sb].take().unwrap();
        merges.push(MergeStep {
            left: to_ref_ids(&a, matrix),
            right: to_ref_ids(&b, matrix),
            probability: prob,
        });
        let mut merged = a;
        merged.extend(b);
        merged.sort_unstable();
        clusters[sa] = Some(merged);
    }

    let mut out: Vec<Vec<RefId>> = clusters
        .into_iter()
        .flatten()
        .map(|c| {
            let mut ids = to_ref_ids(&c, matrix);
            ids.sort();
            ids
        })
        .collect();
    out.sort();

    Clustering {
        block_key: matrix.block_key.clone(),
        clusters: out,
        merges,
    }
}

fn min_ref(cluster: &[usize], matrix: &PairProbabilityMatrix) -> RefId {
    cluster
        .iter()
        .map(|&i| matrix.ref_ids[i].clone())
        .min()
        .expect("clusters are non-empty")
}

fn to_ref_ids(cluster: &[usize], matrix: &PairProbabilityMatrix) -> Vec<RefId> {
    let mut ids: Vec<RefId> = cluster.iter().map(|&i| matrix.ref_ids[i].clone()).collect();
    ids.sort();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(n: usize, probs: Vec<f64>) -> PairProbabilityMatrix {
        let ids: Vec<RefId> = (0..n).map(|i| RefId::new(format!("c{i}"), 0)).collect();
        PairProbabilityMatrix::new("k".to_string(), ids, probs)
    }

    #[test]
    fn linkage_single_pair_is_the_probability() {
        let m = matrix(2, vec![0.9]);
        let (odds, prob) = linkage_odds(&[0], &[1], &m);
        assert!((odds - 9.0).abs() < 1e-12);
        assert!((prob - 0.9).abs() < 1e-12);
    }

    #[test]
    fn linkage_geometric_mean_example() {
        // triangle order: (0,1)=0.9, (0,2)=0.8, (1,2)=0.7
        let m = matrix(3, vec![0.9, 0.8, 0.7]);
        let (odds, prob) = linkage_odds(&[0, 1], &[2], &m);
        assert!((odds - (4.0f64 * (7.0 / 3.0)).sqrt()).abs() < 1e-12);
        assert!((prob - 0.75339).abs() < 5e-6, "prob = {prob}");
    }

    #[test]
    fn linkage_neutral_evidence() {
        let m = matrix(3, vec![0.5, 0.5, 0.5]);
        let (odds, prob) = linkage_odds(&[0, 1], &[2], &m);
        assert!((odds - 1.0).abs() < 1e-12);
        assert!((prob - 0.5).abs() < 1e-12);
    }

    #[test]
    fn agglomerate_merges_all_three() {
        let m = matrix(3, vec![0.9, 0.8, 0.7]);
        let clustering = agglomerate(&m, 0.5);
        assert_eq!(clustering.clusters.len(), 1);
        assert_eq!(clustering.merges.len(), 2);
        assert!((clustering.merges[0].probability - 0.9).abs() < 1e-12);
        assert!((clustering.merges[1].probability - 0.75339).abs() < 5e-6);
    }

    #[test]
    fn agglomerate_stops_at_threshold() {
        let m = matrix(3, vec![0.9, 0.1, 0.1]);
        let clustering = agglomerate(&m, 0.5);
        assert_eq!(clustering.clusters.len(), 2);
        assert_eq!(
            clustering.clusters[0],
            vec![RefId::new("c0", 0), RefId::new("c1", 0)]
        );
        assert_eq!(clustering.clusters[1], vec![RefId::new("c2", 0)]);
        assert_eq!(clustering.merges.len(), 1);
    }

    #[test]
    fn agglomerate_degenerate_blocks() {
        let empty = matrix(0, vec![]);
        let clustering = agglomerate(&empty, 0.5);
        assert!(clustering.clusters.is_empty());
        assert!(clustering.merges.is_empty());

        let single = matrix(1, vec![]);
        let clustering = agglomerate(&single, 0.5);
        assert_eq!(clustering.clusters.len(), 1);
        assert!(clustering.merges.is_empty());
    }

    #[test]
    fn threshold_one_keeps_singletons_threshold_zero_merges_all() {
        let m = matrix(4, vec![0.99, 0.9, 0.2, 0.8, 0.3, 0.1]);
        assert_eq!(agglomerate(&m, 1.0).clusters.len(), 4);
        assert_eq!(agglomerate(&m, 0.0).clusters.len(), 1);
    }

    fn arb_matrix() -> impl Strategy<Value = PairProbabilityMatrix> {
        (2usize..7).prop_flat_map(|n| {
            prop::collection::vec(0.01f64..0.99, n * (n - 1) / 2)
                .prop_map(move |probs| matrix(n, probs))
        })
    }

    proptest! {
        #[test]
        fn clusters_partition_the_block(m in arb_matrix(), threshold in 0.0f64..1.0) {
            let clustering = agglomerate(&m, threshold);
            let mut all: Vec<RefId> = clustering
                .clusters
                .iter()
                .flat_map(|c| c.iter().cloned())
                .collect();
            all.sort();
            let mut expected = m.ref_ids.clone();
            expected.sort();
            prop_assert_eq!(all, expected);
        }

        /// Every logged merge is at or above the threshold, and at
        /// termination no remaining cluster pair reaches it.
        #[test]
        fn merge_log_respects_threshold(m in arb_matrix(), threshold in 0.05f64..0.95) {
            let clustering = agglomerate(&m, threshold);
            for step in &clustering.merges {
                prop_assert!(step.probability >= threshold);
            }
            // rebuild index clusters to check the remaining linkage scores
            let index_of = |id: &RefId| m.ref_ids.iter().position(|r| r == id).unwrap();
            let clusters: Vec<Vec<usize>> = clustering
                .clusters
                .iter()
                .map(|c| c.iter().map(&index_of).collect())
                .collect();
            for i in 0..clusters.len() {
                for j in (i + 1)..clusters.len() {
                    let (_, prob) = linkage_odds(&clusters[i], &clusters[j], &m);
                    prop_assert!(prob < threshold);
                }
            }
        }

        #[test]
        fn agglomerate_is_deterministic(m in arb_matrix()) {
            let a = agglomerate(&m, 0.5);
            let b = agglomerate(&m, 0.5);
            prop_assert_eq!(a, b);
        }
    }
}
