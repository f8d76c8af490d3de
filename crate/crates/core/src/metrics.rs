//! Evaluation of a predicted clustering against a gold partition.
//!
//! Four families of scores over the same two partitions:
//!
//! * pairwise accuracy, precision, recall, and F1 over all C(N,2)
//!   reference pairs;
//! * average cluster purity (ACP), average author purity (AAP), and their
//!   geometric mean, the K-measure;
//! * B-cubed per-reference precision and recall with their means and
//!   harmonic mean;
//! * cluster counts: gold clusters, generated clusters, and generated
//!   clusters that exactly match a gold cluster.
//!
//! Mean B-cubed precision equals ACP and mean B-cubed recall equals AAP for
//! every pair of partitions (group the references of each contingency cell
//! and the sums coincide term by term); the test suite exploits the
//! identity to cross-validate the two code paths.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pair counts over all unordered reference pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairConfusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Total pairs: always `tp + tn + fp + fn` and `C(N, 2)`.
    pub s: u64,
}

/// Cross-tabulation of generated clusters against gold clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[i][j]` = references in generated cluster i and gold cluster j.
    pub counts: Vec<Vec<u64>>,
    /// Generated cluster sizes (row sums).
    pub pred_sizes: Vec<u64>,
    /// Gold cluster sizes (column sums).
    pub gold_sizes: Vec<u64>,
    /// Total references N.
    pub total: u64,
    pub m_gold: u64,
    pub m_gen: u64,
    /// Generated clusters exactly equal to some gold cluster.
    pub m_cor: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseScores {
    pub accuracy: f64,
    pub pp: f64,
    pub pr: f64,
    pub pf1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityScores {
    pub acp: f64,
    pub aap: f64,
    pub k: f64,
}

/// B-cubed means plus the per-reference scores they average, sorted by
/// reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BCubedScores<T> {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_reference: Vec<(T, f64, f64)>,
}

/// Everything the evaluator produces for one (pred, gold) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub references: u64,
    pub confusion: PairConfusion,
    pub accuracy: f64,
    pub pp: f64,
    pub pr: f64,
    pub pf1: f64,
    pub acp: f64,
    pub aap: f64,
    pub k: f64,
    pub b3_precision: f64,
    pub b3_recall: f64,
    pub b3_f1: f64,
    pub m_gold: u64,
    pub m_gen: u64,
    pub m_cor: u64,
}

/// Maps each item to its cluster index, rejecting duplicates.
fn cluster_assignment<T: Eq + Hash + Clone>(
    partition: &[Vec<T>],
    side: &str,
) -> Result<HashMap<T, usize>> {
    let mut assignment = HashMap::new();
    for (idx, cluster) in partition.iter().enumerate() {
        for item in cluster {
            if assignment.insert(item.clone(), idx).is_some() {
                return Err(Error::ReferenceSetMismatch(format!(
                    "{side} partition assigns a reference to more than one cluster"
                )));
            }
        }
    }
    Ok(assignment)
}

fn check_same_items<T: Eq + Hash>(
    pred: &HashMap<T, usize>,
    gold: &HashMap<T, usize>,
) -> Result<()> {
    if pred.len() != gold.len() || !pred.keys().all(|k| gold.contains_key(k)) {
        return Err(Error::ReferenceSetMismatch(format!(
            "pred covers {} references, gold covers {}",
            pred.len(),
            gold.len()
        )));
    }
    Ok(())
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Builds the generated-by-gold contingency table.
pub fn contingency_table<T: Eq + Hash + Clone>(
    pred: &[Vec<T>],
    gold: &[Vec<T>],
) -> Result<ContingencyTable> {
    let pred_assignment = cluster_assignment(pred, "pred")?;
    let gold_assignment = cluster_assignment(gold, "gold")?;
    check_same_items(&pred_assignment, &gold_assignment)?;

    let mut counts = vec![vec![0u64; gold.len()]; pred.len()];
    for (item, &i) in &pred_assignment {
        let j = gold_assignment[item];
        counts[i][j] += 1;
    }
    let pred_sizes: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let gold_sizes: Vec<u64> = (0..gold.len())
        .map(|j| counts.iter().map(|row| row[j]).sum())
        .collect();
    let total = pred_sizes.iter().sum();

    let m_cor = counts
        .iter()
        .enumerate()
        .filter(|(i, row)| {
            row.iter()
                .enumerate()
                .any(|(j, &c)| c > 0 && c == pred_sizes[*i] && c == gold_sizes[j])
        })
        .count() as u64;

    Ok(ContingencyTable {
        counts,
        pred_sizes,
        gold_sizes,
        total,
        m_gold: gold.len() as u64,
        m_gen: pred.len() as u64,
        m_cor,
    })
}

/// Counts agreeing and disagreeing pairs between the two partitions.
pub fn pair_confusion<T: Eq + Hash + Clone>(
    pred: &[Vec<T>],
    gold: &[Vec<T>],
) -> Result<PairConfusion> {
    let table = contingency_table(pred, gold)?;
    confusion_from_table(&table)
}

fn confusion_from_table(table: &ContingencyTable) -> Result<PairConfusion> {
    let tp: u64 = table
        .counts
        .iter()
        .flat_map(|row| row.iter())
        .map(|&c| choose2(c))
        .sum();
    let same_pred: u64 = table.pred_sizes.iter().map(|&n| choose2(n)).sum();
    let same_gold: u64 = table.gold_sizes.iter().map(|&n| choose2(n)).sum();
    let s = choose2(table.total);
    let fp = same_pred - tp;
    let fn_ = same_gold - tp;
    let tn = s - tp - fp - fn_;
    Ok(PairConfusion { tp, tn, fp, fn_, s })
}

/// Accuracy, pairwise precision/recall, and their harmonic mean. Vacuous
/// precision or recall (no positive pairs on that side) scores 1.
pub fn pairwise_scores(c: &PairConfusion) -> Result<PairwiseScores> {
    if c.s == 0 {
        return Err(Error::EmptyInput);
    }
    let accuracy = (c.tp + c.tn) as f64 / c.s as f64;
    let pp = if c.tp + c.fp == 0 {
        1.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    };
    let pr = if c.tp + c.fn_ == 0 {
        1.0
    } else {
        c.tp as f64 / (c.tp + c.fn_) as f64
    };
    let pf1 = harmonic(pp, pr);
    Ok(PairwiseScores { accuracy, pp, pr, pf1 })
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// ACP, AAP, and the K-measure from a contingency table.
pub fn purity_scores(table: &ContingencyTable) -> Result<PurityScores> {
    if table.total == 0 {
        return Err(Error::EmptyInput);
    }
    let n = table.total as f64;
    let mut acp = 0.0;
    let mut aap = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c2 = (c * c) as f64;
            acp += c2 / table.pred_sizes[i] as f64;
            aap += c2 / table.gold_sizes[j] as f64;
        }
    }
    acp /= n;
    aap /= n;
    Ok(PurityScores {
        acp,
        aap,
        k: (acp * aap).sqrt(),
    })
}

/// Per-reference B-cubed precision and recall plus their means.
pub fn bcubed_scores<T: Eq + Hash + Ord + Clone>(
    pred: &[Vec<T>],
    gold: &[Vec<T>],
) -> Result<BCubedScores<T>> {
    let pred_assignment = cluster_assignment(pred, "pred")?;
    let gold_assignment = cluster_assignment(gold, "gold")?;
    check_same_items(&pred_assignment, &gold_assignment)?;
    if pred_assignment.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut per_reference = Vec::with_capacity(pred_assignment.len());
    for (item, &i) in &pred_assignment {
        let j = gold_assignment[item];
        let overlap = pred[i].iter().filter(|s| gold_assignment[*s] == j).count() as f64;
        let precision = overlap / pred[i].len() as f64;
        let recall = overlap / gold[j].len() as f64;
        per_reference.push((item.clone(), precision, recall));
    }
    per_reference.sort_by(|a, b| a.0.cmp(&b.0));

    let n = per_reference.len() as f64;
    let precision = per_reference.iter().map(|&(_, p, _)| p).sum::<f64>() / n;
    let recall = per_reference.iter().map(|&(_, _, r)| r).sum::<f64>() / n;
    Ok(BCubedScores {
        precision,
        recall,
        f1: harmonic(precision, recall),
        per_reference,
    })
}

/// Runs the full metric suite on one (pred, gold) partition pair.
pub fn evaluate<T: Eq + Hash + Ord + Clone>(
    pred: &[Vec<T>],
    gold: &[Vec<T>],
) -> Result<EvaluationReport> {
    let table = contingency_table(pred, gold)?;
    let confusion = confusion_from_table(&table)?;
    let pairwise = pairwise_scores(&confusion)?;
    let purity = purity_scores(&table)?;
    let b3 = bcubed_scores(pred, gold)?;
    Ok(EvaluationReport {
        references: table.total,
        confusion,
        accuracy: pairwise.accuracy,
        pp: pairwise.pp,
        pr: pairwise.pr,
        pf1: pairwise.pf1,
        acp: purity.acp,
        aap: purity.aap,
        k: purity.k,
        b3_precision: b3.precision,
        b3_recall: b3.recall,
        b3_f1: b3.f1,
        m_gold: table.m_gold,
        m_gen: table.m_gen,
        m_cor: table.m_cor,
    })
}
