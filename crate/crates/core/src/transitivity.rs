//! Transitivity-violation detection and weighted-least-squares repair.
//!
//! For three references, two high pairwise probabilities logically bound the
//! third from below: a triplet violates transitivity when
//! `P_ij + P_jk - 1 > P_ik + delta` with `P_ik` the smallest of the three
//! edges. A violating triplet is projected onto the boundary
//! `Q_ik = Q_ij + Q_jk - 1`, minimizing the weighted squared movement with
//! weights `W = 1/(P(1-P))`; the closed form moves each edge by `lambda/W`,
//! so low-confidence edges (probabilities near 0.5) absorb most of the
//! correction.

use serde::{Deserialize, Serialize};

use crate::corpus::RefId;
use crate::inference::{PairProbabilityMatrix, POSTERIOR_CLAMP};
use crate::{Error, Result};

/// A triplet whose probabilities are logically inconsistent. The `(i, j, k)`
/// labeling puts the smallest edge on `(i, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletViolation {
    pub refs: (RefId, RefId, RefId),
    /// Matrix indices of (i, j, k) in the same order as `refs`.
    pub indices: (usize, usize, usize),
    /// `P_ij + P_jk - 1 - P_ik`, strictly greater than delta at detection.
    pub magnitude: f64,
}

/// Knobs for the repair loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairConfig {
    /// Slack below which a triplet is considered consistent.
    pub delta: f64,
    /// Maximum detect-and-repair passes over a block.
    pub max_passes: u32,
    /// From pass 2 onward the weight of each violating triplet's smallest
    /// probability is multiplied by this factor, letting the low edge move
    /// more.
    pub low_weight_factor: f64,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            delta: 0.05,
            max_passes: 10,
            low_weight_factor: 0.5,
        }
    }
}

/// Per-pass counts plus the residual violations left when the loop stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    pub block_key: String,
    /// Violations found at the start of each executed pass.
    pub violations_per_pass: Vec<usize>,
    /// Repairs actually applied (lambda > 0) per pass.
    pub repairs_per_pass: Vec<usize>,
    /// Violations remaining after the final pass.
    pub residual_violations: usize,
}

impl RepairReport {
    pub fn passes(&self) -> usize {
        self.violations_per_pass.len()
    }

    pub fn total_violations_found(&self) -> usize {
        self.violations_per_pass.iter().sum()
    }

    pub fn total_repairs(&self) -> usize {
        self.repairs_per_pass.iter().sum()
    }
}

/// Enumerates all violating triplets, each reported once with its smallest
/// edge bound to `(i, k)`, sorted by descending magnitude then by reference
/// ids.
pub fn detect_violations(
    matrix: &PairProbabilityMatrix,
    delta: f64,
) -> Vec<TripletViolation> {
    let n = matrix.len();
    let mut violations = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                if let Some(v) = check_triplet(matrix, a, b, c, delta) {
                    violations.push(v);
                }
            }
        }
    }
    violations.sort_by(|x, y| {
        y.magnitude
            .partial_cmp(&x.magnitude)
            .expect("magnitudes are finite")
            .then_with(|| x.refs.cmp(&y.refs))
    });
    violations
}

/// Tests one triplet; binds the smallest edge to (i, k), ties broken by
/// preferring the earliest edge in (a,b), (a,c), (b,c) order.
fn check_triplet(
    matrix: &PairProbabilityMatrix,
    a: usize,
    b: usize,
    c: usize,
    delta: f64,
) -> Option<TripletViolation> {
    let edges = [(a, b, c), (a, c, b), (b, c, a)]; // (i, k, j): edge (i,k) vs. opposite vertex j
    let mut low = edges[0];
    let mut low_p = matrix.get(low.0, low.1);
    for &e in &edges[1..] {
        let p = matrix.get(e.0, e.1);
        if p < low_p {
            low = e;
            low_p = p;
        }
    }
    let (i, k, j) = low;
    let p_ij = matrix.get(i, j);
    let p_jk = matrix.get(j, k);
    let magnitude = p_ij + p_jk - 1.0 - low_p;
    if magnitude > delta {
        Some(TripletViolation {
            refs: (
                matrix.ref_ids[i].clone(),
                matrix.ref_ids[j].clone(),
                matrix.ref_ids[k].clone(),
            ),
            indices: (i, j, k),
            magnitude,
        })
    } else {
        None
    }
}

/// Projects one violating triplet onto the boundary `Q_ik = Q_ij + Q_jk - 1`.
///
/// With `lambda = (P_ij + P_jk - P_ik - 1) / (1/W_ij + 1/W_jk + 1/W_ik)` the
/// minimizer of the weighted squared movement lowers the two high edges by
/// `lambda/W` and raises the low edge by `lambda/W_ik`. When `lambda <= 0`
/// the boundary is inactive and the inputs come back unchanged.
pub fn repair_triplet(
    p_ij: f64,
    p_jk: f64,
    p_ik: f64,
    w_ij: f64,
    w_jk: f64,
    w_ik: f64,
) -> Result<(f64, f64, f64)> {
    for (name, w) in [("W_ij", w_ij), ("W_jk", w_jk), ("W_ik", w_ik)] {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::DomainError(format!(
                "{name} must be positive and finite, got {w}"
            )));
        }
    }
    let lambda = (p_ij + p_jk - p_ik - 1.0) / (1.0 / w_ij + 1.0 / w_jk + 1.0 / w_ik);
    if lambda <= 0.0 {
        return Ok((p_ij, p_jk, p_ik));
    }
    let (lo, hi) = POSTERIOR_CLAMP;
    Ok((
        (p_ij - lambda / w_ij).clamp(lo, hi),
        (p_jk - lambda / w_jk).clamp(lo, hi),
        (p_ik + lambda / w_ik).clamp(lo, hi),
    ))
}

/// The weight of a probability: the inverse variance of a Bernoulli outcome
/// at that probability, so confident edges resist movement.
pub fn weight(p: f64) -> f64 {
    1.0 / (p * (1.0 - p))
}

/// Repeatedly detects and repairs violations until a pass finds none or
/// `max_passes` is reached. Remaining violations are reported, not raised.
pub fn repair_block(
    matrix: &mut PairProbabilityMatrix,
    config: &RepairConfig,
) -> Result<RepairReport> {
    let mut report = RepairReport {
        block_key: matrix.block_key.clone(),
        violations_per_pass: Vec::new(),
        repairs_per_pass: Vec::new(),
        residual_violations: 0,
    };

    for pass in 1..=config.max_passes {
        let violations = detect_violations(matrix, config.delta);
        if violations.is_empty() {
            report.residual_violations = 0;
            return Ok(report);
        }
        report.violations_per_pass.push(violations.len());

        let mut repairs = 0usize;
        for violation in &violations {
            let (i, j, k) = violation.indices;
            // current values: earlier repairs in this pass may have moved them
            let p_ij = matrix.get(i, j);
            let p_jk = matrix.get(j, k);
            let p_ik = matrix.get(i, k);
            let mut w_ij = weight(p_ij);
            let mut w_jk = weight(p_jk);
            let mut w_ik = weight(p_ik);
            if pass >= 2 {
                // soften the smallest probability's resistance
                let min_p = p_ij.min(p_jk).min(p_ik);
                if p_ij == min_p {
                    w_ij *= config.low_weight_factor;
                } else if p_jk == min_p {
                    w_jk *= config.low_weight_factor;
                } else {
                    w_ik *= config.low_weight_factor;
                }
            }
            let (q_ij, q_jk, q_ik) = repair_triplet(p_ij, p_jk, p_ik, w_ij, w_jk, w_ik)?;
            if q_ij != p_ij || q_jk != p_jk || q_ik != p_ik {
                repairs += 1;
            }
            matrix.set(i, j, q_ij);
            matrix.set(j, k, q_jk);
            matrix.set(i, k, q_ik);
        }
        report.repairs_per_pass.push(repairs);
    }

    report.residual_violations = detect_violations(matrix, config.delta).len();
    Ok(report)
}
