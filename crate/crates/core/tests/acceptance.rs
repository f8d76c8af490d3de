//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use byline::clustering::agglomerate;
use byline::corpus::{Corpus, RefId, DEFAULT_POPULARITY_THRESHOLDS};
use byline::inference::{posterior, PairProbabilityMatrix};
use byline::metrics::{bcubed_scores, contingency_table, evaluate, pair_confusion, pairwise_scores, purity_scores};
use byline::pipeline::{self, clusters_to_jsonl};
use byline::synth::{generate, SynthConfig};
use byline::transitivity::{detect_violations, repair_block, repair_triplet, weight, RepairConfig};
use byline::RunConfig;

fn criterion(number: u32, name: &str, ok: bool) {
    println!(
        "acceptance criterion {number} ({name}): {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {number} ({name}) failed");
}

// -----------------------------------------------------------------------
// 1. Bayes correctness on a 50x50 grid
// -----------------------------------------------------------------------
#[test]
fn criterion_1_bayes_correctness() {
    let start = Instant::now();
    let rs: Vec<f64> = (0..50)
        .map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0)) // 0.01 .. 100
        .collect();
    let ps: Vec<f64> = (0..50).map(|i| 0.05 + 0.90 * i as f64 / 49.0).collect();

    let mut ok = true;
    let mut grid = vec![vec![0.0; 50]; 50];
    for (i, &r) in rs.iter().enumerate() {
        for (j, &p) in ps.iter().enumerate() {
            let got = posterior(r, p).unwrap();
            let expected = r * p / (r * p + 1.0 - p);
            ok &= (got - expected).abs() <= 1e-12;
            grid[i][j] = got;
        }
    }
    // monotone in r for fixed p, and in p for fixed r
    for i in 0..50 {
        for j in 0..49 {
            ok &= grid[i][j] <= grid[i][j + 1];
            ok &= grid[j][i] <= grid[j + 1][i];
        }
    }
    ok &= start.elapsed().as_secs_f64() < 1.0;
    criterion(1, "bayes correctness", ok);
}

// -----------------------------------------------------------------------
// 2. WLS repair against a brute-force grid minimizer
// -----------------------------------------------------------------------

/// Independent oracle: minimizes the weighted-least-squares objective over
/// the constraint surface q_ik = q_ij + q_jk - 1 by coarse-to-fine grid
/// search, final step 1e-4. The objective is strictly convex, so refining
/// around the best coarse cell keeps the global minimum in the window.
fn grid_minimizer(p: (f64, f64, f64), w: (f64, f64, f64)) -> (f64, f64, f64) {
    let objective = |q1: f64, q2: f64| {
        let q3 = q1 + q2 - 1.0;
        w.0 * (p.0 - q1).powi(2) + w.1 * (p.1 - q2).powi(2) + w.2 * (p.2 - q3).powi(2)
    };
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let scan = |lo1: f64, hi1: f64, lo2: f64, hi2: f64, step: f64, best: &mut (f64, f64, f64)| {
        let n1 = ((hi1 - lo1) / step).round() as usize;
        let n2 = ((hi2 - lo2) / step).round() as usize;
        for i in 0..=n1 {
            let q1 = lo1 + i as f64 * step;
            for j in 0..=n2 {
                let q2 = lo2 + j as f64 * step;
                let q3 = q1 + q2 - 1.0;
                if !(q1 > 0.0 && q1 < 1.0 && q2 > 0.0 && q2 < 1.0 && q3 > 0.0 && q3 < 1.0) {
                    continue;
                }
                let value = objective(q1, q2);
                if value < best.0 {
                    *best = (value, q1, q2);
                }
            }
        }
    };
    scan(0.005, 0.995, 0.005, 0.995, 1e-2, &mut best);
    for step in [1e-3, 1e-4] {
        let window = 15.0 * step;
        let (q1, q2) = (best.1, best.2);
        best.0 = f64::INFINITY;
        scan(q1 - window, q1 + window, q2 - window, q2 + window, step, &mut best);
    }
    (best.1, best.2, best.1 + best.2 - 1.0)
}

#[test]
fn criterion_2_wls_repair_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_815);
    let mut ok = true;

    for _ in 0..100 {
        let p_ij = rng.random_range(0.75..0.99);
        let p_jk = rng.random_range(0.75..0.99);
        let p_ik = rng.random_range(0.05..0.45);
        assert!(p_ij + p_jk - 1.0 > p_ik + 0.05, "triplet violates by construction");
        let w = (weight(p_ij), weight(p_jk), weight(p_ik));
        let got = repair_triplet(p_ij, p_jk, p_ik, w.0, w.1, w.2).unwrap();
        let oracle = grid_minimizer((p_ij, p_jk, p_ik), w);
        ok &= (got.0 - oracle.0).abs() <= 1e-3;
        ok &= (got.1 - oracle.1).abs() <= 1e-3;
        ok &= (got.2 - oracle.2).abs() <= 1e-3;
    }

    // worked example to five decimals
    let (q_ij, q_jk, q_ik) =
        repair_triplet(0.9, 0.9, 0.5, weight(0.9), weight(0.9), weight(0.5)).unwrap();
    ok &= (q_ij - 0.83721).abs() < 5e-6;
    ok &= (q_jk - 0.83721).abs() < 5e-6;
    ok &= (q_ik - 0.67442).abs() < 5e-6;

    ok &= start.elapsed().as_secs_f64() < 30.0;
    criterion(2, "wls repair oracle", ok);
}

// -----------------------------------------------------------------------
// 3. Transitivity elimination on fuzzed matrices
// -----------------------------------------------------------------------

/// Shadow implementation of the repair loop built from the public pieces,
/// asserting the boundary condition after every individual repair.
fn shadow_repair(
    matrix: &mut PairProbabilityMatrix,
    config: &RepairConfig,
) -> (Vec<usize>, bool) {
    let mut per_pass = Vec::new();
    let mut boundary_ok = true;
    for pass in 1..=config.max_passes {
        let violations = detect_violations(matrix, config.delta);
        if violations.is_empty() {
            break;
        }
        per_pass.push(violations.len());
        for violation in &violations {
            let (i, j, k) = violation.indices;
            let p_ij = matrix.get(i, j);
            let p_jk = matrix.get(j, k);
            let p_ik = matrix.get(i, k);
            let mut w_ij = weight(p_ij);
            let mut w_jk = weight(p_jk);
            let mut w_ik = weight(p_ik);
            if pass >= 2 {
                let min_p = p_ij.min(p_jk).min(p_ik);
                if p_ij == min_p {
                    w_ij *= config.low_weight_factor;
                } else if p_jk == min_p {
                    w_jk *= config.low_weight_factor;
                } else {
                    w_ik *= config.low_weight_factor;
                }
            }
            let (q_ij, q_jk, q_ik) = repair_triplet(p_ij, p_jk, p_ik, w_ij, w_jk, w_ik).unwrap();
            matrix.set(i, j, q_ij);
            matrix.set(j, k, q_jk);
            matrix.set(i, k, q_ik);
            // the triplet just repaired satisfies the delta-slack condition
            boundary_ok &= q_ij + q_jk - 1.0 <= q_ik + config.delta;
        }
    }
    (per_pass, boundary_ok)
}

#[test]
fn criterion_3_transitivity_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(31_337);
    let config = RepairConfig::default();
    let mut ok = true;

    for case in 0..1000 {
        let ids: Vec<RefId> = (0..5).map(|i| RefId::new(format!("r{i}"), 0)).collect();
        let probs: Vec<f64> = (0..10).map(|_| rng.random_range(0.01..0.99)).collect();
        let mut matrix = PairProbabilityMatrix::new(format!("f{case}"), ids, probs);
        let mut shadow = matrix.clone();

        let report = repair_block(&mut matrix, &config).unwrap();
        let (shadow_passes, boundary_ok) = shadow_repair(&mut shadow, &config);

        ok &= boundary_ok;
        ok &= shadow == matrix; // loop replays exactly from public pieces
        ok &= shadow_passes == report.violations_per_pass;
        for w in report.violations_per_pass.windows(2) {
            ok &= w[1] <= w[0];
        }
    }
    criterion(3, "transitivity elimination", ok);
}

// -----------------------------------------------------------------------
// 4. Metric identities
// -----------------------------------------------------------------------
#[test]
fn criterion_4_metric_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(4_000);
    let mut ok = true;

    for _ in 0..500 {
        let n = rng.random_range(2..=30usize);
        let mut pred: Vec<Vec<u32>> = Vec::new();
        let mut gold: Vec<Vec<u32>> = Vec::new();
        let mut pred_map = std::collections::BTreeMap::new();
        let mut gold_map = std::collections::BTreeMap::new();
        for item in 0..n as u32 {
            pred_map
                .entry(rng.random_range(0..8u8))
                .or_insert_with(Vec::new)
                .push(item);
            gold_map
                .entry(rng.random_range(0..8u8))
                .or_insert_with(Vec::new)
                .push(item);
        }
        pred.extend(pred_map.into_values());
        gold.extend(gold_map.into_values());

        let b3 = bcubed_scores(&pred, &gold).unwrap();
        let purity = purity_scores(&contingency_table(&pred, &gold).unwrap()).unwrap();
        ok &= (b3.precision - purity.acp).abs() <= 1e-12;
        ok &= (b3.recall - purity.aap).abs() <= 1e-12;

        let confusion = pair_confusion(&pred, &gold).unwrap();
        let n = n as u64;
        ok &= confusion.s == n * (n - 1) / 2;
        ok &= confusion.s == confusion.tp + confusion.tn + confusion.fp + confusion.fn_;
    }

    // hand-worked fixture
    let pred: Vec<Vec<&str>> = vec![vec!["a", "b"], vec!["c", "d", "e"]];
    let gold: Vec<Vec<&str>> = vec![vec!["a", "b", "c"], vec!["d", "e"]];
    let confusion = pair_confusion(&pred, &gold).unwrap();
    let scores = pairwise_scores(&confusion).unwrap();
    let purity = purity_scores(&contingency_table(&pred, &gold).unwrap()).unwrap();
    ok &= (scores.accuracy - 0.6).abs() <= 1e-12;
    ok &= (scores.pp - 0.5).abs() <= 1e-12;
    ok &= (scores.pr - 0.5).abs() <= 1e-12;
    ok &= (scores.pf1 - 0.5).abs() <= 1e-12;
    ok &= (purity.acp - 11.0 / 15.0).abs() <= 1e-12;
    ok &= (purity.aap - 11.0 / 15.0).abs() <= 1e-12;
    ok &= (purity.k - 11.0 / 15.0).abs() <= 1e-12;

    criterion(4, "metric identities", ok);
}

// -----------------------------------------------------------------------
// 5. Clustering traces
// -----------------------------------------------------------------------
#[test]
fn criterion_5_clustering_traces() {
    let matrix = |probs: Vec<f64>| {
        let ids: Vec<RefId> = (1..=3).map(|i| RefId::new(format!("c{i}"), 0)).collect();
        PairProbabilityMatrix::new("k".to_string(), ids, probs)
    };
    let mut ok = true;

    // (q12, q13, q23) = (0.9, 0.8, 0.7): merge {1,2} at 0.9, then {3} at ~0.7534
    let all = agglomerate(&matrix(vec![0.9, 0.8, 0.7]), 0.5);
    ok &= all.clusters.len() == 1;
    ok &= all.merges.len() == 2;
    ok &= (all.merges[0].probability - 0.9).abs() <= 1e-12;
    let expected = {
        let odds = (4.0f64 * (0.7 / 0.3)).sqrt();
        odds / (1.0 + odds)
    };
    ok &= (all.merges[1].probability - expected).abs() <= 1e-12;
    ok &= (all.merges[1].probability - 0.7534).abs() <= 1e-4;

    // (0.9, 0.1, 0.1): one merge then stop at linkage 0.1 < 0.5
    let split = agglomerate(&matrix(vec![0.9, 0.1, 0.1]), 0.5);
    ok &= split.clusters
        == vec![
            vec![RefId::new("c1", 0), RefId::new("c2", 0)],
            vec![RefId::new("c3", 0)],
        ];
    ok &= split.merges.len() == 1;

    // threshold extremes
    ok &= agglomerate(&matrix(vec![0.9, 0.8, 0.7]), 1.0).clusters.len() == 3;
    ok &= agglomerate(&matrix(vec![0.2, 0.1, 0.1]), 0.0).clusters.len() == 1;

    criterion(5, "clustering traces", ok);
}

// -----------------------------------------------------------------------
// 6. End-to-end synthetic benchmark
// -----------------------------------------------------------------------
#[test]
fn criterion_6_end_to_end_benchmark() {
    let start = Instant::now();
    let synth = generate(&SynthConfig::default());
    let corpus = Corpus::ingest_jsonl(&synth.jsonl, DEFAULT_POPULARITY_THRESHOLDS).unwrap();
    let config = RunConfig::default();

    let (model, _) = pipeline::train(&corpus, &config).unwrap();
    let run = pipeline::disambiguate(&corpus, &model, &config).unwrap();

    let pred: Vec<Vec<RefId>> = run
        .blocks
        .iter()
        .flat_map(|b| b.clustering.clusters.iter().cloned())
        .collect();
    let gold: Vec<Vec<RefId>> = synth.gold.iter().map(|c| c.refs.clone()).collect();
    let report = evaluate(&pred, &gold).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    println!(
        "  benchmark: K = {:.4}, PF1 = {:.4}, ACP = {:.4}, AAP = {:.4}, {} pred / {} gold clusters, {elapsed:.1}s",
        report.k, report.pf1, report.acp, report.aap, report.m_gen, report.m_gold
    );
    let ok = report.k >= 0.90 && report.pf1 >= 0.90 && elapsed < 60.0;
    criterion(6, "end-to-end synthetic benchmark", ok);
}

// -----------------------------------------------------------------------
// 7. Determinism across thread counts
// -----------------------------------------------------------------------
#[test]
fn criterion_7_thread_determinism() {
    let synth = generate(&SynthConfig {
        citations: 300,
        ..Default::default()
    });
    let corpus = Corpus::ingest_jsonl(&synth.jsonl, DEFAULT_POPULARITY_THRESHOLDS).unwrap();
    let config = RunConfig::default();

    let run_with_threads = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let (model, _) = pipeline::train(&corpus, &config).unwrap();
            let run = pipeline::disambiguate(&corpus, &model, &config).unwrap();
            clusters_to_jsonl(&run).unwrap()
        })
    };

    let single = run_with_threads(1);
    let multi = run_with_threads(4);
    let ok = single == multi && !single.is_empty();
    criterion(7, "thread determinism", ok);
}
