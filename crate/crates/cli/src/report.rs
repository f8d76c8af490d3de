//! Evaluation report assembly: the overall metric suite, optional per-block
//! breakdowns, and their unweighted macro averages.

use std::collections::BTreeMap;

use serde::Serialize;

use byline::metrics::{evaluate, EvaluationReport};
use byline::pipeline::ClusterLine;
use byline::RefId;

use crate::CliError;

pub const REPORT_FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
pub struct ReportFile {
    pub format_version: u64,
    pub parameters: ReportParameters,
    /// Micro scores: counts pooled over the whole reference set.
    pub overall: EvaluationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_block: Option<BTreeMap<String, EvaluationReport>>,
    /// Unweighted means of the per-block scores (blocks with at least two
    /// references).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_averages: Option<MacroAverages>,
}

#[derive(Serialize)]
pub struct ReportParameters {
    pub per_block: bool,
}

#[derive(Serialize, Default)]
pub struct MacroAverages {
    pub blocks: usize,
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
}

fn partitions(lines: &[ClusterLine]) -> Vec<Vec<RefId>> {
    lines.iter().map(|l| l.refs.clone()).collect()
}

fn group_by_block(lines: &[ClusterLine]) -> BTreeMap<&str, Vec<Vec<RefId>>> {
    let mut map: BTreeMap<&str, Vec<Vec<RefId>>> = BTreeMap::new();
    for line in lines {
        map.entry(line.block.as_str()).or_default().push(line.refs.clone());
    }
    map
}

pub fn build_report_file(
    pred: &[ClusterLine],
    gold: &[ClusterLine],
    per_block: bool,
) -> Result<ReportFile, CliError> {
    let overall = evaluate(&partitions(pred), &partitions(gold))?;

    let (per_block_reports, macro_averages) = if per_block {
        let pred_blocks = group_by_block(pred);
        let gold_blocks = group_by_block(gold);
        let keys: Vec<&str> = pred_blocks
            .keys()
            .chain(gold_blocks.keys())
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();

        let empty: Vec<Vec<RefId>> = Vec::new();
        let mut reports = BTreeMap::new();
        for key in keys {
            let p = pred_blocks.get(key).unwrap_or(&empty);
            let g = gold_blocks.get(key).unwrap_or(&empty);
            let refs: usize = p.iter().map(|c| c.len()).sum();
            let gold_refs: usize = g.iter().map(|c| c.len()).sum();
            if refs != gold_refs {
                return Err(CliError::Data(format!(
                    "block '{key}': pred has {refs} references, gold has {gold_refs}"
                )));
            }
            if refs < 2 {
                continue; // no pairs to score
            }
            let report = evaluate(p, g).map_err(|e| {
                CliError::Data(format!("block '{key}': {e}"))
            })?;
            reports.insert(key.to_string(), report);
        }
        let averages = macro_average(&reports);
        (Some(reports), Some(averages))
    } else {
        (None, None)
    };

    Ok(ReportFile {
        format_version: REPORT_FORMAT_VERSION,
        parameters: ReportParameters { per_block },
        overall,
        per_block: per_block_reports,
        macro_averages,
    })
}

fn macro_average(reports: &BTreeMap<String, EvaluationReport>) -> MacroAverages {
    let mut avg = MacroAverages {
        blocks: reports.len(),
        ..Default::default()
    };
    if reports.is_empty() {
        return avg;
    }
    let n = reports.len() as f64;
    for r in reports.values() {
        avg.accuracy += r.accuracy;
        avg.pp += r.pp;
        avg.pr += r.pr;
        avg.pf1 += r.pf1;
        avg.acp += r.acp;
        avg.aap += r.aap;
        avg.k += r.k;
        avg.b3_precision += r.b3_precision;
        avg.b3_recall += r.b3_recall;
        avg.b3_f1 += r.b3_f1;
    }
    for field in [
        &mut avg.accuracy,
        &mut avg.pp,
        &mut avg.pr,
        &mut avg.pf1,
        &mut avg.acp,
        &mut avg.aap,
        &mut avg.k,
        &mut avg.b3_precision,
        &mut avg.b3_recall,
        &mut avg.b3_f1,
    ] {
        *field /= n;
    }
    avg
}

pub fn print_report_summary(report: &ReportFile) {
    let r = &report.overall;
    println!(
        "references {}  clusters pred {} / gold {} / exact {}",
        r.references, r.m_gen, r.m_gold, r.m_cor
    );
    println!(
        "pairwise   accuracy {:.4}  pp {:.4}  pr {:.4}  pf1 {:.4}",
        r.accuracy, r.pp, r.pr, r.pf1
    );
    println!("purity     acp {:.4}  aap {:.4}  k {:.4}", r.acp, r.aap, r.k);
    println!(
        "b-cubed    precision {:.4}  recall {:.4}  f1 {:.4}",
        r.b3_precision, r.b3_recall, r.b3_f1
    );
    if let Some(averages) = &report.macro_averages {
        println!(
            "macro      pf1 {:.4}  k {:.4}  b3 f1 {:.4}  over {} blocks",
            averages.pf1, averages.k, averages.b3_f1, averages.blocks
        );
    }
}
