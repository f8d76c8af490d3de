//! The run summary written next to every clusters file: the resolved
//! config, the model checksum, corpus shape, and per-block repair and prior
//! diagnostics. A run can be replayed from its summary alone.

use serde::Serialize;

use byline::corpus::Corpus;
use byline::pipeline::DisambiguationRun;
use byline::training::RatioModel;
use byline::RunConfig;

use crate::CliError;

pub const SUMMARY_FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
pub struct RunSummary {
    pub format_version: u64,
    pub config: RunConfig,
    pub model_checksum: String,
    pub corpus: CorpusStats,
    pub clusters: usize,
    pub repair: RepairSummary,
    pub priors: Vec<PriorEntry>,
}

#[derive(Serialize)]
pub struct CorpusStats {
    pub records: usize,
    pub references: usize,
    pub blocks: usize,
}

#[derive(Serialize)]
pub struct RepairSummary {
    pub violations_found: usize,
    pub repairs_applied: usize,
    pub residual_violations: usize,
    /// Only blocks where the repair loop actually ran a pass.
    pub blocks: Vec<BlockRepairEntry>,
}

#[derive(Serialize)]
pub struct BlockRepairEntry {
    pub block: String,
    pub passes: usize,
    pub violations_per_pass: Vec<usize>,
    pub repairs_per_pass: Vec<usize>,
    pub residual_violations: usize,
}

#[derive(Serialize)]
pub struct PriorEntry {
    pub block: String,
    pub prior: f64,
    pub iterations_used: u32,
}

impl RunSummary {
    pub fn build(
        config: &RunConfig,
        corpus: &Corpus,
        model: &RatioModel,
        run: &DisambiguationRun,
    ) -> Result<Self, CliError> {
        let mut repair = RepairSummary {
            violations_found: 0,
            repairs_applied: 0,
            residual_violations: 0,
            blocks: Vec::new(),
        };
        let mut priors = Vec::new();
        for outcome in &run.blocks {
            if let Some(prior) = &outcome.prior {
                priors.push(PriorEntry {
                    block: prior.block_key.clone(),
                    prior: prior.prior,
                    iterations_used: prior.iterations_used,
                });
            }
            if let Some(report) = &outcome.repair {
                repair.violations_found += report.total_violations_found();
                repair.repairs_applied += report.total_repairs();
                repair.residual_violations += report.residual_violations;
                if report.passes() > 0 {
                    repair.blocks.push(BlockRepairEntry {
                        block: report.block_key.clone(),
                        passes: report.passes(),
                        violations_per_pass: report.violations_per_pass.clone(),
                        repairs_per_pass: report.repairs_per_pass.clone(),
                        residual_violations: report.residual_violations,
                    });
                }
            }
        }
        Ok(RunSummary {
            format_version: SUMMARY_FORMAT_VERSION,
            config: config.clone(),
            model_checksum: model.checksum()?,
            corpus: CorpusStats {
                records: corpus.records().len(),
                references: corpus.reference_count(),
                blocks: corpus.blocks().len(),
            },
            clusters: run.cluster_count(),
            repair,
            priors,
        })
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Data(e.to_string()))
    }
}
