//! `byline` — author name disambiguation from the command line.
//!
//! Subcommands mirror the pipeline stages: `ingest` validates and blocks a
//! JSONL corpus, `train` fits the likelihood-ratio model, `disambiguate`
//! scores/repairs/clusters every block, `evaluate` compares two cluster
//! files, and `inspect pair` prints the full scoring trace for one pair.
//!
//! Exit codes: 0 success, 1 usage error, 2 data validation error, 3
//! model or schema incompatibility.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use byline::corpus::Corpus;
use byline::inference::{estimate_prior, posterior};
use byline::pipeline::{self, clusters_to_jsonl, merges_to_jsonl, parse_clusters_jsonl};
use byline::profile::{compute_profile, ProfileSchema};
use byline::training::RatioModel;
use byline::{RefId, RunConfig};

mod report;
mod summary;

use report::{build_report_file, print_report_summary};
use summary::RunSummary;

#[derive(Parser)]
#[command(name = "byline", version, about = "Author name disambiguation for bibliographic corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize a JSONL corpus, then persist it with its blocks.
    Ingest {
        /// JSON Lines input, one citation record per line.
        #[arg(long)]
        input: PathBuf,
        /// Corpus store to write.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
    /// Auto-generate training pairs and fit the likelihood-ratio model.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Model file to write.
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
    /// Score, repair, and cluster every block of a corpus.
    Disambiguate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Clusters JSONL to write.
        #[arg(long)]
        output: PathBuf,
        /// Run summary path (default: `<output>.summary.json`).
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Also write per-block merge logs to this path.
        #[arg(long = "emit-merges", value_name = "PATH")]
        emit_merges: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigArgs,
    },
    /// Score a predicted clustering against a gold clustering.
    Evaluate {
        /// Predicted clusters (JSONL).
        #[arg(long)]
        pred: PathBuf,
        /// Gold clusters (JSONL).
        #[arg(long)]
        gold: PathBuf,
        /// Report JSON to write (also summarized on stdout).
        #[arg(long)]
        output: PathBuf,
        /// Include per-block breakdowns and their macro averages.
        #[arg(long = "per-block")]
        per_block: bool,
    },
    /// Diagnostic views of a trained pipeline.
    Inspect {
        #[command(subcommand)]
        what: InspectCommand,
    },
}

#[derive(Subcommand)]
enum InspectCommand {
    /// Print profile levels, r-value, prior, and posterior for one pair.
    Pair {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// First reference, as `<citation id>#<author position>`.
        #[arg(long = "ref-a")]
        ref_a: String,
        /// Second reference, same block as the first.
        #[arg(long = "ref-b")]
        ref_b: String,
    },
}

/// Config file plus flag overrides; flags win over the file, the file wins
/// over defaults.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// TOML config file with any subset of the run parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "min-count")]
    min_count: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Clustering stop threshold.
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long = "max-passes")]
    max_passes: Option<u32>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    threads: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                toml::from_str::<RunConfig>(&text).map_err(|e| {
                    CliError::Usage(format!("invalid config {}: {e}", path.display()))
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(alpha) = self.alpha {
            config.alpha = alpha;
        }
        if let Some(min_count) = self.min_count {
            config.min_count = min_count;
        }
        if let Some(delta) = self.delta {
            config.delta = delta;
        }
        if let Some(stop) = self.stop {
            config.stop_threshold = stop;
        }
        if let Some(max_passes) = self.max_passes {
            config.max_passes = max_passes;
        }
        if let Some(threads) = self.threads {
            config.thread_count = threads;
        }
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Data(String),
    Model(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Model(m) => m,
        }
    }
}

impl From<byline::Error> for CliError {
    fn from(err: byline::Error) -> Self {
        use byline::Error as E;
        match err {
            E::SchemaMismatch { .. } | E::FormatVersionUnsupported { .. } | E::CorruptModel(_) => {
                CliError::Model(err.to_string())
            }
            E::InvalidRefId(_) => CliError::Usage(err.to_string()),
            _ => CliError::Data(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { input, output, overrides } => cmd_ingest(&input, &output, &overrides),
        Command::Train { corpus, output, overrides } => cmd_train(&corpus, &output, &overrides),
        Command::Disambiguate {
            corpus,
            model,
            output,
            summary,
            emit_merges,
            overrides,
        } => cmd_disambiguate(&corpus, &model, &output, summary, emit_merges, &overrides),
        Command::Evaluate { pred, gold, output, per_block } => {
            cmd_evaluate(&pred, &gold, &output, per_block)
        }
        Command::Inspect { what } => match what {
            InspectCommand::Pair { corpus, model, ref_a, ref_b } => {
                cmd_inspect_pair(&corpus, &model, &ref_a, &ref_b)
            }
        },
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

/// Runs `op` on a pool with the configured thread count; 0 keeps the
/// default pool (one thread per core).
fn with_thread_pool<T: Send>(
    threads: usize,
    op: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    if threads == 0 {
        Ok(op())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Data(format!("cannot build thread pool: {e}")))?;
        Ok(pool.install(op))
    }
}

fn cmd_ingest(input: &Path, output: &Path, overrides: &ConfigArgs) -> Result<(), CliError> {
    let config = overrides.resolve()?;
    let text = read_file(input)?;
    let corpus = Corpus::ingest_jsonl(&text, config.popularity_thresholds)?;
    corpus.save(output)?;
    println!(
        "ingested {} records ({} references) into {} blocks -> {}",
        corpus.records().len(),
        corpus.reference_count(),
        corpus.blocks().len(),
        output.display()
    );
    Ok(())
}

fn cmd_train(corpus_path: &Path, output: &Path, overrides: &ConfigArgs) -> Result<(), CliError> {
    let config = overrides.resolve()?;
    let corpus = Corpus::load(corpus_path)?;
    let (model, stats) =
        with_thread_pool(config.thread_count, || pipeline::train(&corpus, &config))??;
    model.save(output)?;
    println!(
        "trained on {} match / {} non-match pairs (alpha {}, min_count {}) -> {}",
        stats.match_pairs,
        stats.nonmatch_pairs,
        config.alpha,
        config.min_count,
        output.display()
    );
    println!("model checksum: {}", model.checksum()?);
    Ok(())
}

fn cmd_disambiguate(
    corpus_path: &Path,
    model_path: &Path,
    output: &Path,
    summary_path: Option<PathBuf>,
    emit_merges: Option<PathBuf>,
    overrides: &ConfigArgs,
) -> Result<(), CliError> {
    let config = overrides.resolve()?;
    let corpus = Corpus::load(corpus_path)?;
    let model = RatioModel::load(model_path)?;

    let run = with_thread_pool(config.thread_count, || {
        pipeline::disambiguate(&corpus, &model, &config)
    })??;

    write_file(output, &clusters_to_jsonl(&run)?)?;
    if let Some(path) = emit_merges {
        write_file(&path, &merges_to_jsonl(&run)?)?;
    }

    let summary = RunSummary::build(&config, &corpus, &model, &run)?;
    let summary_path =
        summary_path.unwrap_or_else(|| PathBuf::from(format!("{}.summary.json", output.display())));
    write_file(&summary_path, &summary.to_json()?)?;

    println!(
        "disambiguated {} references in {} blocks into {} clusters -> {}",
        corpus.reference_count(),
        corpus.blocks().len(),
        run.cluster_count(),
        output.display()
    );
    println!("run summary -> {}", summary_path.display());
    Ok(())
}

fn cmd_evaluate(
    pred_path: &Path,
    gold_path: &Path,
    output: &Path,
    per_block: bool,
) -> Result<(), CliError> {
    let pred = parse_clusters_jsonl(&read_file(pred_path)?)?;
    let gold = parse_clusters_jsonl(&read_file(gold_path)?)?;
    let report = build_report_file(&pred, &gold, per_block)?;
    write_file(output, &serde_json::to_string_pretty(&report).map_err(byline::Error::from)?)?;
    print_report_summary(&report);
    println!("report -> {}", output.display());
    Ok(())
}

fn cmd_inspect_pair(
    corpus_path: &Path,
    model_path: &Path,
    ref_a: &str,
    ref_b: &str,
) -> Result<(), CliError> {
    let corpus = Corpus::load(corpus_path)?;
    let model = RatioModel::load(model_path)?;
    let a: RefId = ref_a.parse()?;
    let b: RefId = ref_b.parse()?;

    let schema = ProfileSchema::v1();
    let profile = compute_profile(&corpus, &a, &b, &schema)?;
    let r = model.r_value(&profile)?;
    let block = corpus.block_of(&a)?;
    let prior = estimate_prior(block, &corpus, &model, RunConfig::default().prior_p0)?;
    let post = posterior(r, prior.prior)?;

    #[derive(Serialize)]
    struct PairDiagnostic<'a> {
        ref_a: &'a RefId,
        ref_b: &'a RefId,
        block: &'a str,
        profile: BTreeMap<&'static str, u8>,
        levels: &'a [u8],
        r: f64,
        prior: f64,
        prior_iterations: u32,
        posterior: f64,
    }

    let named: BTreeMap<&'static str, u8> = profile
        .levels
        .iter()
        .enumerate()
        .map(|(d, &level)| (schema.dimension_name(d), level))
        .collect();
    let diagnostic = PairDiagnostic {
        ref_a: &a,
        ref_b: &b,
        block: &block.key,
        profile: named,
        levels: &profile.levels,
        r,
        prior: prior.prior,
        prior_iterations: prior.iterations_used,
        posterior: post,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&diagnostic).map_err(byline::Error::from)?
    );
    Ok(())
}

// used by integration tests to locate fixtures
#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_documented_flags() {
        Cli::try_parse_from([
            "byline",
            "disambiguate",
            "--corpus", "c.json",
            "--model", "m.json",
            "--output", "o.jsonl",
            "--seed", "7",
            "--delta", "0.05",
            "--stop", "0.5",
            "--alpha", "0.5",
            "--min-count", "5",
            "--max-passes", "10",
            "--threads", "2",
            "--emit-merges", "merges.jsonl",
        ])
        .unwrap();
        Cli::try_parse_from([
            "byline", "evaluate", "--pred", "p", "--gold", "g", "--output", "r", "--per-block",
        ])
        .unwrap();
        Cli::try_parse_from([
            "byline", "inspect", "pair", "--corpus", "c", "--model", "m", "--ref-a", "x#0",
            "--ref-b", "y#1",
        ])
        .unwrap();
    }

    #[test]
    fn flag_overrides_win_over_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "stop_threshold = 1.0\nseed = 9\n").unwrap();
        let args = ConfigArgs {
            config: Some(path),
            stop: Some(0.25),
            ..Default::default()
        };
        let config = args.resolve().unwrap();
        assert_eq!(config.stop_threshold, 0.25, "flag wins");
        assert_eq!(config.seed, 9, "file wins over default");
        assert_eq!(config.alpha, 0.5, "default survives");
    }

    #[test]
    fn invalid_config_is_a_usage_error() {
        let args = ConfigArgs {
            stop: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(args.resolve(), Err(CliError::Usage(_)) | Err(CliError::Data(_))));
    }
}
