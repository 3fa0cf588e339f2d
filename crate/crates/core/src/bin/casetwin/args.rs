//! Argument definitions and config-file merging.
//!
//! Every tunable flag is optional at the clap level; resolution order is
//! explicit flag, then `--config` file value (keys mirror the long flag
//! names), then the built-in default.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Version string embedding the report schema version.
pub fn version_string() -> &'static str {
    static VERSION: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    VERSION.get_or_init(|| {
        format!(
            "{} (report schema {})",
            env!("CARGO_PKG_VERSION"),
            casetwin::report::REPORT_SCHEMA_VERSION
        )
    })
}

#[derive(Debug, Parser)]
#[command(
    name = "casetwin",
    version = version_string(),
    about = "Twin-system explanations: an opaque network paired with a transparent case base"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for all randomness in this invocation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output path (default depends on the subcommand).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON config file; keys mirror the long flag names.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the report to stdout instead of only the output path.
    #[arg(long, global = true)]
    pub stdout: bool,

    /// Cap on worker threads for internally parallel work.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the feed-forward twin on a tabular CSV dataset.
    Train(TrainArgs),
    /// Generate explanations for one query.
    #[command(subcommand)]
    Explain(ExplainCommand),
    /// Generate synthetic cases for a designated class.
    Augment(AugmentArgs),
    /// Evaluation harnesses.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Seeded synthetic datasets.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label column name.
    #[arg(long)]
    pub label: Option<String>,
    /// Optional schema sidecar JSON overriding inferred column kinds.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Train a regression head on a continuous target column.
    #[arg(long)]
    pub regression: bool,
    /// Treat --data as a series TSV (label in column 1); --label is ignored.
    #[arg(long)]
    pub series: bool,
    /// Hidden layer widths, comma separated (e.g. 16 or 16,8).
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ExplainCommand {
    /// Nearest same-predicted-class cases in contribution space.
    Factual(FactualArgs),
    /// Counterfactual: case-based adaptation or the gradient baseline.
    Cf(CfArgs),
    /// Semi-factual and counterfactual from exceptional latent features.
    Sf(SfArgs),
    /// Time-series counterfactual from the NUN and occlusion importance.
    TsCf(TsCfArgs),
}

#[derive(Debug, Args)]
pub struct FactualArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    /// Row index of the query within the data file.
    #[arg(long)]
    pub query_index: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Keep the query itself among the candidates (off by default for
    /// in-sample queries).
    #[arg(long)]
    pub include_self: bool,
    /// Retrieve regression factuals (requires a regression model).
    #[arg(long)]
    pub regression: bool,
}

#[derive(Debug, Args)]
pub struct CfArgs {
    /// casebased | wachter
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub query_index: Option<usize>,
    /// Numeric match threshold on the normalized range.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Target class (label or index); defaults to the other class in binary
    /// problems for the wachter method, any flip for casebased.
    #[arg(long)]
    pub target_class: Option<String>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub lambda_init: Option<f64>,
    #[arg(long)]
    pub lambda_double_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SfArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub query_index: Option<usize>,
    /// Target (counterfactual) class, label or index.
    #[arg(long)]
    pub target_class: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TsCfArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Series TSV (label in column 1).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub query_index: Option<usize>,
    #[arg(long)]
    pub occlusion_window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// cf | smote
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub target_class: Option<String>,
    /// Number of synthetic cases to generate.
    #[arg(long)]
    pub count: Option<usize>,
    /// Trained model (required for the cf method).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Twin fidelity of case-base retrieval against the model.
    Fidelity(FidelityArgs),
    /// Retrain-and-compare augmentation variants on a holdout.
    Augment(EvalAugmentArgs),
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalAugmentArgs {
    /// Base training CSV.
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Comma-separated augmented variant CSVs.
    #[arg(long)]
    pub variants: Option<String>,
    /// Holdout CSV, disjoint from every training variant.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Optional flat CSV export of the comparison table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Gaussian blobs, one per class mean.
    Blobs(BlobsArgs),
    /// Two-regime imbalanced dataset (majority normal, minority outlier).
    Imbalanced(ImbalancedArgs),
    /// Series dataset: noise vs noise-plus-bump.
    Series(SeriesArgs),
}

#[derive(Debug, Args)]
pub struct BlobsArgs {
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub dims: Option<usize>,
    /// Class means: semicolon-separated vectors, e.g. "0,0;5,5".
    #[arg(long)]
    pub means: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ImbalancedArgs {
    #[arg(long)]
    pub majority: Option<usize>,
    #[arg(long)]
    pub minority: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[arg(long)]
    pub length: Option<usize>,
}

/// Values loaded from `--config`; flag values override these.
#[derive(Debug, Default)]
pub struct ConfigFile {
    map: serde_json::Map<String, serde_json::Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| format!("config '{}' is not valid JSON: {e}", path.display()))?;
        match value {
            serde_json::Value::Object(map) => Ok(Self { map }),
            _ => Err(format!("config '{}' must be a JSON object", path.display())),
        }
    }

    fn get(&self, key: &str) -> Option<&serde_json::Value> {
        // Accept both kebab-case (flag spelling) and snake_case keys.
        self.map.get(key).or_else(|| self.map.get(&key.replace('-', "_")))
    }

    pub fn u64(&self, key: &str) -> Option<u64> {
        self.get(key).and_then(|v| v.as_u64())
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|v| v.as_u64()).map(|v| v as usize)
    }

    pub fn f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(|v| v.as_f64())
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.get(key).and_then(|v| v.as_str()).map(str::to_string)
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.string(key).map(PathBuf::from)
    }
}

/// Parse "16,8" into hidden layer widths.
pub fn parse_hidden(s: &str) -> Result<Vec<usize>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid hidden layer width '{part}'"))
        })
        .collect()
}

/// Parse "0,0;5,5" into class mean vectors.
pub fn parse_means(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';')
        .map(|vector| {
            vector
                .split(',')
                .map(|part| {
                    part.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("invalid mean component '{part}'"))
                })
                .collect()
        })
        .collect()
}
