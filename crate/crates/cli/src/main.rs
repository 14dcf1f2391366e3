//! `infodemic`: ingest, featurize, train, evaluate and serve from one binary.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "infodemic", version, about = "Misinformation detection pipelines")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn", env = "INFODEMIC_LOG")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Schema {
    Auto,
    Dataset1,
    Dataset2,
    Constraint,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InputKind {
    /// Tweet features (needs Dataset I rows or a feature CSV).
    Features,
    /// Raw text through preprocessing and TF-IDF.
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    Cosine,
    Euclidean,
}

#[derive(Args, Clone, Debug)]
pub struct SeedArg {
    /// Seed for every random choice; echoed into artifacts.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset file and rewrite it in the canonical layout.
    Ingest {
        #[arg(long, value_enum, default_value = "auto")]
        schema: Schema,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write train/val/test files, e.g. `0.6,0.2,0.2`.
        #[arg(long)]
        split: Option<String>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Normalize texts; writes `id,verdict,processed`.
    Preprocess {
        #[arg(long, value_enum, default_value = "auto")]
        schema: Schema,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the 43 tweet features into a feature CSV.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Recursive feature elimination with a random forest.
    Select {
        /// Feature CSV or Dataset I file.
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicons: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Two-component PCA coordinates of standardized features.
    Pca {
        #[arg(long)]
        features: PathBuf,
        /// Restrict to the features kept by `select`.
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Train one model and save its artifact.
    Train(commands::TrainArgs),
    /// Exhaustive grid search scored by validation F1.
    Gridsearch(commands::GridArgs),
    /// Score a saved model on labeled data.
    Evaluate {
        #[arg(long, required = true)]
        model: Vec<PathBuf>,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        schema: Schema,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Report file; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "test")]
        dataset_tag: String,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Predict with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in", conflicts_with = "text")]
        input: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        schema: Schema,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Classify a text by weighted voting over its most similar labeled texts.
    Similar {
        #[arg(long, value_enum, default_value = "cosine")]
        metric: MetricArg,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        embeddings: PathBuf,
        /// Labeled dataset used as the reference index.
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        index_schema: Schema,
        #[arg(long)]
        text: String,
    },
    /// Validation error for each K; writes `k,error` CSV.
    TuneK {
        #[arg(long, value_enum, default_value = "cosine")]
        metric: MetricArg,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        validation: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        schema: Schema,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP API.
    Serve {
        #[arg(long)]
        manifest: PathBuf,
        /// Overrides the manifest port.
        #[arg(long, env = "INFODEMIC_PORT")]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Run a whole pipeline from a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    let result = match cli.command {
        Command::Ingest { schema, input, out, split, seed } => {
            commands::ingest(schema, &input, &out, split.as_deref(), seed.seed)
        }
        Command::Preprocess { schema, input, out } => commands::preprocess(schema, &input, &out),
        Command::Featurize { input, out, lexicons } => commands::featurize(&input, &out, lexicons.as_deref()),
        Command::Select { features, k, trees, out, lexicons, seed } => {
            commands::select(&features, k, trees, &out, lexicons.as_deref(), seed.seed)
        }
        Command::Pca { features, selection, out, lexicons } => {
            commands::pca(&features, selection.as_deref(), &out, lexicons.as_deref())
        }
        Command::Train(a) => commands::train(&a),
        Command::Gridsearch(a) => commands::gridsearch(&a),
        Command::Evaluate { model, test, schema, format, out, dataset_tag, lexicons } => {
            commands::evaluate(&model, &test, schema, format, out.as_deref(), &dataset_tag, lexicons.as_deref())
        }
        Command::Predict { model, input, text, schema, out, lexicons } => {
            commands::predict(&model, input.as_deref(), text.as_deref(), schema, out.as_deref(), lexicons.as_deref())
        }
        Command::Similar { metric, k, embeddings, index, index_schema, text } => {
            commands::similar(metric, k, &embeddings, &index, index_schema, &text)
        }
        Command::TuneK { metric, embeddings, index, validation, schema, k_min, k_max, out } => {
            commands::tune_k(metric, &embeddings, &index, &validation, schema, k_min, k_max, out.as_deref())
        }
        Command::Serve { manifest, port, host } => commands::serve(&manifest, port, &host),
        Command::Run { manifest, seed, out_dir } => commands::run(&manifest, seed, out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render(&e));
            ExitCode::FAILURE
        }
    }
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}
