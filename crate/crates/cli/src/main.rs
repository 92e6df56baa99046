//! `dnfforge`: generate data, train, prune, extract and verify DNF rule models.

mod commands;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dnfforge_core::graphgen::Difficulty;

#[derive(Debug, Parser)]
#[command(name = "dnfforge", version, about = "Differentiable DNF rule learning on subgraph-set-isomorphism data")]
struct Cli {
    /// Worker threads; 1 gives a strictly sequential run.
    #[arg(long, global = true, env = "DNFFORGE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a hidden rule set and a labelled dataset.
    Gen(GenArgs),
    /// Train a DNF model on a dataset.
    Train(TrainArgs),
    /// Prune and threshold a trained model against the validation split.
    Prune(PruneArgs),
    /// Write the rules encoded by a thresholded model.
    Extract(ExtractArgs),
    /// Check rules against dataset labels and, optionally, against a model.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_difficulty)]
    pub difficulty: Difficulty,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Probability of flipping each unary/binary atom of the training split.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 2000)]
    pub train: usize,
    #[arg(long, default_value_t = 1000)]
    pub validation: usize,
    #[arg(long, default_value_t = 1000)]
    pub test: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON file with training configuration fields; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub metrics_out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub updates: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Write 0 in the wall time column so reruns produce identical files.
    #[arg(long)]
    pub omit_wall_time: bool,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = dnfforge_core::postprocess::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Audit CSV; defaults to `<out>.audit.csv`.
    #[arg(long)]
    pub audit_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub rules: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Thresholded model to compare against the rules.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_difficulty(s: &str) -> Result<Difficulty, String> {
    s.parse().map_err(|e: dnfforge_core::Error| e.to_string())
}

#[derive(Debug)]
pub enum CliError {
    Core(dnfforge_core::Error),
    Io { path: PathBuf, message: String },
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(dnfforge_core::Error::Syntax { .. })
            | CliError::Core(dnfforge_core::Error::UnknownPredicate { .. })
            | CliError::Core(dnfforge_core::Error::Arity { .. }) => "parse",
            CliError::Core(dnfforge_core::Error::Generation { .. }) => "generation",
            CliError::Core(dnfforge_core::Error::Config(_)) => "config",
            CliError::Core(dnfforge_core::Error::NotThresholded { .. })
            | CliError::Core(dnfforge_core::Error::DegenerateRule { .. }) => "model",
            CliError::Core(_) => "invalid_input",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
            CliError::Usage(m) => f.write_str(m),
        }
    }
}

impl From<dnfforge_core::Error> for CliError {
    fn from(e: dnfforge_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Train(a) => commands::train(&a),
        Command::Prune(a) => commands::prune(&a),
        Command::Extract(a) => commands::extract(&a),
        Command::Verify(a) => commands::verify(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
