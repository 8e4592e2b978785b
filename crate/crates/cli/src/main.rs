mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::CliError;

#[derive(Debug, Parser, Serialize)]
#[command(name = "signed-spectra", version, about = "Spectral clustering and perturbation experiments on directed signed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
enum Command {
    /// Sample a synthetic K-block signed graph.
    Gen(GenArgs),
    /// Cluster a graph with forward eigenvector selection.
    Cluster(ClusterArgs),
    /// Leading eigenvalues by modulus as a TSV table.
    Eigs(EigsArgs),
    /// Perturbation experiments: first-order ladder, rotations, regimes.
    Perturb(PerturbArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    /// Built-in spec name (Syn-1 .. Syn-9).
    #[arg(long, conflicts_with = "spec_file", required_unless_present = "spec_file")]
    pub spec: Option<String>,
    /// JSON spec file.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub sampling: Option<Sampling>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Bernoulli,
    UniformDraws,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullModelArg {
    Directed,
    Literal,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub tau: usize,
    #[arg(long, default_value_t = 0.95)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Labels file (`node<TAB>cluster`) to score accuracy against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub emit_embedding: bool,
    #[arg(long, value_enum, default_value_t = NullModelArg::Directed)]
    pub null_model: NullModelArg,
    /// Basis screen: keep eigenvectors whose minority-sign mass is at most
    /// this fraction; 0 demands a strictly uniform sign.
    #[arg(long, default_value_t = 0.1)]
    pub sign_mass: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EigsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub tau: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the dense-oracle spectrum for comparison (n <= 512).
    #[arg(long)]
    pub oracle: bool,
    /// Residual tolerance ||Ax - lambda x||.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub krylov_dim: Option<usize>,
    #[arg(long, default_value_t = 300)]
    pub max_restarts: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    Approx,
    Rotation,
    Regime,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct PerturbArgs {
    #[arg(long, value_enum)]
    pub mode: PerturbMode,
    /// Block sizes of the random base model.
    #[arg(long, value_delimiter = ',', default_value = "12,12")]
    pub blocks: Vec<usize>,
    /// Edge density inside each base block.
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    /// Cross-block density of the perturbation (approx mode).
    #[arg(long, default_value_t = 0.05)]
    pub inter_density: f64,
    /// Fraction of negative cross-block entries (approx mode).
    #[arg(long, default_value_t = 0.5)]
    pub neg_fraction: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
    pub eps: Vec<f64>,
    /// Rotation case: 1a, 1b, 2a or 2b.
    #[arg(long, default_value = "1a")]
    pub case: String,
    #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
    pub direction: DirectionArg,
    /// Signed edge list of a single block (regime mode).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub m_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("SIGNED_SPECTRA_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SIGNED_SPECTRA_THREADS must be a positive integer, got {raw:?}")))?;
        if n == 0 {
            return Err(CliError::Usage("SIGNED_SPECTRA_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn report_error(err: &CliError) {
    let body = serde_json::json!({ "error": err.kind(), "message": err.to_string() });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report_error(&CliError::Usage(e.to_string().trim().to_string()));
            return ExitCode::from(2);
        }
    };
    let run = || -> Result<(), CliError> {
        configure_threads()?;
        match &cli.command {
            Command::Gen(a) => commands::gen(a),
            Command::Cluster(a) => commands::cluster(a),
            Command::Eigs(a) => commands::eigs(a),
            Command::Perturb(a) => commands::perturb(a),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(if matches!(e, CliError::Usage(_)) { 2 } else { 1 })
        }
    }
}
