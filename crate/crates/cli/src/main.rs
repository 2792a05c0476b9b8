//! Command-line front end of the `maxcomm` toolkit.
//!
//! Exit status: 0 on success or when every suite passes, 1 when a
//! verification suite or experiment fails, 2 on usage or input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "maxcomm", version, about = "Maximal commutators and weighted Lipschitz functionals on lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply an operator to a grid function.
    Compute(ComputeArgs),
    /// Estimate an operator norm over the seeded test corpus.
    Norms(NormsArgs),
    /// Per-cube Lipschitz or characterizing functional of a symbol.
    Functionals(FunctionalsArgs),
    /// Run verification suites on the seeded corpus.
    Verify(VerifyArgs),
    /// Run the refinement or stability experiment.
    Experiment(ExperimentArgs),
    /// Write the seeded corpus to a directory.
    Corpus(CorpusArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Lattice dimension (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Points per axis.
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Explicit shape, e.g. `16,24`; overrides --dim and --n.
    #[arg(long, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,
    /// Lattice spacing; defaults to 1 / (points along the first axis).
    #[arg(long)]
    pub h: Option<f64>,
    /// Cube family: all, dyadic, sampled:K or sampled:K:SEED.
    #[arg(long, default_value = "all")]
    pub family: String,
    /// Integrability exponent [default: 2].
    #[arg(long)]
    pub p: Option<f64>,
    /// Smoothness exponent [default: 0.25].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Target exponent; defaults to 1/q = 1/p − β/n.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Input grid file (`.json` envelope, otherwise CSV).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output path; JSON goes to stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// csv or json; defaults to the output extension.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to one per core.
    #[arg(long, env = "MAXCOMM_THREADS")]
    pub threads: Option<usize>,
    /// Switch to a sampled family when the family has more cubes.
    #[arg(long)]
    pub max_cubes: Option<usize>,
    /// Refuse grids with more points.
    #[arg(long)]
    pub max_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: Common,
    /// maximal, sharp, restricted, Mb, bM, bMsharp or frac.
    #[arg(long)]
    pub op: String,
    /// Symbol `b` for the commutators.
    #[arg(long)]
    pub symbol: Option<PathBuf>,
    /// Weight grid for frac; unit weight when absent.
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Cube `Q0` of the restricted operator as `anchor…,side`.
    #[arg(long, value_delimiter = ',')]
    pub cube: Option<Vec<usize>>,
    /// Also write the per-point argmax cubes as JSON.
    #[arg(long)]
    pub argmax: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NormsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Mb, bM, bMsharp or frac.
    #[arg(long)]
    pub op: String,
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Number of corpus test functions.
    #[arg(long, default_value_t = 8)]
    pub functions: usize,
}

#[derive(Args, Debug)]
pub struct FunctionalsArgs {
    #[command(flatten)]
    pub common: Common,
    /// lip, maximal or sharp.
    #[arg(long, default_value = "lip")]
    pub kind: String,
    #[arg(long)]
    pub weight: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CorpusSize {
    #[arg(long, default_value_t = 8)]
    pub functions: usize,
    #[arg(long, default_value_t = 6)]
    pub symbols: usize,
    #[arg(long, default_value_t = 4)]
    pub weights: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// restriction, domination, mean-split, converse, holder, commutator-identity,
    /// a1, lemma21, lemma22, lemma24, lemma25, operator-norms or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[command(flatten)]
    pub sizes: CorpusSize,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: Common,
    /// refinement or stability.
    #[arg(long)]
    pub name: String,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sizes: CorpusSize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
