//! `annealc`: compile pseudo-Boolean objectives to Ising models, embed them
//! on a Chimera graph and sample them.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse error, 3 contract
//! violation (bad parameters or an input that does not fit the stage),
//! 4 solver or embedding failure. Usage errors are reported by clap with
//! exit code 2.

mod commands;
mod error;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "annealc", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quadratize a polynomial file; writes the result and an aux sidecar.
    Reduce(ReduceArgs),
    /// Convert a quadratic polynomial or model file to an Ising or QUBO model file.
    #[command(alias = "to-ising")]
    Convert(ConvertArgs),
    /// Find a Chimera minor embedding for a quadratic model.
    Embed(EmbedArgs),
    /// Sample a model and print its energy histogram.
    Solve(SolveArgs),
    /// Solve an unweighted max-3-SAT instance given as DIMACS CNF.
    Maxsat(MaxsatArgs),
    /// Solve minimum multicut on a tree given as a `.tree` file.
    Mmc(MmcArgs),
    /// Run a prefix of the pipeline, writing every intermediate artifact.
    Run(pipeline::RunArgs),
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// Polynomial file.
    input: PathBuf,
    /// Quadratic polynomial output.
    #[arg(short, long)]
    output: PathBuf,
    /// Aux sidecar path [default: OUTPUT with extension `aux`].
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// Quadratic polynomial or `qubo`/`ising` model file.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelKind::Ising)]
    to: ModelKind,
    /// Output path [default: stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Quadratic polynomial or model file.
    input: PathBuf,
    #[command(flatten)]
    chimera: ChimeraOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Embedding output.
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the physical Ising model.
    #[arg(long)]
    physical: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Quadratic polynomial or model file.
    input: PathBuf,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    embed: EmbedOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args, Debug)]
struct MaxsatArgs {
    /// DIMACS CNF file (clauses of width at most 3).
    input: PathBuf,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    embed: EmbedOpts,
    #[command(flatten)]
    tts: TtsOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args, Debug)]
struct MmcArgs {
    /// Tree instance file.
    input: PathBuf,
    /// Penalty per uncut terminal pair [default: number of pairs].
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    solver: SolverOpts,
    #[command(flatten)]
    embed: EmbedOpts,
    #[command(flatten)]
    tts: TtsOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Ising,
    Qubo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    /// Exact enumeration.
    Bf,
    /// Simulated annealing.
    Sa,
    /// Simulated quantum annealing (path-integral Monte Carlo).
    Sqa,
}

#[derive(Args, Debug, Clone)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value_t = SolverKind::Sa)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 1000)]
    pub readouts: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// SA: starting temperature.
    #[arg(long)]
    pub t0: Option<f64>,
    /// SA: geometric cooling factor in (0, 1).
    #[arg(long)]
    pub cooling: Option<f64>,
    /// SA: number of temperatures.
    #[arg(long)]
    pub steps: Option<usize>,
    /// SA: sweeps per temperature. SQA: total sweeps.
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// SQA: Trotter slices (at least 2).
    #[arg(long)]
    pub trotter: Option<usize>,
    /// SQA: initial transverse field.
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// SQA: final transverse field.
    #[arg(long)]
    pub gamma_final: Option<f64>,
    /// SQA: temperature.
    #[arg(long)]
    pub temp: Option<f64>,
    /// bf: number of lowest energy levels to report.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Average over this many random gauges (0 disables gauging).
    #[arg(long, default_value_t = 0)]
    pub gauges: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ChimeraOpts {
    /// Chimera rows of unit cells.
    #[arg(short = 'M', long = "rows", default_value_t = 16)]
    pub rows: usize,
    /// Chimera columns of unit cells.
    #[arg(short = 'N', long = "cols", default_value_t = 16)]
    pub cols: usize,
    /// Qubits per shore of a unit cell.
    #[arg(short = 'L', long = "shore", default_value_t = 4)]
    pub shore: usize,
    /// File listing inoperable qubit ids.
    #[arg(long)]
    pub inoperable: Option<PathBuf>,
    /// Chain coupling magnitude [default: from the largest local field].
    #[arg(long)]
    pub chain_strength: Option<f64>,
    /// Randomized embedding attempts before giving up.
    #[arg(long, default_value_t = 100)]
    pub tries: usize,
}

#[derive(Args, Debug, Clone)]
pub struct EmbedOpts {
    /// Sample the model embedded on a Chimera graph instead of directly.
    #[arg(long)]
    pub embed: bool,
    #[command(flatten)]
    pub chimera: ChimeraOpts,
    /// Write the embedding used.
    #[arg(long, requires = "embed")]
    pub embedding_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TtsOpts {
    /// Report time to solution at this target probability.
    #[arg(long)]
    pub target_p: Option<f64>,
    /// Anneal time per readout in microseconds.
    #[arg(long, default_value_t = 20.0)]
    pub anneal_us: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputOpts {
    /// Stdout format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also write the energy histogram as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Equal-width energy bins when there are more levels than this.
    #[arg(long)]
    pub bins: Option<usize>,
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Reduce(a) => commands::reduce(&a.input, &a.output, a.sidecar.as_deref()),
        Command::Convert(a) => commands::convert(&a.input, a.to, a.output.as_deref()),
        Command::Embed(a) => commands::embed(&a.input, &a.chimera, a.seed, &a.output, a.physical.as_deref()),
        Command::Solve(a) => commands::solve(&a.input, &a.solver, &a.embed, &a.output),
        Command::Maxsat(a) => commands::maxsat(&a.input, &a.solver, &a.embed, &a.tts, &a.output),
        Command::Mmc(a) => commands::mmc(&a.input, a.lambda, &a.solver, &a.embed, &a.tts, &a.output),
        Command::Run(a) => pipeline::run(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
