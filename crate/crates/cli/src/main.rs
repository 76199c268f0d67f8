//! `lcd`: local causal discovery from the command line.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcd_core::Algorithm;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Missing or malformed input, unknown names, bad flag combinations.
    Input(anyhow::Error),
    /// The run stopped at the test cap; partial output was written.
    Capped,
    /// The CI engine or the effect estimator could not answer.
    Engine(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Capped => 3,
            Failure::Engine(_) => 4,
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

pub fn engine<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Engine(e.into())
}

#[derive(Parser, Debug)]
#[command(name = "lcd", version, about = "Local causal discovery around a treatment node")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph (with SEM parameters) from a generator or a built-in fixture.
    Generate(GenerateArgs),
    /// Draw samples from the linear-Gaussian SEM of a graph file.
    Sample(SampleArgs),
    /// Learn the local structure of the treatment and its ATE set.
    Discover(DiscoverArgs),
    /// Check an adjustment set and compute the optimal one.
    Adjust(AdjustArgs),
    /// Run a faithfulness tester or the hybrid procedure.
    Faithfulness(FaithfulnessArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CiKind {
    Oracle,
    FisherZ,
    Scripted,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    CovMed,
    ErdosRenyi,
    Fig5a,
    Fig5b,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Generator JSON, e.g. `{"kind": "erdos_renyi", "n": 10, "p": 0.3, "seed": 1}`.
    #[arg(long, conflicts_with_all = ["kind", "fixture"])]
    pub config: Option<PathBuf>,
    #[arg(long, conflicts_with = "fixture")]
    pub kind: Option<GeneratorKind>,
    /// Built-in graph: fig1, fig5a, fig5b or a scenario such as example18.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Node count for erdos-renyi.
    #[arg(long, default_value_t = 10)]
    pub nodes: usize,
    /// Edge probability for erdos-renyi.
    #[arg(long, default_value_t = 0.3)]
    pub edge_prob: f64,
    #[arg(long, default_value_t = 4)]
    pub clique: usize,
    /// Separator size for fig5b.
    #[arg(long, default_value_t = 4)]
    pub sep: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the structure only, without SEM weights and noise variances.
    #[arg(long)]
    pub structure_only: bool,
    /// Where to write a scenario's overrides.
    #[arg(long)]
    pub overrides_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(short = 'n', long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inputs shared by every command that runs CI tests.
#[derive(Args, Debug)]
pub struct EngineArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub overrides: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CiKind::Oracle)]
    pub ci: CiKind,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub test_cap: Option<usize>,
    /// Seed for SEM weights when the graph file carries none.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'x', long, default_value = "X")]
    pub treatment: String,
    #[arg(short = 'y', long, default_value = "Y")]
    pub outcome: String,
}

#[derive(Args, Debug)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "ldecc", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    /// Include every evaluated CI query in the output.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AdjustArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "ldecc", value_parser = parse_algorithm)]
    pub algo: Algorithm,
    /// Comma-separated adjustment set to check.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<String>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TesterKind {
    Mff,
    Sd,
    Hybrid,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    SdFirst,
    LdeccFirst,
}

#[derive(Args, Debug)]
pub struct FaithfulnessArgs {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum)]
    pub test: TesterKind,
    /// Node to test with `mff`; every non-neighbor of the treatment when absent.
    #[arg(long)]
    pub node: Option<String>,
    #[arg(long, value_enum, default_value_t = OrderArg::SdFirst)]
    pub order: OrderArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Suite JSON: graph families, algorithms, CI engine and cap.
    #[arg(long)]
    pub suite: PathBuf,
    /// Overrides the suite's test cap.
    #[arg(long)]
    pub test_cap: Option<usize>,
    /// Directory for `records.csv` and `report.json`; the report goes to
    /// stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Discover(a) => commands::discover(&a),
        Command::Adjust(a) => commands::adjust(&a),
        Command::Faithfulness(a) => commands::faithfulness(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(e) => eprintln!("error: {e:#}"),
                Failure::Engine(e) => eprintln!("engine error: {e:#}"),
                Failure::Capped => eprintln!("stopped at the test cap; output is partial"),
            }
            ExitCode::from(f.code())
        }
    }
}
