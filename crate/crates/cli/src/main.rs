//! Command-line front end: compile a BNN and an input region into per-class
//! BDDs and answer counting, robustness, maximal-safe-distance and
//! explanation queries exactly.
//!
//! Every command prints a single JSON document on stdout (human-readable
//! tables behind `--pretty`). Exit codes: 0 success, 2 usage, 3 empty
//! class / vacuous query, 4 resource budget exceeded, 1 anything else.

mod commands;
mod format;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combinations or malformed flag grammar (exit 2).
    Usage(String),
    /// Filesystem trouble (exit 1).
    Io(String),
    /// Malformed or invalid input data (exit 1).
    Data(String),
    /// The queried class has no points in the region (exit 3).
    EmptyClass(String),
    /// A node or time budget was exceeded (exit 4).
    Budget(String),
    /// A self-check found a divergence (exit 1).
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::EmptyClass(_) => 3,
            CliError::Budget(_) => 4,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m)
            | CliError::Io(m)
            | CliError::Data(m)
            | CliError::EmptyClass(m)
            | CliError::Budget(m)
            | CliError::CheckFailed(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bnnbdd",
    version,
    about = "Exact BDD-based analysis of binarized neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command that compiles a model.
#[derive(Args)]
struct BudgetArgs {
    /// Ceiling on BDD nodes before the build aborts
    #[arg(long, env = "BNNBDD_NODE_BUDGET")]
    node_budget: Option<usize>,
    /// Wall-clock ceiling in seconds before the build aborts
    #[arg(long, env = "BNNBDD_TIME_BUDGET_S")]
    time_budget_s: Option<f64>,
}

#[derive(Args)]
struct RegionArgs {
    /// Input region: `hamming:<input-file>:<r>`, `fixed:<input-file>:<comma-indices>` (1-based), or `full`
    #[arg(long)]
    region: String,
}

#[derive(Subcommand)]
enum Command {
    /// Compile the model over a region and print per-class counts and build statistics
    Build {
        /// Model file (JSON)
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Human-readable tables instead of JSON
        #[arg(long)]
        pretty: bool,
        /// Also dump each class BDD as DOT to `<prefix>.class<k>.dot`
        #[arg(long, value_name = "PREFIX")]
        dot: Option<PathBuf>,
    },
    /// Count adversarial examples against a ground-truth class
    Robust {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        /// Ground-truth class (1-based)
        #[arg(long)]
        class: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Count region points classified into a target class
    Target {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        /// Target class (1-based)
        #[arg(long)]
        class: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Maximal safe Hamming distance around an input
    Maxhd {
        #[arg(long)]
        model: PathBuf,
        /// Input sample file (0/1 text)
        #[arg(long)]
        input: PathBuf,
        /// Start radius
        #[arg(long)]
        r0: usize,
        /// Adversarial-proportion threshold: a decimal ("0.03") or fraction ("1/20")
        #[arg(long)]
        epsilon: String,
        /// Ground-truth class (1-based)
        #[arg(long)]
        class: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Prime-implicant or essential-feature explanation for a class
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        region: RegionArgs,
        /// Class to explain (1-based)
        #[arg(long)]
        class: usize,
        /// pi = sufficient cube, ef = necessary literals
        #[arg(long, value_parser = ["pi", "ef"])]
        kind: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Generate a seeded random model file
    Gen {
        /// Architecture `n1:...:n_{d+1}:s`
        #[arg(long)]
        arch: String,
        #[arg(long)]
        seed: u64,
        /// Output model path
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the compiled BDDs against direct evaluation, or verify a cube
    Selfcheck {
        /// Architecture to generate (with --seed); mutually exclusive with --model
        #[arg(long, conflicts_with = "model")]
        arch: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Model file to check instead of generating one
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        region: RegionArgs,
        /// Verify this cube (signed 1-based literals, e.g. "+5,-12") instead of enumerating
        #[arg(long, requires = "class", allow_hyphen_values = true)]
        verify_cube: Option<String>,
        /// Class the cube must force (1-based)
        #[arg(long)]
        class: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build { model, region, budget, pretty, dot } => {
            commands::build(&model, &region.region, &budget, pretty, dot.as_deref())
        }
        Command::Robust { model, region, class, budget, pretty } => {
            commands::robust(&model, &region.region, class, &budget, pretty)
        }
        Command::Target { model, region, class, budget, pretty } => {
            commands::target(&model, &region.region, class, &budget, pretty)
        }
        Command::Maxhd { model, input, r0, epsilon, class, budget, pretty } => {
            commands::maxhd(&model, &input, r0, &epsilon, class, &budget, pretty)
        }
        Command::Explain { model, region, class, kind, budget, pretty } => {
            commands::explain(&model, &region.region, class, &kind, &budget, pretty)
        }
        Command::Gen { arch, seed, out } => commands::gen(&arch, seed, &out),
        Command::Selfcheck { arch, seed, model, region, verify_cube, class, budget } => {
            commands::selfcheck(
                arch.as_deref(),
                seed,
                model.as_deref(),
                &region.region,
                verify_cube.as_deref(),
                class,
                &budget,
            )
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
