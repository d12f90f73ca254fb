//! Command-line driver: argument types, dispatch and JSON run reports.

mod commands;
pub mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use commands::*;
pub use report::{AnyReport, Provenance, RunReport, Status};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_INTERNAL: u8 = 70;

#[derive(Parser, Debug)]
#[command(name = "carnot-bcp", version, about = "Besicovitch covering experiments on graded groups")]
pub struct Cli {
    /// Worker threads for sharded searches and sweeps.
    #[arg(long, env = "CARNOT_BCP_JOBS", global = true)]
    pub jobs: Option<usize>,
    /// Write the JSON report to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether layers of different degrees commute, with witnesses.
    Classify(ClassifyArgs),
    /// Evaluate quasi-distances.
    Dist {
        #[command(subcommand)]
        cmd: DistCommand,
    },
    /// Search, verify and cover with Besicovitch families.
    Besicovitch {
        #[command(subcommand)]
        cmd: BesicovitchCommand,
    },
    /// Randomized sweeps of the A_p(q) sign lemmas on free step-2 groups.
    CertifyLemmas(CertifyArgs),
    /// Exhaustive checks on the countable space d(x_i, x_j) = 1 - 1/max(i, j).
    CountableSpace(CountableArgs),
    /// Re-parse run reports and summarize their status.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum DistCommand {
    Eval(DistEvalArgs),
}

#[derive(Subcommand, Debug)]
pub enum BesicovitchCommand {
    Search(SearchArgs),
    Verify(VerifyArgs),
    Cover(CoverArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceKind {
    Hs,
    Power,
    CcH1,
    CountableSpace,
}

/// Ways to name a quasi-distance on the command line.
#[derive(Args, Debug, Clone, Default)]
pub struct DistanceArgs {
    /// JSON file holding a distance description, e.g. {"kind": "hs", "group": "heisenberg(1)", "r": "1"}.
    #[arg(long, conflicts_with_all = ["distance_json", "group", "kind"])]
    pub distance: Option<PathBuf>,
    /// Inline JSON distance description.
    #[arg(long, conflicts_with_all = ["group", "kind"])]
    pub distance_json: Option<String>,
    #[arg(long, value_enum)]
    pub kind: Option<DistanceKind>,
    /// Built-in group expression, e.g. free_step2(2) or product(abelian(1),heisenberg(1)).
    #[arg(long)]
    pub group: Option<String>,
    /// Parameter of heisenberg_nonstandard when --group names it bare.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Radius of the Euclidean ball defining hs.
    #[arg(long = "R", default_value = "1")]
    pub radius: String,
    /// Exponent of a power distance d^(1/t).
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub scale: Option<f64>,
    /// Number of points of the countable space.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Built-in group expression.
    #[arg(long, required_unless_present = "algebra", conflicts_with = "algebra")]
    pub group: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Algebra JSON file.
    #[arg(long)]
    pub algebra: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistEvalArgs {
    #[command(flatten)]
    pub distance: DistanceArgs,
    /// Comma-separated coordinates (rationals or decimals); a 1-based label for countable_space.
    #[arg(long, allow_hyphen_values = true)]
    pub p: String,
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Random,
    Annealed,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub distance: DistanceArgs,
    /// Total number of proposals.
    #[arg(long)]
    pub budget: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    pub strategy: StrategyArg,
    /// Add orbit and segment proposals to the random ones.
    #[arg(long)]
    pub combined: bool,
    /// Also write the certified family to this file.
    #[arg(long)]
    pub family_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Family JSON file.
    #[arg(long)]
    pub family: PathBuf,
    /// Overrides the distance recorded in the family file.
    #[command(flatten)]
    pub distance: DistanceArgs,
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    #[command(flatten)]
    pub distance: DistanceArgs,
    /// JSON file {"points": [[...]], "radii": [...]}.
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Draw this many uniform points in [0,1]^dim with radii log-uniform in [1/16, 1].
    #[arg(long, requires = "seed")]
    pub random: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// aq, small_angles, away, near2a, inbetween or all.
    #[arg(long, default_value = "all")]
    pub lemma: String,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    #[arg(long = "R", default_value = "1")]
    pub radius: String,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: u64,
    /// Override the admissible epsilon (rational).
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Override the calibrated angle threshold.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Exact rational samples for the aq lemma, with p on the sphere.
    #[arg(long, default_value_t = 0)]
    pub exact_samples: u64,
}

#[derive(Args, Debug)]
pub struct CountableArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Check B(x_i, 1 - 1/i) = {x_1..x_i} for i up to this bound (default n).
    #[arg(long)]
    pub ball_check: Option<usize>,
    /// Radii k/grid, k = 1..grid, for the two-ball family search.
    #[arg(long, default_value_t = 64)]
    pub grid: i64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Report files written by other subcommands.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unreadable input (exit 64).
    Usage(String),
    Core(carnot_bcp::Error),
    Io(String),
}

impl From<carnot_bcp::Error> for CliError {
    fn from(e: carnot_bcp::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use carnot_bcp::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::Solver(_) | E::Oracle(_) | E::Sampling(_) | E::NonFinite) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_INTERNAL,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "config",
            _ => "internal",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// A finished subcommand: serialized report plus anything to say on stderr.
pub struct Rendered {
    pub json: String,
    pub status: Status,
    pub diagnostic: Option<serde_json::Value>,
}

pub fn diagnostic(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> u8 {
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("{}", diagnostic("config", "--jobs must be at least 1"));
            return EXIT_USAGE;
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    let rendered = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}", diagnostic(e.kind(), &e.to_string()));
            return e.exit_code();
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &rendered.json),
        None => std::io::stdout().lock().write_all(rendered.json.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("{}", diagnostic("internal", &format!("writing report: {e}")));
        return EXIT_INTERNAL;
    }
    if let Some(d) = rendered.diagnostic {
        eprintln!("{d}");
    }
    match rendered.status {
        Status::Ok => EXIT_OK,
        Status::Rejected => EXIT_REJECTED,
    }
}

/// Parses `args` (program name first) and runs them; clap errors map to 64, help and version to 0.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                EXIT_OK
            } else {
                eprintln!("{}", diagnostic("config", e.to_string().trim_end()));
                EXIT_USAGE
            }
        }
    }
}
