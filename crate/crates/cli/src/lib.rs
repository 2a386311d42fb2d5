//! The `canonlab` command line: argument parsing, dispatch and reporting.
//!
//! Every run prints a [`RunReport`] as JSON on standard output. Exit codes:
//! `0` success, `1` usage error, `2` invalid input or a failed identity
//! check, `3` a negative `typeq` comparison.

mod commands;
pub mod curve;
pub mod docs;
pub mod error;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
pub use report::RunReport;

/// Environment variable that replaces the default seed.
pub const SEED_ENV: &str = "CANONLAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "canonlab", version, about = "Canonical bases over finite measure spaces")]
pub struct Cli {
    /// Seed for sampled checks. Defaults to $CANONLAB_SEED, then 0.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical base of an element of L_p over a fibered pair.
    LpCb(LpCbArgs),
    /// Conditional moments of random variables.
    RvCb(RvCbArgs),
    /// Conditional probabilities of all meets of a family of events.
    AprCb(AprCbArgs),
    /// Projections and Gram matrix of a tuple of vectors.
    HsCb(HsCbArgs),
    /// Compares the types of two elements; exits 3 when they differ.
    Typeq(TypeqArgs),
    /// Conjugate of a convex piecewise-linear function.
    Legendre(LegendreArgs),
    /// Lattice terms and approximation of homogeneous functions.
    #[command(subcommand)]
    Krivine(KrivineCommand),
    /// The ball sort over the p-adic projective line.
    Ultra(UltraArgs),
    /// Worked counterexamples.
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Debug, Args)]
pub struct LpCbArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub element: PathBuf,
    #[arg(long)]
    pub p: f64,
    /// Use the grid {k/n : 0 < k < n}.
    #[arg(long)]
    pub grid: usize,
    /// Interval expectations instead of partials.
    #[arg(long)]
    pub intervals: bool,
    /// Write the base as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the curve t ↦ E_t as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RvCbArgs {
    /// `{"weights": [...], "blocks": [[...]]}`.
    #[arg(long)]
    pub space: PathBuf,
    /// A list of value vectors, one per random variable.
    #[arg(long)]
    pub elements: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k_max: u32,
}

#[derive(Debug, Args)]
pub struct AprCbArgs {
    /// `{"weights": [...], "blocks": [[...]], "events": [[0/1, ...]]}`.
    #[arg(long)]
    pub events: PathBuf,
}

#[derive(Debug, Args)]
pub struct HsCbArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    /// `{"dim": d, "basis": [[...]]}` with an orthonormal basis.
    #[arg(long)]
    pub subspace: PathBuf,
}

#[derive(Debug, Args)]
pub struct TypeqArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub p: f64,
    /// Compare types over the empty set instead of over the base.
    #[arg(long)]
    pub absolute: bool,
}

#[derive(Debug, Args)]
pub struct LegendreArgs {
    /// Breakpoints, slopes, optional domain ends and one anchor value.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum KrivineCommand {
    /// Approximates a registered function on the unit sphere.
    Approx {
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 2048)]
        grid: usize,
    },
    /// Evaluates a term at a point.
    Eval {
        #[arg(long)]
        term: String,
        #[arg(long)]
        arity: usize,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
    },
    /// Sup norm over the cube and Lipschitz constant of a term.
    Norm {
        #[arg(long)]
        term: String,
        #[arg(long)]
        arity: usize,
    },
}

#[derive(Debug, Args)]
pub struct UltraArgs {
    #[arg(long)]
    pub prime: u64,
    #[command(subcommand)]
    pub command: UltraCommand,
}

#[derive(Debug, Subcommand)]
pub enum UltraCommand {
    /// Triangle inequality on every triple of sampled balls.
    CheckTriangles {
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Distance between the balls `a_r` and `b_s`.
    BallDist {
        a: String,
        r: String,
        b: String,
        s: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Partials of a spike of mass ε do not shrink in L_1.
    P1 {
        #[arg(long)]
        p: f64,
        /// `1/m` for a positive integer m.
        #[arg(long)]
        eps: String,
        /// Fiber cells; must be a multiple of m.
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Agreeing one-variable types that do not determine the joint type.
    Remark,
}

/// What a subcommand hands back to [`run`].
pub(crate) struct Outcome {
    pub outputs: serde_json::Value,
    pub checks: Vec<(String, bool)>,
    /// Exit code when every check passed.
    pub code: i32,
}

/// Parses `args` (program name first), runs the command, prints the report
/// on `out` and diagnostics on `err`, and returns the exit code.
pub fn run(args: &[String], env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let seed = match (cli.seed, env_seed) {
        (Some(s), _) => s,
        (None, Some(text)) => match text.trim().parse() {
            Ok(s) => s,
            Err(_) => {
                let _ = writeln!(err, "error: {SEED_ENV} must be an unsigned integer, got {text:?}");
                return 1;
            }
        },
        (None, None) => 0,
    };
    let started = Instant::now();
    let mut digest = report::Digest::new(&args[1..]);
    match commands::dispatch(&cli.command, seed, &mut digest) {
        Ok(outcome) => {
            let report = RunReport {
                command: args[1..].to_vec(),
                seed,
                inputs_digest: digest.hex(),
                outputs: outcome.outputs,
                checks: outcome.checks.into_iter().collect(),
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            let text = serde_json::to_string_pretty(&report).expect("report serialises");
            let _ = writeln!(out, "{text}");
            if report.passed() {
                outcome.code
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|(_, ok)| !**ok)
                    .map(|(k, _)| k.as_str())
                    .collect();
                let _ = writeln!(err, "error: failed checks: {}", failed.join(", "));
                2
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
