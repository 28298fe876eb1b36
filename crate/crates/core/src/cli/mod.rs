//! Command-line driver: parses flags and an optional INI file, runs one
//! command, writes CSV/JSON/field files into `--out` and maps the outcome to
//! an exit code.

mod commands;
mod identities;

pub use identities::{identity_suite, IdentityCheck, SuiteOptions};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::io::VERSION;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

const SECTIONS: &[&str] = &["identities", "hessian", "extremal", "capacity", "solve", "energy"];

#[derive(Parser, Debug)]
#[command(name = "qhess", version, about = "Quaternionic m-Hessian toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// INI file; each command reads its own `[section]`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "QHESS_THREADS")]
    pub threads: Option<usize>,
    /// Overrides the command's main tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Algebra and calculus identity suite.
    Identities,
    /// Writes a sampled test field.
    Field {
        #[arg(long, value_enum, default_value = "norm2")]
        kind: FieldKind,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        /// File name inside `--out`; `.csv` selects CSV, anything else binary.
        #[arg(long, default_value = "field.bin")]
        name: String,
    },
    /// Hessian density of a field file.
    Hessian {
        input: PathBuf,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Relative extremal function of a ball in a ball.
    Extremal,
    /// Capacities of concentric balls.
    Capacity,
    /// Variational solve of the Hessian equation.
    Solve,
    /// Energy inequalities on seeded random tuples.
    Energy,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Field { .. } => "field",
            Command::Hessian { .. } => "hessian",
            Command::Extremal => "extremal",
            Command::Capacity => "capacity",
            Command::Solve => "solve",
            Command::Energy => "energy",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    /// `‖x‖²`
    Norm2,
    /// `−‖x‖²`
    NegNorm2,
    /// An affine function.
    Affine,
    /// `Re Σ q̄_l a_lk q_k` for a seeded random hyperhermitian `A`.
    Quadratic,
}

/// State shared by every command.
pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub seed: u64,
    pub tol: Option<f64>,
    pub hash: String,
}

impl Context {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Metadata embedded in every output file.
    pub fn meta(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("config_hash".into(), Value::String(self.hash.clone()));
        m.insert("seed".into(), Value::from(self.seed));
        m.insert("version".into(), Value::String(VERSION.into()));
        m
    }
}

/// Summary of a finished command.
pub struct Report {
    pub pass: bool,
    pub summary: Map<String, Value>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Format(_) | Error::Invalid(_) | Error::Io(_) => EXIT_CONFIG,
        Error::NonConvergence { .. } | Error::Backtracking { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_FAIL,
    }
}

fn config_hash(text: &str, cli: &Cli) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.update(format!("\0{:?}\0{}\0{:?}", cli.command, cli.common.seed, cli.common.tol.map(f64::to_bits)).as_bytes());
    hex::encode(h.finalize())
}

fn prepare(cli: &Cli) -> Result<Context> {
    let text = match &cli.common.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let config = Config::parse(&text)?;
    config.check_sections(SECTIONS)?;
    std::fs::create_dir_all(&cli.common.out)?;
    Ok(Context {
        hash: config_hash(&text, cli),
        config,
        out: cli.common.out.clone(),
        seed: cli.common.seed,
        tol: cli.common.tol,
    })
}

fn dispatch(cli: &Cli, ctx: &Context) -> Result<Report> {
    match &cli.command {
        Command::Identities => commands::identities(ctx),
        Command::Field { kind, n, points, half_width, name } => commands::field(ctx, *kind, *n, *points, *half_width, name),
        Command::Hessian { input, order, eps } => commands::hessian(ctx, input, *order, *eps),
        Command::Extremal => commands::extremal(ctx),
        Command::Capacity => commands::capacity(ctx),
        Command::Solve => commands::solve(ctx),
        Command::Energy => commands::energy(ctx),
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(t) = cli.common.threads {
        // Fails only if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let quiet = cli.common.quiet;
    let start = Instant::now();
    let name = cli.command.name();
    let outcome = prepare(&cli).and_then(|ctx| {
        let report = dispatch(&cli, &ctx)?;
        let mut summary = ctx.meta();
        summary.insert("command".into(), Value::String(name.into()));
        summary.insert("pass".into(), Value::Bool(report.pass));
        summary.extend(report.summary);
        let summary = Value::Object(summary);
        write_json(&ctx.path(&format!("{name}.json")), &summary)?;
        if !quiet {
            use std::io::Write;
            // A closed pipe on stdout is not an error of the run.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
        }
        Ok(report.pass)
    });
    if !quiet {
        eprintln!("{name}: wall time {:.3} s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            if !quiet {
                eprintln!("{name}: FAILED");
            }
            EXIT_FAIL
        }
        Err(e) => {
            let code = exit_code(&e);
            match (&e, &cli.common.config) {
                (Error::Config { .. }, Some(p)) => eprintln!("error: {}: {e}", p.display()),
                _ => eprintln!("error: {e}"),
            }
            code
        }
    }
}

pub fn main() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            // usage errors share the bad-input code; help and version are not errors
            if e.use_stderr() {
                3
            } else {
                0
            }
        }
    }
}
