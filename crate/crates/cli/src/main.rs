//! `tubetop`: winding vectors, Hardy-model checks and Toeplitz index
//! verification from the command line.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 numerical abort, 64 usage.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tubetop::hardy::DumpEncoding;
use tubetop::verify::Suite;
use tubetop::Tolerances;

use commands::{Outcome, EXIT_USAGE};
use config::{load_config, load_symbol, Command, Family, Format, RunConfig};

#[derive(Parser)]
#[command(name = "tubetop", version, about = "Winding vectors and Toeplitz index checks on tube-type domains")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for algebraic equalities.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Winding vector of a symbol, optionally with a factorization check.
    Winding {
        /// Product domain such as `I2`, `I2xIV3`.
        #[arg(long)]
        domain: String,
        /// Symbol spec: inline JSON or a path.
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 8)]
        base_points: usize,
        /// Random loops for the factorization check (0 skips it).
        #[arg(long, default_value_t = 0)]
        factorize: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run invariant suites.
    Verify {
        /// jordan | shilov | hardy | index | all
        suite: String,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long)]
        lmax: Option<i64>,
        /// Comma-separated section sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Family::Gk)]
        family: Family,
        #[arg(long)]
        count: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-section index of a Toeplitz operator compared with the winding.
    Index {
        #[arg(long)]
        symbol: String,
        /// `I1` (default) or `I2` for symbols `f(N)`.
        #[arg(long)]
        domain: Option<String>,
        /// Treat the symbol as a matrix symbol (`{"family":"matrix",...}`).
        #[arg(long)]
        matrix: bool,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long)]
        lmax: Option<i64>,
        /// Write the truncated operator (largest circle section, or the
        /// compressed U(2) matrix) to this path.
        #[arg(long)]
        dump: Option<String>,
        #[arg(long, value_parser = ["base64", "binary"], default_value = "base64")]
        dump_encoding: String,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run from a config or from the config embedded in a report.
    Replay {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    cfg.seed = c.seed;
    cfg.format = c.format;
    if let Some(t) = c.tol {
        cfg.tolerances = Tolerances { eq_tol: t, ..cfg.tolerances };
    }
}

fn parse_domain(s: &str) -> Result<tubetop::ProductDomain, String> {
    s.parse().map_err(|e: tubetop::Error| format!("bad --domain {s:?}: {e}"))
}

/// Builds the resolved config and the output path.
fn resolve(cmd: Cmd) -> Result<(RunConfig, Option<PathBuf>), String> {
    match cmd {
        Cmd::Winding { domain, symbol, base_points, factorize, common } => {
            let mut cfg = RunConfig::defaults(Command::Winding);
            apply_common(&mut cfg, &common);
            cfg.domain = Some(parse_domain(&domain)?);
            cfg.symbol = Some(load_symbol(&symbol)?);
            cfg.base_points = base_points;
            cfg.factorization_loops = factorize;
            Ok((cfg, common.out))
        }
        Cmd::Verify { suite, dmax, lmax, sizes, family, count, common } => {
            let mut cfg = RunConfig::defaults(Command::Verify);
            apply_common(&mut cfg, &common);
            cfg.suite = Some(suite.parse::<Suite>().map_err(|e| e.to_string())?);
            cfg.d_max = dmax.unwrap_or(cfg.d_max);
            cfg.l_max = lmax.unwrap_or(cfg.l_max);
            cfg.sizes = sizes.unwrap_or(cfg.sizes);
            cfg.family = family;
            cfg.count = count.unwrap_or(cfg.count);
            Ok((cfg, common.out))
        }
        Cmd::Index { symbol, domain, matrix, sizes, dmax, lmax, dump, dump_encoding, common } => {
            let mut cfg = RunConfig::defaults(Command::Index);
            apply_common(&mut cfg, &common);
            cfg.domain = Some(parse_domain(domain.as_deref().unwrap_or("I1"))?);
            cfg.symbol = Some(load_symbol(&symbol)?);
            cfg.matrix = matrix;
            let default_sizes = if matrix { RunConfig::default_block_sizes() } else { cfg.sizes.clone() };
            cfg.sizes = sizes.unwrap_or(default_sizes);
            cfg.d_max = dmax.unwrap_or(cfg.d_max);
            cfg.l_max = lmax.unwrap_or(4);
            cfg.dump = dump;
            cfg.dump_encoding = if dump_encoding == "binary" { DumpEncoding::Binary } else { DumpEncoding::Base64 };
            Ok((cfg, common.out))
        }
        Cmd::Replay { path, out } => Ok((load_config(&path)?, out)),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TUBETOP_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("TUBETOP_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("TUBETOP_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("tubetop: {msg}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    let (cfg, out) = match resolve(cli.command) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("tubetop: {msg}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let outcome: Outcome = commands::run(&cfg);
    if let Some(e) = &outcome.error {
        eprintln!("tubetop: {}: {}", e.kind, e.message);
    }
    let text = match report::render(&cfg, &outcome) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("tubetop: cannot render report: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    if let Err(e) = emit(&text, out.as_ref()) {
        eprintln!("tubetop: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
