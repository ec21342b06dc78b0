//! `gmla`: phase-space analyses from the command line.
//!
//! Exit codes: 0 success or PASS, 1 check FAIL or numeric failure,
//! 2 usage or configuration error.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use gmla_core::report::{ReportEnvelope, Status};

#[derive(Debug)]
pub struct UsageError(pub String);

pub const GRAMMAR: &str = "\
signals: gauss(x0, xi0) | chirp(c) | planewave(xi0) | deltaApprox(eps) | delta | delta(x0)
         | hermite(k) | const(re[, im]) | file(\"path.csv\") | i | pi | numbers,
         combined with + - * and parentheses
symbols: x | xi | bracket(m) | radius(m) | gaussz | coneCutoff(lo, hi, inner, wAngle, wRadial)
         | ramp(inner, width, k) | plateau(lo, hi, width, k) | const(re[, im]) | i | pi | numbers,
         combined with + - * ^ (integer powers) and parentheses";

#[derive(Parser, Debug)]
#[command(name = "gmla", version, about = "Phase-space analysis: STFT, Weyl/anti-Wick operators, wave front sets")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// flat `key = value` config file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// also print the report to stdout
    #[arg(long, global = true)]
    print: bool,
    /// grid size N
    #[arg(long, global = true)]
    n: Option<usize>,
    /// grid half-width L
    #[arg(long = "half-width", global = true)]
    half_width: Option<f64>,
    /// frequency oversampling factor
    #[arg(long, global = true)]
    oversample: Option<usize>,
    /// gaussian | hermite(k)
    #[arg(long, global = true)]
    window: Option<String>,
    /// number of sampled directions D
    #[arg(long, global = true)]
    directions: Option<usize>,
    /// cone half-width in direction steps
    #[arg(long = "cone-half-width", global = true)]
    cone_half_width: Option<usize>,
    /// radial fit window `lo,hi`
    #[arg(long = "fit-window", global = true)]
    fit_window: Option<String>,
    /// threshold tolerance for inclusion checks
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sampled STFT with optional heatmap data
    Stft {
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        /// heatmap | polar
        #[arg(long)]
        plot: Option<String>,
    },
    /// Gabor or Sobolev-Gabor wave front estimate
    Wf {
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        /// gabor | sobolev
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// polar | heatmap
        #[arg(long)]
        plot: Option<String>,
    },
    /// Shubin-Sobolev norm
    Qnorm {
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// stft-weighted | locop | weyl-elliptic
        #[arg(long)]
        method: Option<String>,
    },
    /// Apply a Weyl or anti-Wick operator
    Op {
        #[arg(long, allow_hyphen_values = true)]
        symbol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        /// weyl | antiwick
        #[arg(long)]
        quant: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
    },
    /// Seminorm screen, characteristic set and microsupport of a symbol
    Symcheck {
        #[arg(long, allow_hyphen_values = true)]
        symbol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        #[arg(long = "m-prime", allow_hyphen_values = true)]
        m_prime: Option<f64>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long = "n-max")]
        n_max: Option<f64>,
    },
    /// Truncated micro-parametrix and its remainder decay
    Parametrix {
        #[arg(long, allow_hyphen_values = true)]
        symbol: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        chi: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        #[arg(long = "m-prime", allow_hyphen_values = true)]
        m_prime: Option<f64>,
        #[arg(long)]
        terms: Option<u32>,
    },
    /// Two-cone filter end to end
    FilterDemo {
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        /// first cone `lo,hi` in degrees
        #[arg(long, allow_hyphen_values = true)]
        g1: Option<String>,
        /// second cone `lo,hi` in degrees
        #[arg(long, allow_hyphen_values = true)]
        g2: Option<String>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        quant: Option<String>,
    },
    /// Pass/fail check of one structural property
    Check {
        /// moyal | weylwick | microlocal | microelliptic | window-invariance | fourier-rotation | union-equality
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        signal: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        symbol: Option<String>,
        #[arg(long)]
        quant: Option<String>,
    },
}

fn init_threads() -> Result<(), UsageError> {
    if let Ok(v) = std::env::var("GMLA_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| UsageError(format!("GMLA_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| UsageError(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn usage_exit(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Err(UsageError(m)) = init_threads() {
        return usage_exit(&m);
    }
    let file = match &cli.common.config {
        Some(p) => match config::read_config(p) {
            Ok(m) => m,
            Err(UsageError(m)) => return usage_exit(&m),
        },
        None => Default::default(),
    };
    let mut res = config::Resolver::new(file);
    let out_dir = cli
        .common
        .out
        .clone()
        .or_else(|| res.raw("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let start = Instant::now();
    let result = commands::run(&cli.command, &cli.common, &mut res);
    let name = commands::report_name(&cli.command);
    let mut env = ReportEnvelope::new(commands::command_label(&cli.command), res.echo.clone());
    let mut side = Vec::new();
    match result {
        Ok(o) => {
            env.status = o.status;
            env.payload = o.payload;
            env.warnings = o.warnings;
            side = o.side;
        }
        Err(commands::CmdError::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("{GRAMMAR}");
            return ExitCode::from(2);
        }
        Err(commands::CmdError::Core(e)) => env.fail_with(&e),
    }
    env.timing.wall_seconds = start.elapsed().as_secs_f64();
    let json = match env.to_json() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut written = Vec::new();
    for (file, contents) in std::iter::once((format!("{name}.json"), json.clone())).chain(side) {
        match output::write_atomic(&out_dir, &file, &contents) {
            Ok(p) => written.push(p),
            Err(e) => return usage_exit(&format!("cannot write {}: {e}", out_dir.join(&file).display())),
        }
    }
    if cli.common.print {
        print!("{json}");
    }
    let status = match env.status {
        Status::Ok => "ok",
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    };
    eprintln!("{name}: {status}");
    for p in &written {
        eprintln!("  wrote {}", p.display());
    }
    if let Some(err) = &env.error {
        eprintln!("  {}", err.message);
    }
    match env.status {
        Status::Ok | Status::Pass => ExitCode::SUCCESS,
        Status::Fail | Status::Error => ExitCode::from(1),
    }
}
