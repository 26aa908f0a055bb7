//! Command-line front end: renders the parameter plane, classifies single
//! parameters, solves boundary points, traces accessibility paths and
//! prints the model constants.
//!
//! Exit codes: 0 success, 2 partial solver/trace failure, 3 config error.

mod commands;
mod config;
mod ppm;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

use commands::Outcome;
use config::{parse_complex, FileConfig};

#[derive(Parser)]
#[command(name = "shiftlocus", version, about = "Parameter-space atlas for a meromorphic family with two asymptotic values")]
struct Cli {
    /// TOML configuration file; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Multiplier of the fixed point at the origin, `re` or `re,im`.
    #[arg(long, global = true)]
    rho: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a window of parameters and write a PPM image plus sidecar.
    Render(RenderCli),
    /// Classify a single parameter.
    Classify(ClassifyCli),
    /// Solve boundary parameters (virtual centers, parabolics, Misiurewicz-like).
    Solve(SolveCli),
    /// Trace an accessibility path toward a boundary parameter.
    Trace(TraceCli),
    /// Print the model constants (lambda0, q0, r0, poles).
    ModelInfo,
}

#[derive(Args)]
struct RenderCli {
    /// Window as `re_min,re_max,im_min,im_max`.
    #[arg(long)]
    window: Option<String>,
    /// Resolution as `WxH`.
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output PPM path (the JSON sidecar goes next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyCli {
    /// Parameter as `re` or `re,im`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct SolveCli {
    /// One of `virtual-center`, `parabolic`, `misiurewicz`.
    #[arg(long)]
    kind: Option<String>,
    /// Itinerary word; repeatable.
    #[arg(long = "word")]
    words: Vec<String>,
    /// Newton seed for the parameter, `re,im` (default: from a trace).
    #[arg(long)]
    seed: Option<String>,
    /// Newton seed for the cycle point, `re,im`.
    #[arg(long)]
    seed_z: Option<String>,
    #[arg(long, default_value_t = 64)]
    samples_per_branch: usize,
    /// Output JSON path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceCli {
    /// Target itinerary word.
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    samples_per_branch: Option<usize>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Default multiplier used throughout the workflows.
const DEFAULT_RHO: Complex64 = Complex64::new(2.0 / 3.0, 0.0);

fn resolve_rho(cli_rho: &Option<String>, file: &FileConfig) -> Result<Complex64> {
    if let Some(text) = cli_rho {
        return parse_complex(text);
    }
    if let Some(rho) = file.rho()? {
        return Ok(rho);
    }
    Ok(DEFAULT_RHO)
}

fn run() -> Result<Outcome> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let rho = resolve_rho(&cli.rho, &file)?;

    match &cli.command {
        Command::Render(args) => {
            let window = match (&args.window, file.render.window) {
                (Some(text), _) => {
                    let nums: Vec<f64> = text
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| anyhow!("bad window `{text}`"))?;
                    match nums.as_slice() {
                        [a, b, c, d] => [*a, *b, *c, *d],
                        _ => return Err(anyhow!("window needs four numbers")),
                    }
                }
                (None, Some(w)) => w,
                (None, None) => [-2.0, 6.0, -4.0, 4.0],
            };
            let (width, height) = match (&args.size, file.render.size) {
                (Some(text), _) => {
                    let (w, h) = text
                        .split_once(['x', 'X'])
                        .ok_or_else(|| anyhow!("size must look like 400x400"))?;
                    (w.trim().parse()?, h.trim().parse()?)
                }
                (None, Some([w, h])) => (w, h),
                (None, None) => (400, 400),
            };
            let out = args
                .out
                .clone()
                .or_else(|| file.render.out.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("plane.ppm"));
            commands::cmd_render(&commands::RenderArgs {
                rho,
                window,
                width,
                height,
                max_iter: args.max_iter.or(file.render.max_iter).unwrap_or(2000),
                out,
            })
        }
        Command::Classify(args) => {
            let lambda = match (&args.lambda, file.classify.lambda) {
                (Some(text), _) => parse_complex(text)?,
                (None, Some([re, im])) => Complex64::new(re, im),
                (None, None) => return Err(anyhow!("classify needs --lambda")),
            };
            let max_iter = args.max_iter.or(file.classify.max_iter).unwrap_or(2000);
            commands::cmd_classify(rho, lambda, max_iter)
        }
        Command::Solve(args) => {
            let kind = args
                .kind
                .clone()
                .or(file.solve.kind.clone())
                .ok_or_else(|| anyhow!("solve needs --kind"))?;
            let words = if args.words.is_empty() {
                file.solve.words.clone()
            } else {
                args.words.clone()
            };
            let seed = match (&args.seed, file.solve.seed) {
                (Some(text), _) => Some(parse_complex(text)?),
                (None, Some([re, im])) => Some(Complex64::new(re, im)),
                (None, None) => None,
            };
            let seed_z = match (&args.seed_z, file.solve.seed_z) {
                (Some(text), _) => Some(parse_complex(text)?),
                (None, Some([re, im])) => Some(Complex64::new(re, im)),
                (None, None) => None,
            };
            let out = args
                .out
                .clone()
                .or_else(|| file.solve.out.as_ref().map(PathBuf::from));
            commands::cmd_solve(&commands::SolveArgs {
                rho,
                kind,
                words,
                seed,
                seed_z,
                samples_per_branch: args.samples_per_branch,
                out,
            })
        }
        Command::Trace(args) => {
            let word = args
                .word
                .clone()
                .or(file.trace.word.clone())
                .ok_or_else(|| anyhow!("trace needs --word"))?;
            let samples = args
                .samples_per_branch
                .or(file.trace.samples_per_branch)
                .unwrap_or(64);
            let out = args
                .out
                .clone()
                .or_else(|| file.trace.out.as_ref().map(PathBuf::from));
            commands::cmd_trace(&commands::TraceArgs {
                rho,
                word,
                samples_per_branch: samples,
                out,
            })
        }
        Command::ModelInfo => commands::cmd_model_info(rho),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
