//! Implementations of the CLI subcommands.

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};

use shiftlocus_core::atlas::{
    infinity_step, misiurewicz_solve, parabolic_solve, trace_accessibility_path,
    virtual_center_solve, BoundaryKind,
};
use shiftlocus_core::itinerary::Itinerary;
use shiftlocus_core::model::{model_setup, periodic_point, ModelMap};
use shiftlocus_core::orbit::{classify_parameter, IterationBudget, Region};
use shiftlocus_core::raster::{render_parameter_plane, RasterJob, Window};
use shiftlocus_core::FamilySlice;

use crate::ppm;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status carried back to `main`.
pub enum Outcome {
    Success,
    /// At least one requested solve or trace did not converge.
    Partial,
}

fn thread_cap() -> Option<usize> {
    std::env::var("ATLAS_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

fn region_name(region: Region) -> &'static str {
    match region {
        Region::Shift => "shift",
        Region::MLambda => "m_lambda",
        Region::MMu => "m_mu",
        Region::Unresolved => "unresolved",
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => {
            std::fs::write(path, bytes)
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- render

pub struct RenderArgs {
    pub rho: Complex64,
    pub window: [f64; 4],
    pub width: usize,
    pub height: usize,
    pub max_iter: usize,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct RenderSidecar {
    version: &'static str,
    rho: [f64; 2],
    window: [f64; 4],
    resolution: [usize; 2],
    max_iter: usize,
    legend: ppm::Legend,
    region_counts: std::collections::BTreeMap<String, usize>,
}

pub fn cmd_render(args: &RenderArgs) -> Result<Outcome> {
    let window = Window {
        re_min: args.window[0],
        re_max: args.window[1],
        im_min: args.window[2],
        im_max: args.window[3],
    };
    if !window.is_valid() || args.width == 0 || args.height == 0 {
        bail!("invalid raster window or resolution");
    }
    let job = RasterJob {
        rho: args.rho,
        window,
        width: args.width,
        height: args.height,
        budget: IterationBudget::with_max_iter(args.max_iter),
        threads: thread_cap(),
    };
    let grid = render_parameter_plane(&job)?;
    let bytes = ppm::encode_ppm(&grid);
    std::fs::write(&args.out, &bytes)
        .with_context(|| format!("cannot write {}", args.out.display()))?;

    let mut counts = std::collections::BTreeMap::new();
    for cell in &grid.cells {
        *counts.entry(region_name(cell.region).to_string()).or_insert(0) += 1;
    }
    let sidecar = RenderSidecar {
        version: VERSION,
        rho: [args.rho.re, args.rho.im],
        window: args.window,
        resolution: [args.width, args.height],
        max_iter: args.max_iter,
        legend: ppm::legend(),
        region_counts: counts,
    };
    let sidecar_path = args.out.with_extension("json");
    std::fs::write(&sidecar_path, serde_json::to_vec_pretty(&sidecar)?)
        .with_context(|| format!("cannot write {}", sidecar_path.display()))?;
    eprintln!(
        "wrote {} and {}",
        args.out.display(),
        sidecar_path.display()
    );
    Ok(Outcome::Success)
}

// -------------------------------------------------------------- classify

pub fn cmd_classify(rho: Complex64, lambda: Complex64, max_iter: usize) -> Result<Outcome> {
    let class = classify_parameter(rho, lambda, IterationBudget::with_max_iter(max_iter))
        .map_err(|e| anyhow!("{e}"))?;
    let record = json!({
        "version": VERSION,
        "rho": complex_json(rho),
        "lambda": complex_json(lambda),
        "region": region_name(class.region),
        "period_lambda": class.period_lambda,
        "period_mu": class.period_mu,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(Outcome::Success)
}

// ----------------------------------------------------------------- solve

pub struct SolveArgs {
    pub rho: Complex64,
    pub kind: String,
    pub words: Vec<String>,
    pub seed: Option<Complex64>,
    pub seed_z: Option<Complex64>,
    pub samples_per_branch: usize,
    pub out: Option<PathBuf>,
}

fn parse_kind(kind: &str) -> Result<BoundaryKind> {
    match kind {
        "virtual-center" | "virtual_center" => Ok(BoundaryKind::VirtualCenter),
        "parabolic" => Ok(BoundaryKind::Parabolic),
        "misiurewicz" => Ok(BoundaryKind::MisiurewiczLike),
        other => bail!("unknown solve kind `{other}`"),
    }
}

/// Solves one word: with explicit seeds the dedicated solver runs
/// directly, otherwise the accessibility trace provides them.
fn solve_one(
    model: &ModelMap,
    kind: BoundaryKind,
    word: &Itinerary,
    seed: Option<Complex64>,
    seed_z: Option<Complex64>,
    samples_per_branch: usize,
) -> Result<serde_json::Value> {
    let rho = model.slice.rho;
    let expected_kind = BoundaryKind::of(word)?;
    if expected_kind != kind {
        bail!(
            "word `{word}` names a {} target, not {}",
            expected_kind.as_str(),
            kind.as_str()
        );
    }
    let (lambda, residual, orbit) = match kind {
        BoundaryKind::VirtualCenter => {
            let seed = match seed {
                Some(s) => s,
                None => {
                    let traced = trace_accessibility_path(model, word, samples_per_branch)?;
                    traced.terminal_estimate
                }
            };
            let (lam, res) = virtual_center_solve(rho, &word.preperiod, seed)?;
            let step = infinity_step(rho, lam, word.preperiod.len() + 4)?;
            if step != Some(word.preperiod.len()) {
                bail!(
                    "orbit signature mismatch: infinity at step {step:?}, expected {}",
                    word.preperiod.len()
                );
            }
            (lam, res, json!({ "infinity_step": step }))
        }
        BoundaryKind::Parabolic | BoundaryKind::MisiurewiczLike => {
            let (seed_lambda, seed_cycle) = match (seed, seed_z) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    let traced = trace_accessibility_path(model, word, samples_per_branch)?;
                    let solver = traced
                        .solver
                        .ok_or_else(|| anyhow!("trace produced no solver seed"))?;
                    let z = solver
                        .cycle_point
                        .ok_or_else(|| anyhow!("trace produced no cycle point"))?;
                    (seed.unwrap_or(solver.solution), seed_z.unwrap_or(z))
                }
            };
            let n = word.period.len();
            let (lam, z, res) = match kind {
                BoundaryKind::Parabolic => parabolic_solve(rho, n, seed_lambda, seed_cycle)?,
                _ => misiurewicz_solve(
                    rho,
                    word.preperiod.len(),
                    n,
                    seed_lambda,
                    seed_cycle,
                )?,
            };
            let mult = FamilySlice::new(rho, lam)?
                .orbit_derivative(z, n)
                .finite()
                .ok_or_else(|| anyhow!("multiplier hit a pole"))?;
            (
                lam,
                res,
                json!({ "cycle_point": complex_json(z), "multiplier": complex_json(mult) }),
            )
        }
    };
    Ok(json!({
        "kind": kind.as_str(),
        "rho": complex_json(rho),
        "word": word.to_string(),
        "lambda_re": lambda.re,
        "lambda_im": lambda.im,
        "residual": residual,
        "orbit": orbit,
    }))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let kind = parse_kind(&args.kind)?;
    if args.words.is_empty() {
        bail!("no words requested");
    }
    let words: Vec<Itinerary> = args
        .words
        .iter()
        .map(|w| w.parse::<Itinerary>().map_err(|e| anyhow!("{e}")))
        .collect::<Result<_>>()?;
    let model = model_setup(args.rho)?;
    let mut results = Vec::new();
    let mut errors = Vec::new();
    for word in &words {
        match solve_one(
            &model,
            kind,
            word,
            args.seed,
            args.seed_z,
            args.samples_per_branch,
        ) {
            Ok(record) => results.push(record),
            Err(e) => errors.push(json!({ "word": word.to_string(), "error": e.to_string() })),
        }
    }
    let report = json!({
        "version": VERSION,
        "rho": complex_json(args.rho),
        "kind": kind.as_str(),
        "results": results,
        "errors": errors,
    });
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    write_output(args.out.as_deref(), &bytes)?;
    if errors.is_empty() {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::Partial)
    }
}

// ----------------------------------------------------------------- trace

pub struct TraceArgs {
    pub rho: Complex64,
    pub word: String,
    pub samples_per_branch: usize,
    pub out: Option<PathBuf>,
}

fn word_field(word: &[i64]) -> String {
    let joined = word
        .iter()
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(",");
    format!("\"{joined}\"")
}

pub fn cmd_trace(args: &TraceArgs) -> Result<Outcome> {
    let target: Itinerary = args.word.parse().map_err(|e| anyhow!("{e}"))?;
    let model = model_setup(args.rho)?;
    let traced = trace_accessibility_path(&model, &target, args.samples_per_branch)?;

    let mut csv = String::new();
    csv.push_str(&format!(
        "# shiftlocus trace version={VERSION} rho={},{} target={} samples_per_branch={} kind={}\n",
        args.rho.re,
        args.rho.im,
        target,
        args.samples_per_branch,
        traced.target_kind.as_str()
    ));
    csv.push_str("t,lambda_re,lambda_im,level,word\n");
    for i in 0..traced.t_samples.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            traced.t_samples[i],
            traced.lambda_samples[i].re,
            traced.lambda_samples[i].im,
            traced.levels[i],
            word_field(&traced.words[i]),
        ));
    }
    let crosscheck = traced
        .solver
        .as_ref()
        .map(|s| format!("crosscheck:{:e}", s.distance))
        .unwrap_or_else(|| "crosscheck:unavailable".into());
    if let (Some(lam), Some(level)) = (traced.lambda_samples.last(), traced.levels.last()) {
        csv.push_str(&format!(
            "terminal,{},{},{},\"{crosscheck}\"\n",
            lam.re, lam.im, level
        ));
    }
    write_output(args.out.as_deref(), csv.as_bytes())?;
    if traced.stalled_at.is_some() {
        eprintln!(
            "continuation stalled at t = {}; partial path written",
            traced.stalled_at.unwrap()
        );
        return Ok(Outcome::Partial);
    }
    Ok(Outcome::Success)
}

// ------------------------------------------------------------ model-info

pub fn cmd_model_info(rho: Complex64) -> Result<Outcome> {
    let model = model_setup(rho)?;
    let poles: Vec<_> = (-3..=3)
        .map(|j| json!({ "j": j, "point": complex_json(model.slice.pole(j)) }))
        .collect();
    let z_fixed = periodic_point(&model.slice, &[0])?;
    let record = json!({
        "version": VERSION,
        "rho": complex_json(rho),
        "lambda0": complex_json(model.lambda0()),
        "mu0": complex_json(model.mu0()),
        "q0": complex_json(model.q0),
        "r0": model.r0,
        "repelling_fixed_point": complex_json(z_fixed),
        "poles": poles,
    });
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(Outcome::Success)
}
