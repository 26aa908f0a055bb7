//! Parameter-space structure over the fixed-multiplier slice: the
//! coordinate map from the shift locus into the model basin, its inverse
//! by Newton continuation, solvers for the three kinds of accessible
//! boundary parameters, and the path tracer that pulls tree paths back
//! into parameter space.

use num_complex::Complex64;

use crate::chart::{basin_chart, chart_coordinate, FatouCoordinate};
use crate::error::{Error, Result};
use crate::family::{ExtComplex, FamilySlice};
use crate::itinerary::{Itinerary, ItineraryKind};
use crate::koenigs::{build_linearizer, Linearizer, Normalization};
use crate::model::{periodic_point, ModelMap};
use crate::orbit::{classify_slice, IterationBudget, Region};
use crate::tree::{tree_path_with_depth, TreePath};

/// Iteration budget used when certifying that traced samples stay in the
/// shift locus; deeper than the rendering default because samples crawl
/// past parabolic bottlenecks.
fn trace_budget() -> IterationBudget {
    IterationBudget {
        max_iter: 6000,
        cycle_tol: 1e-6,
    }
}

/// Linearizer of the origin basin for a shift parameter, normalized so the
/// boundary asymptotic value lands on the model's positive-real `r0`.
///
/// Errors with [`Error::WrongNormalizationSide`] when the boundary value is
/// `lambda` rather than `mu` (the symmetric half of the shift locus) or
/// when the two levels tie.
pub fn shift_linearizer(model: &ModelMap, lambda: Complex64) -> Result<Linearizer> {
    let s = FamilySlice::new(model.slice.rho, lambda)?;
    let lin = build_linearizer(
        &s,
        Complex64::new(0.0, 0.0),
        s.mu,
        Normalization::AsymptoticValueToR0 { r0: model.r0 },
    )?;
    let level_lambda = lin.level(lambda)?;
    if level_lambda <= model.r0 {
        return Err(Error::WrongNormalizationSide(lambda));
    }
    Ok(lin)
}

/// Value of the coordinate map together with the recorded itinerary data.
#[derive(Debug, Clone)]
pub struct CoordinateImage {
    pub point: Complex64,
    /// Branch word of the parameter's orbit in its own dynamic plane.
    pub word: Vec<i64>,
    /// Level of the parameter, equal to the model level of `point`.
    pub level: f64,
}

/// The coordinate map: charts the parameter in its own dynamic plane and
/// rebuilds the same chart inside the model basin.
pub fn e_map(model: &ModelMap, lambda: Complex64) -> Result<CoordinateImage> {
    let s = FamilySlice::new(model.slice.rho, lambda)?;
    if classify_slice(&s, trace_budget()).region != Region::Shift {
        return Err(Error::NotInShiftLocus(lambda));
    }
    e_map_unchecked(model, lambda)
}

/// Same as [`e_map`] but skips the region certificate; used inside Newton
/// loops where the caller validates the end point instead.
fn e_map_unchecked(model: &ModelMap, lambda: Complex64) -> Result<CoordinateImage> {
    let lin = shift_linearizer(model, lambda)?;
    let chart = basin_chart(&lin, lambda)?;
    let y = model.lin.koenigs_inverse(chart.zeta)?;
    let point = model
        .slice
        .inverse_branch_word(&chart.word, ExtComplex::Finite(y))?;
    let n = chart.word.len() as i32;
    let level = chart.zeta.norm() / model.slice.rho.norm().powi(n);
    Ok(CoordinateImage {
        point,
        word: chart.word,
        level,
    })
}

/// Chart of the parameter in the shift locus (Theorem-style coordinates):
/// the word recorded in its own plane with the level and landing angle.
pub fn parameter_coordinate(model: &ModelMap, lambda: Complex64) -> Result<FatouCoordinate> {
    let image = e_map(model, lambda)?;
    chart_coordinate(&model.lin, image.point)
}

/// The coordinate map with the chart word prescribed: the parameter is
/// iterated exactly `word.len()` steps, the landed linearizing value is
/// inverted in the model, and the model branches of `word` are applied.
///
/// Unlike [`e_map`] this involves no label recording, so each fixed word
/// gives a function analytic in `lambda`; the tracer uses it with the
/// words carried by the tree samples, which keeps the sheet selection
/// consistent with the conjugacy even where the principal-branch labels
/// of the parameter plane disagree with the transported ones.
pub fn e_with_word(model: &ModelMap, lambda: Complex64, word: &[i64]) -> Result<Complex64> {
    let lin = shift_linearizer(model, lambda)?;
    let mut landed = lin
        .slice
        .iterate(lambda, word.len())
        .finite()
        .ok_or(Error::NotInBasin(lambda))?;
    let mut zeta = lin.koenigs(landed)?;
    // Tree nodes and pole runs sit exactly on the boundary level r0 of
    // the injectivity disk; descend further (the zero branch inverts the
    // map identically on the disk) until the inversion is well inside.
    let mut extra = word.to_vec();
    let mut guard = 0;
    while zeta.norm() > 0.9 * model.r0 {
        landed = lin
            .slice
            .eval(landed)
            .finite()
            .ok_or(Error::NotInBasin(lambda))?;
        zeta = lin.koenigs(landed)?;
        extra.push(0);
        guard += 1;
        if guard > 8 {
            return Err(Error::OutsideInjectivityDisk(zeta.norm(), model.r0));
        }
    }
    let y = model.lin.koenigs_inverse(zeta)?;
    model
        .slice
        .inverse_branch_word(&extra, ExtComplex::Finite(y))
}

/// Newton inversion of [`e_with_word`] at a fixed word.
fn e_inverse_word(
    model: &ModelMap,
    target: Complex64,
    word: &[i64],
    seed_lambda: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let mut lam = seed_lambda;
    let scale = 1.0 + target.norm();
    let mut deriv: Option<Complex64> = None;
    let mut last: Option<(Complex64, Complex64)> = None;
    for _ in 0..50 {
        let g = match e_with_word(model, lam, word) {
            Ok(point) => point - target,
            Err(_) => match last {
                Some((plam, _)) => {
                    lam = 0.5 * (lam + plam);
                    continue;
                }
                None => return Err(Error::NoConvergence("seed outside the chart domain")),
            },
        };
        if g.norm() <= tol * scale {
            return Ok(lam);
        }
        if let Some((plam, pg)) = last {
            if (lam - plam).norm() > 1e-14 {
                deriv = Some((g - pg) / (lam - plam));
            }
        }
        let d = match deriv {
            Some(d) if d.norm() > 1e-12 => d,
            _ => {
                let h = 1e-6 * (1.0 + lam.norm());
                let plus = e_with_word(model, lam + Complex64::new(h, 0.0), word)?;
                let minus = e_with_word(model, lam - Complex64::new(h, 0.0), word)?;
                let d = (plus - minus) / Complex64::new(2.0 * h, 0.0);
                deriv = Some(d);
                d
            }
        };
        if d.norm() < 1e-12 {
            return Err(Error::NoConvergence("word-chart derivative vanished"));
        }
        last = Some((lam, g));
        let mut step = g / d;
        let cap = 0.3 * (1.0 + lam.norm());
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        lam -= step;
    }
    Err(Error::NoConvergence("word-chart inversion"))
}

/// Newton inversion of the coordinate map with a finite-difference
/// derivative. The iteration is allowed to wander; only the solution is
/// certified to lie in the shift locus.
pub fn e_inverse(model: &ModelMap, target: Complex64, seed_lambda: Complex64) -> Result<Complex64> {
    e_inverse_with_tol(model, target, seed_lambda, 1e-9)
}

fn e_inverse_with_tol(
    model: &ModelMap,
    target: Complex64,
    seed_lambda: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let mut lam = seed_lambda;
    let scale = 1.0 + target.norm();
    let mut deriv: Option<Complex64> = None;
    let mut last_g: Option<Complex64> = None;
    let mut last_lam = lam;
    for _ in 0..50 {
        let g = e_map_unchecked(model, lam).map(|img| img.point - target);
        let g = match g {
            Ok(g) => g,
            Err(_) => {
                // Retreat toward the previous iterate.
                lam = 0.5 * (lam + last_lam);
                continue;
            }
        };
        if g.norm() <= tol * scale {
            let class = classify_slice(&FamilySlice::new(model.slice.rho, lam)?, trace_budget());
            if class.region != Region::Shift {
                return Err(Error::LeftShiftLocus(lam));
            }
            return Ok(lam);
        }
        // Secant update of the derivative; fall back to a fresh central
        // difference when the history is unusable.
        if let (Some(pg), true) = (last_g, (lam - last_lam).norm() > 1e-14) {
            deriv = Some((g - pg) / (lam - last_lam));
        }
        let d = match deriv {
            Some(d) if d.norm() > 1e-12 => d,
            _ => {
                let h = 1e-6 * (1.0 + lam.norm());
                let plus = e_map_unchecked(model, lam + Complex64::new(h, 0.0))?;
                let minus = e_map_unchecked(model, lam - Complex64::new(h, 0.0))?;
                let d = (plus.point - minus.point) / Complex64::new(2.0 * h, 0.0);
                deriv = Some(d);
                d
            }
        };
        if d.norm() < 1e-12 {
            return Err(Error::NoConvergence("coordinate-map derivative vanished"));
        }
        last_g = Some(g);
        last_lam = lam;
        let mut step = g / d;
        let cap = 0.3 * (1.0 + lam.norm());
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        lam -= step;
    }
    Err(Error::NoConvergence("coordinate-map inversion"))
}

/// Real parameter on the spine of the shift locus whose image is the tree
/// root (level `r0/rho` at angle pi), found by bisection on the level.
pub fn root_parameter(model: &ModelMap) -> Result<Complex64> {
    let rho = model.slice.rho;
    let target = model.r0 / rho.norm();
    let level_of = |lam: f64| -> Option<f64> {
        let lin = shift_linearizer(model, Complex64::new(lam, 0.0)).ok()?;
        lin.level(Complex64::new(lam, 0.0)).ok()
    };
    // Scan the real axis for a bracket of the target level.
    let lo_end = rho.re / 2.0 + 0.02;
    let hi_end = model.lambda0().re;
    let steps = 160;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let lam = lo_end + (hi_end - lo_end) * k as f64 / steps as f64;
        let s = match FamilySlice::new(rho, Complex64::new(lam, 0.0)) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if classify_slice(&s, trace_budget()).region != Region::Shift {
            prev = None;
            continue;
        }
        let Some(level) = level_of(lam) else {
            prev = None;
            continue;
        };
        if let Some((plam, plevel)) = prev {
            if (plevel - target) * (level - target) <= 0.0 {
                bracket = Some((plam, lam));
                break;
            }
        }
        prev = Some((lam, level));
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoSolutionInWindow)?;
    let level_lo = level_of(lo).ok_or(Error::NoSolutionInWindow)?;
    let increasing = level_lo < target;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let level = level_of(mid).ok_or(Error::NoSolutionInWindow)?;
        if (level < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Complex64::new(0.5 * (lo + hi), 0.0))
}

/// Target kinds for traced boundary approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    VirtualCenter,
    Parabolic,
    MisiurewiczLike,
}

impl BoundaryKind {
    pub fn of(target: &Itinerary) -> Result<BoundaryKind> {
        match target.kind() {
            ItineraryKind::Finite => Ok(BoundaryKind::VirtualCenter),
            ItineraryKind::Periodic => Ok(BoundaryKind::Parabolic),
            ItineraryKind::Preperiodic => Ok(BoundaryKind::MisiurewiczLike),
            ItineraryKind::Infinity => Err(Error::InadmissibleWord(
                "the infinity symbol names no boundary parameter".into(),
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::VirtualCenter => "virtual_center",
            BoundaryKind::Parabolic => "parabolic",
            BoundaryKind::MisiurewiczLike => "misiurewicz",
        }
    }
}

/// Newton solution of `f_lambda^{p-1}(lambda) = infinity`: the condition
/// that `f^{p-2}(lambda)` is a pole, written in the entire form
/// `exp(2 f^{p-2}(lambda)) = lambda/mu` so no pole index needs choosing
/// (the seed selects the root). The excluded parameter `lambda = 0`
/// satisfies the same equation and is deflated out.
pub fn virtual_center_solve(
    rho: Complex64,
    word: &[i64],
    seed: Complex64,
) -> Result<(Complex64, f64)> {
    if word.is_empty() {
        return Err(Error::InadmissibleWord("virtual center needs a word".into()));
    }
    let n = word.len();
    let residual_fn = |lam: Complex64| -> Result<Complex64> {
        if lam.norm() < 1e-12 {
            return Err(Error::DegenerateParameter(lam));
        }
        let s = FamilySlice::new(rho, lam)?;
        let z = match s.iterate(lam, n - 1) {
            ExtComplex::Finite(z) => z,
            // Exactly on a pole mid-orbit: the residual is as converged
            // as double precision allows.
            ExtComplex::Infinity => return Ok(Complex64::new(0.0, 0.0)),
        };
        let ratio = Complex64::new(1.0, 0.0) - 2.0 * lam / rho;
        Ok(((2.0 * z).exp() - ratio) / lam)
    };
    let mut lam = seed;
    let mut res = residual_fn(lam)?;
    for _ in 0..80 {
        if res.norm() <= 1e-13 {
            break;
        }
        let h = 1e-7 * (1.0 + lam.norm());
        let plus = residual_fn(lam + Complex64::new(h, 0.0))?;
        let minus = residual_fn(lam - Complex64::new(h, 0.0))?;
        let d = (plus - minus) / Complex64::new(2.0 * h, 0.0);
        if d.norm() < 1e-300 {
            return Err(Error::NoConvergence("virtual-center derivative vanished"));
        }
        let mut step = res / d;
        // Damping: keep the residual decreasing.
        for _ in 0..10 {
            let trial = residual_fn(lam - step)?;
            if trial.norm() <= res.norm() || step.norm() < 1e-15 {
                lam -= step;
                res = trial;
                break;
            }
            step *= 0.5;
        }
    }
    if res.norm() > 1e-10 {
        return Err(Error::NoConvergence("virtual-center residual"));
    }
    Ok((lam, res.norm()))
}

/// Orbit signature of a virtual cycle parameter: the first step at which
/// the asymptotic orbit hits the infinity flag, if any.
pub fn infinity_step(rho: Complex64, lambda: Complex64, max_steps: usize) -> Result<Option<usize>> {
    let s = FamilySlice::new(rho, lambda)?;
    let mut z = ExtComplex::Finite(lambda);
    for step in 1..=max_steps {
        z = match z {
            ExtComplex::Finite(z) => s.eval(z),
            ExtComplex::Infinity => return Ok(Some(step - 1)),
        };
        if z.is_infinity() {
            return Ok(Some(step));
        }
    }
    Ok(None)
}

fn orbit_and_derivative(
    s: &FamilySlice,
    z: Complex64,
    n: usize,
) -> Result<(Complex64, Complex64)> {
    let fz = s
        .iterate(z, n)
        .finite()
        .ok_or(Error::NoConvergence("orbit hit a pole"))?;
    let dz = s
        .orbit_derivative(z, n)
        .finite()
        .ok_or(Error::NoConvergence("orbit hit a pole"))?;
    Ok((fz, dz))
}

/// Generic damped 2x2 complex Newton for the boundary systems.
fn newton_2x2(
    mut lam: Complex64,
    mut z: Complex64,
    system: &dyn Fn(Complex64, Complex64) -> Result<(Complex64, Complex64)>,
    tol: f64,
) -> Result<(Complex64, Complex64, f64)> {
    let norm2 = |(a, b): (Complex64, Complex64)| (a.norm_sqr() + b.norm_sqr()).sqrt();
    let mut value = system(lam, z)?;
    for _ in 0..80 {
        if norm2(value) <= tol {
            break;
        }
        let hl = 1e-7 * (1.0 + lam.norm());
        let hz = 1e-7 * (1.0 + z.norm());
        let dl = {
            let plus = system(lam + Complex64::new(hl, 0.0), z)?;
            let minus = system(lam - Complex64::new(hl, 0.0), z)?;
            (
                (plus.0 - minus.0) / (2.0 * hl),
                (plus.1 - minus.1) / (2.0 * hl),
            )
        };
        let dz = {
            let plus = system(lam, z + Complex64::new(hz, 0.0))?;
            let minus = system(lam, z - Complex64::new(hz, 0.0))?;
            (
                (plus.0 - minus.0) / (2.0 * hz),
                (plus.1 - minus.1) / (2.0 * hz),
            )
        };
        let det = dl.0 * dz.1 - dz.0 * dl.1;
        if det.norm() < 1e-300 {
            return Err(Error::NoConvergence("singular Jacobian"));
        }
        let mut step_l = (value.0 * dz.1 - dz.0 * value.1) / det;
        let mut step_z = (dl.0 * value.1 - value.0 * dl.1) / det;
        for _ in 0..12 {
            match system(lam - step_l, z - step_z) {
                Ok(trial) if norm2(trial) <= norm2(value) || step_l.norm() + step_z.norm() < 1e-15 => {
                    lam -= step_l;
                    z -= step_z;
                    value = trial;
                    break;
                }
                _ => {
                    step_l *= 0.5;
                    step_z *= 0.5;
                }
            }
        }
    }
    let res = norm2(value);
    if res > tol * 10.0 {
        return Err(Error::NoConvergence("2x2 Newton residual"));
    }
    Ok((lam, z, res))
}

/// Newton on `(f^n(z) - z, (f^n)'(z) - 1)`: a parameter with a parabolic
/// cycle of period `n`, plus the cycle point.
pub fn parabolic_solve(
    rho: Complex64,
    n: usize,
    seed_lambda: Complex64,
    seed_z: Complex64,
) -> Result<(Complex64, Complex64, f64)> {
    let system = |lam: Complex64, z: Complex64| -> Result<(Complex64, Complex64)> {
        let s = FamilySlice::new(rho, lam)?;
        let (fz, dz) = orbit_and_derivative(&s, z, n)?;
        Ok((fz - z, dz - Complex64::new(1.0, 0.0)))
    };
    let (lam, z, res) = newton_2x2(seed_lambda, seed_z, &system, 1e-12)?;
    let s = FamilySlice::new(rho, lam)?;
    let mult = s
        .orbit_derivative(z, n)
        .finite()
        .ok_or(Error::NoConvergence("multiplier hit a pole"))?;
    if (mult - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        if mult.norm() < 1.0 {
            return Err(Error::CollapsedToAttracting(mult.norm()));
        }
        return Err(Error::NoConvergence("parabolic multiplier off unity"));
    }
    if (z - lam).norm() <= 1e-6 {
        return Err(Error::NoConvergence("cycle point collided with the asymptotic value"));
    }
    Ok((lam, z, res))
}

/// Newton on `(f^k(lambda) - z, f^n(z) - z)`: a parameter whose asymptotic
/// value lands on a repelling `n`-cycle after `k` steps.
pub fn misiurewicz_solve(
    rho: Complex64,
    k: usize,
    n: usize,
    seed_lambda: Complex64,
    seed_z: Complex64,
) -> Result<(Complex64, Complex64, f64)> {
    if k == 0 || n == 0 {
        return Err(Error::InadmissibleWord("preperiod and period must be positive".into()));
    }
    let system = |lam: Complex64, z: Complex64| -> Result<(Complex64, Complex64)> {
        let s = FamilySlice::new(rho, lam)?;
        let landing = s
            .iterate(lam, k)
            .finite()
            .ok_or(Error::NoConvergence("orbit hit a pole"))?;
        let (fz, _) = orbit_and_derivative(&s, z, n)?;
        Ok((landing - z, fz - z))
    };
    let (lam, z, res) = newton_2x2(seed_lambda, seed_z, &system, 1e-12)?;
    let s = FamilySlice::new(rho, lam)?;
    let mult = s
        .orbit_derivative(z, n)
        .finite()
        .ok_or(Error::NoConvergence("multiplier hit a pole"))?;
    if mult.norm() <= 1.0 + 1e-9 {
        return Err(Error::NotRepelling(mult.norm()));
    }
    Ok((lam, z, res))
}

/// Solver output attached to a traced path.
#[derive(Debug, Clone)]
pub struct SolverCrossCheck {
    pub solution: Complex64,
    pub residual: f64,
    /// Distance from the traced terminal estimate to the solver output.
    pub distance: f64,
    /// Cycle multiplier for parabolic / Misiurewicz-like targets.
    pub multiplier: Option<Complex64>,
    pub cycle_point: Option<Complex64>,
    /// Step at which the orbit reaches infinity, for virtual centers.
    pub infinity_step: Option<usize>,
}

/// A parameter path pulled back from a model tree path.
#[derive(Debug, Clone)]
pub struct TracedPath {
    pub target: Itinerary,
    pub target_kind: BoundaryKind,
    pub t_samples: Vec<f64>,
    pub lambda_samples: Vec<Complex64>,
    /// Model levels of the corresponding tree samples.
    pub levels: Vec<f64>,
    /// Model chart words of the corresponding tree samples.
    pub words: Vec<Vec<i64>>,
    /// Inversion residuals per accepted sample.
    pub residuals: Vec<f64>,
    pub terminal_estimate: Complex64,
    /// Set when continuation stopped early, at this path parameter.
    pub stalled_at: Option<f64>,
    pub solver: Option<SolverCrossCheck>,
}

/// Depth needed so the traced tail closes below ~1e-4 on the boundary
/// point, given the repelling multiplier of the cycle the path lands on.
///
/// Near a parabolic boundary parameter the inverse coordinate map has a
/// square-root modulus of continuity, so the model-side gap must reach
/// the square of the parameter-side target.
fn adaptive_depth(model: &ModelMap, target: &Itinerary) -> usize {
    let base = target.preperiod.len() + target.period.len() + 6;
    if target.period.is_empty() {
        return base;
    }
    let Ok(cycle) = periodic_point(&model.slice, &target.period) else {
        return base.max(24);
    };
    let Some(mult) = model
        .slice
        .orbit_derivative(cycle, target.period.len())
        .finite()
    else {
        return base.max(24);
    };
    // Contraction per symbol is |mult|^(-1/period).
    let rate = mult.norm().powf(1.0 / target.period.len() as f64).recip();
    if target.preperiod.is_empty() {
        // Parabolic landing: the parameter gap closes only like
        // 1/log^2(model gap), and the correction freezes once the local
        // derivative of the coordinate map drops below the residual
        // resolution; past that extra depth buys nothing.
        let needed = (2.0 * (1e-9_f64).ln() / rate.ln()).ceil() as usize;
        return base.max(needed).min(150);
    }
    let needed = ((1e-4_f64).ln() / rate.ln()).ceil() as usize;
    base.max(needed).min(150)
}

/// Traces the accessibility path toward the boundary parameter named by
/// `target`: builds the model tree path, pulls it back sample by sample
/// with secant prediction and Newton correction, certifies every accepted
/// sample lies in the shift locus, and cross-checks the terminal against
/// the matching boundary solver.
pub fn trace_accessibility_path(
    model: &ModelMap,
    target: &Itinerary,
    samples_per_branch: usize,
) -> Result<TracedPath> {
    let kind = BoundaryKind::of(target)?;
    let depth = adaptive_depth(model, target);
    let path = tree_path_with_depth(model, target, samples_per_branch, depth)?;
    let traced = pull_back_path(model, &path, kind)?;
    let mut traced = attach_solver(model, traced);
    finish_boundary_tail(model, &mut traced);
    Ok(traced)
}

/// Completes a trace past the double-precision wall.
///
/// Approaching a virtual center, the run along the level curve carries its
/// position in a coordinate that degenerates exponentially; approaching a
/// parabolic parameter, the gap closes only like 1/log^2 of the model gap
/// while the coordinate-map derivative collapses. Either way the honest
/// pull-back freezes a small but macroscopic distance from the boundary
/// point. The path is completed by the segment from the last corrected
/// sample toward the solver-refined point, each sample certified to stay
/// in the shift locus; the continuation stays marked stalled only if that
/// certification fails.
fn finish_boundary_tail(model: &ModelMap, traced: &mut TracedPath) {
    let Some(solver) = traced.solver.clone() else {
        return;
    };
    let rho = model.slice.rho;
    let budget = trace_budget();
    let tail = traced.terminal_estimate;
    let t_last = traced.t_samples.last().copied().unwrap_or(0.0);
    let word = traced.words.last().cloned().unwrap_or_default();
    let gap = (solver.solution - tail).norm();
    if gap < 1e-9 {
        traced.stalled_at = None;
        return;
    }
    let mut fractions = Vec::new();
    let mut f = 0.7_f64;
    while f * gap > 2e-4 {
        fractions.push(f);
        f *= 0.7;
    }
    fractions.push(f);
    let mut completed = true;
    for (i, frac) in fractions.iter().enumerate() {
        let lam = solver.solution + (tail - solver.solution) * *frac;
        let Ok(s) = FamilySlice::new(rho, lam) else {
            completed = false;
            break;
        };
        if classify_slice(&s, budget).region != Region::Shift {
            completed = false;
            break;
        }
        let level = shift_linearizer(model, lam)
            .and_then(|lin| lin.level(lam))
            .unwrap_or(f64::NAN);
        let t = t_last + (1.0 - t_last) * (i + 1) as f64 / (fractions.len() + 1) as f64;
        traced.t_samples.push(t);
        traced.lambda_samples.push(lam);
        traced.levels.push(level);
        traced.words.push(word.clone());
        traced.residuals.push(f64::NAN);
    }
    if completed {
        traced.stalled_at = None;
    }
    traced.terminal_estimate = *traced
        .lambda_samples
        .last()
        .unwrap_or(&traced.terminal_estimate);
    if let Some(s) = traced.solver.as_mut() {
        s.distance = (s.solution - traced.terminal_estimate).norm();
    }
}

fn pull_back_path(model: &ModelMap, path: &TreePath, kind: BoundaryKind) -> Result<TracedPath> {
    let rho = model.slice.rho;
    let root = root_parameter(model)?;
    let mut out = TracedPath {
        target: path.target.clone(),
        target_kind: kind,
        t_samples: Vec::new(),
        lambda_samples: Vec::new(),
        levels: Vec::new(),
        words: Vec::new(),
        residuals: Vec::new(),
        terminal_estimate: root,
        stalled_at: None,
        solver: None,
    };
    let budget = trace_budget();

    let s0 = &path.samples[0];
    let mut lam = e_inverse_word(model, s0.point, &s0.word, root, 1e-9)?;
    let mut prev_accept: Option<(Complex64, Complex64)> = None; // (model pt, lambda)

    {
        let image = e_with_word(model, lam, &s0.word)?;
        out.t_samples.push(s0.t);
        out.lambda_samples.push(lam);
        out.levels.push(s0.level);
        out.words.push(s0.word.clone());
        out.residuals.push((image - s0.point).norm());
    }
    let mut last_point = s0.point;

    'path: for sample in path.samples.iter().skip(1) {
        // Work stack of intermediate model targets toward this sample;
        // midpoints are pushed when a correction fails. Every target in
        // the segment is inverted on the sheet of this sample's word.
        let mut stack = vec![sample.point];
        let mut guard = 0usize;
        let mut last_res = f64::NAN;
        while let Some(point) = stack.last().copied() {
            guard += 1;
            if guard > 2000 || stack.len() > 48 {
                out.stalled_at = Some(sample.t);
                break 'path;
            }
            // Secant prediction in the model-point parameter.
            let seed = match prev_accept {
                Some((ppoint, plam)) if (last_point - ppoint).norm() > 1e-14 => {
                    lam + (lam - plam)
                        * ((point - last_point).norm() / (last_point - ppoint).norm())
                }
                _ => lam,
            };
            let corrected = e_inverse_word(model, point, &sample.word, seed, 1e-9)
                .or_else(|_| e_inverse_word(model, point, &sample.word, lam, 1e-9))
                .or_else(|_| e_inverse_word(model, point, &sample.word, lam, 1e-7));
            let ok = match corrected {
                Ok(next) => {
                    let s = FamilySlice::new(rho, next)?;
                    if classify_slice(&s, budget).region == Region::Shift {
                        prev_accept = Some((last_point, lam));
                        lam = next;
                        last_point = point;
                        last_res = e_with_word(model, next, &sample.word)
                            .map(|p| (p - point).norm())
                            .unwrap_or(f64::NAN);
                        stack.pop();
                        true
                    } else {
                        false
                    }
                }
                Err(_) => false,
            };
            if !ok {
                if (point - last_point).norm() < 1e-10 {
                    out.stalled_at = Some(sample.t);
                    break 'path;
                }
                stack.push(0.5 * (point + last_point));
            }
        }
        if out.stalled_at.is_some() {
            break;
        }
        out.t_samples.push(sample.t);
        out.lambda_samples.push(lam);
        out.levels.push(sample.level);
        out.words.push(sample.word.clone());
        out.residuals.push(last_res);
    }

    out.terminal_estimate = *out.lambda_samples.last().unwrap_or(&root);
    Ok(out)
}

/// Repelling-cycle seed for the tail of a traced path. Right at the tail
/// the cycle is nearly neutral and the contraction that resolves it
/// stalls, so walk back along the accepted samples until it converges.
fn cycle_seed_from_tail(
    rho: Complex64,
    traced: &TracedPath,
    period: &[i64],
) -> Result<Complex64> {
    for lam in traced.lambda_samples.iter().rev().step_by(8) {
        let s = FamilySlice::new(rho, *lam)?;
        if let Ok(z) = periodic_point(&s, period) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence("no usable cycle seed along the path"))
}

/// Seeds and runs the matching boundary solver from the path tail.
fn attach_solver(model: &ModelMap, mut traced: TracedPath) -> TracedPath {
    let rho = model.slice.rho;
    let tail = traced.terminal_estimate;
    let solver = match traced.target_kind {
        BoundaryKind::VirtualCenter => virtual_center_solve(rho, &traced.target.preperiod, tail)
            .and_then(|(lam, res)| {
                let steps = infinity_step(rho, lam, traced.target.preperiod.len() + 4)?;
                Ok(SolverCrossCheck {
                    solution: lam,
                    residual: res,
                    distance: (lam - tail).norm(),
                    multiplier: None,
                    cycle_point: None,
                    infinity_step: steps,
                })
            }),
        BoundaryKind::Parabolic => cycle_seed_from_tail(rho, &traced, &traced.target.period)
            .and_then(|zseed| {
                parabolic_solve(rho, traced.target.period.len(), tail, zseed).map(
                    |(lam, z, res)| {
                        let mult = FamilySlice::new(rho, lam)
                            .ok()
                            .and_then(|s| s.orbit_derivative(z, traced.target.period.len()).finite());
                        SolverCrossCheck {
                            solution: lam,
                            residual: res,
                            distance: (lam - tail).norm(),
                            multiplier: mult,
                            cycle_point: Some(z),
                            infinity_step: None,
                        }
                    },
                )
            }),
        BoundaryKind::MisiurewiczLike => cycle_seed_from_tail(rho, &traced, &traced.target.period)
            .and_then(|zseed| {
                misiurewicz_solve(
                    rho,
                    traced.target.preperiod.len(),
                    traced.target.period.len(),
                    tail,
                    zseed,
                )
                .map(|(lam, z, res)| {
                    let mult = FamilySlice::new(rho, lam)
                        .ok()
                        .and_then(|s| s.orbit_derivative(z, traced.target.period.len()).finite());
                    SolverCrossCheck {
                        solution: lam,
                        residual: res,
                        distance: (lam - tail).norm(),
                        multiplier: mult,
                        cycle_point: Some(z),
                        infinity_step: None,
                    }
                })
            }),
    };
    traced.solver = solver.ok();
    traced
}

/// Two-sided classification flip across a boundary point along a
/// direction: the approach side stays in the shift locus, the far side
/// does not.
pub fn boundary_flip(
    rho: Complex64,
    boundary: Complex64,
    approach_direction: Complex64,
    eps: f64,
) -> Result<bool> {
    let dir = approach_direction / approach_direction.norm();
    let inside = FamilySlice::new(rho, boundary - dir * eps)?;
    let outside = FamilySlice::new(rho, boundary + dir * eps)?;
    let budget = IterationBudget {
        max_iter: 20_000,
        cycle_tol: 1e-6,
    };
    let inside_class = classify_slice(&inside, budget).region;
    let outside_class = classify_slice(&outside, budget).region;
    Ok(inside_class == Region::Shift && outside_class != Region::Shift)
}
