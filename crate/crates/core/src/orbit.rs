//! Forward-orbit iteration with cycle detection, and the classification of
//! a parameter into the shift locus or one of the two Mandelbrot-like sets.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{ExtComplex, FamilySlice};

/// Iteration limits for orbit classification.
#[derive(Debug, Clone, Copy)]
pub struct IterationBudget {
    pub max_iter: usize,
    /// Distance tolerance for Brent cycle detection.
    pub cycle_tol: f64,
}

impl Default for IterationBudget {
    fn default() -> Self {
        IterationBudget {
            max_iter: 2000,
            cycle_tol: 1e-6,
        }
    }
}

impl IterationBudget {
    pub fn with_max_iter(max_iter: usize) -> Self {
        IterationBudget {
            max_iter,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitKind {
    AttractedToOrigin,
    AttractedToCycle,
    Unresolved,
}

/// Outcome of classifying one forward orbit.
#[derive(Debug, Clone, Copy)]
pub struct OrbitVerdict {
    pub kind: OrbitKind,
    /// Cycle period when `kind == AttractedToCycle`, 1 for the origin.
    pub period: Option<usize>,
    pub multiplier: Option<Complex64>,
    pub iterations_used: usize,
    /// A refined cycle point (0 for the origin verdict).
    pub representative: Option<Complex64>,
    /// Set when the orbit passed through a pole and was continued by an
    /// asymptotic limit; such verdicts should not be assigned a region.
    pub ambiguous: bool,
}

impl OrbitVerdict {
    fn unresolved(iterations: usize, ambiguous: bool) -> Self {
        OrbitVerdict {
            kind: OrbitKind::Unresolved,
            period: None,
            multiplier: None,
            iterations_used: iterations,
            representative: None,
            ambiguous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Shift,
    MLambda,
    MMu,
    Unresolved,
}

/// Classification of a parameter per the region definitions: the shift locus
/// is where both asymptotic values are attracted to the origin.
#[derive(Debug, Clone, Copy)]
pub struct ParameterClass {
    pub region: Region,
    pub period_lambda: Option<usize>,
    pub period_mu: Option<usize>,
}

/// Radius of the origin trap: safely inside the linearization domain.
pub fn trap_radius(s: &FamilySlice) -> f64 {
    (1.0 - s.rho.norm()) / 4.0 * s.lambda.norm().min(s.mu.norm()).min(1.0)
}

/// Classifies the forward orbit of `z0`. A pole hit is continued with the
/// given asymptotic limit and flags the verdict ambiguous.
pub fn classify_orbit_from(
    s: &FamilySlice,
    z0: Complex64,
    budget: IterationBudget,
    infinity_successor: Complex64,
) -> OrbitVerdict {
    let r_trap = trap_radius(s);
    let contraction = s.rho.norm() * (1.0 + 1e-3);
    let mut ambiguous = false;

    // Brent bookkeeping: `anchor` is the saved tortoise, `power` the
    // current window length.
    let mut anchor = z0;
    let mut anchor_step = 0usize;
    let mut power = 1usize;
    let mut lam = 0usize;

    let mut z = z0;
    for n in 0..budget.max_iter {
        // Origin trap with a one-step contraction certificate.
        if z.norm() < r_trap {
            match s.eval(z) {
                ExtComplex::Finite(w) if w.norm() <= contraction * z.norm() => {
                    return OrbitVerdict {
                        kind: OrbitKind::AttractedToOrigin,
                        period: Some(1),
                        multiplier: Some(s.rho),
                        iterations_used: n + 1,
                        representative: Some(Complex64::new(0.0, 0.0)),
                        ambiguous,
                    };
                }
                _ => {}
            }
        }

        let next = match s.eval(z) {
            ExtComplex::Finite(w) => w,
            ExtComplex::Infinity => {
                ambiguous = true;
                infinity_successor
            }
        };
        lam += 1;
        if (next - anchor).norm() < budget.cycle_tol {
            // Candidate period `lam`; confirm by Newton refinement.
            if let Ok((point, multiplier, period)) = confirm_cycle(s, next, lam) {
                if multiplier.norm() < 1.0 {
                    if point.norm() < 1e-8 {
                        return OrbitVerdict {
                            kind: OrbitKind::AttractedToOrigin,
                            period: Some(1),
                            multiplier: Some(s.rho),
                            iterations_used: n + 1,
                            representative: Some(Complex64::new(0.0, 0.0)),
                            ambiguous,
                        };
                    }
                    return OrbitVerdict {
                        kind: OrbitKind::AttractedToCycle,
                        period: Some(period),
                        multiplier: Some(multiplier),
                        iterations_used: n + 1,
                        representative: Some(point),
                        ambiguous,
                    };
                }
            }
        }
        if lam == power {
            anchor = next;
            anchor_step += lam;
            let _ = anchor_step;
            power *= 2;
            lam = 0;
        }
        z = next;
    }
    OrbitVerdict::unresolved(budget.max_iter, ambiguous)
}

/// Classifies the forward orbit of `z0` (pole hits continue with the
/// lambda limit).
pub fn classify_orbit(
    s: &FamilySlice,
    z0: Complex64,
    max_iter: usize,
    tol: f64,
) -> OrbitVerdict {
    classify_orbit_from(
        s,
        z0,
        IterationBudget {
            max_iter,
            cycle_tol: tol,
        },
        s.lambda,
    )
}

/// Refines a detected cycle and reduces the period to its primitive value.
fn confirm_cycle(
    s: &FamilySlice,
    seed: Complex64,
    period: usize,
) -> Result<(Complex64, Complex64, usize)> {
    let (point, multiplier) = refine_cycle(s, seed, period)?;
    // Brent may report a multiple of the primitive period.
    for p in 1..period {
        if period % p == 0 {
            if let ExtComplex::Finite(w) = s.iterate(point, p) {
                if (w - point).norm() < 1e-9 * (1.0 + point.norm()) {
                    let m = match s.orbit_derivative(point, p) {
                        ExtComplex::Finite(m) => m,
                        ExtComplex::Infinity => continue,
                    };
                    return Ok((point, m, p));
                }
            }
        }
    }
    Ok((point, multiplier, period))
}

/// Newton refinement of `f^p(z) = z` from `seed`; returns the cycle point
/// and the multiplier along the refined cycle.
pub fn refine_cycle(
    s: &FamilySlice,
    seed: Complex64,
    p: usize,
) -> Result<(Complex64, Complex64)> {
    let mut z = seed;
    let mut converged = false;
    for _ in 0..60 {
        let fz = match s.iterate(z, p) {
            ExtComplex::Finite(w) => w,
            ExtComplex::Infinity => return Err(Error::NoConvergence("cycle orbit hit a pole")),
        };
        let dz = match s.orbit_derivative(z, p) {
            ExtComplex::Finite(d) => d,
            ExtComplex::Infinity => return Err(Error::NoConvergence("cycle orbit hit a pole")),
        };
        let g = fz - z;
        let gp = dz - Complex64::new(1.0, 0.0);
        if gp.norm() < 1e-300 {
            return Err(Error::NoConvergence("degenerate Newton step in refine_cycle"));
        }
        let step = g / gp;
        z -= step;
        if g.norm() <= 1e-12 * (1.0 + z.norm()) {
            converged = true;
            break;
        }
    }
    let residual = match s.iterate(z, p) {
        ExtComplex::Finite(w) => (w - z).norm(),
        ExtComplex::Infinity => return Err(Error::NoConvergence("cycle orbit hit a pole")),
    };
    if !converged && residual > 1e-12 * (1.0 + z.norm()) {
        return Err(Error::NoConvergence("refine_cycle did not reach tolerance"));
    }
    let multiplier = s
        .orbit_derivative(z, p)
        .finite()
        .ok_or(Error::NoConvergence("multiplier hit a pole"))?;
    Ok((z, multiplier))
}

/// Classifies a parameter by running both asymptotic orbits.
pub fn classify_parameter(
    rho: Complex64,
    lambda: Complex64,
    budget: IterationBudget,
) -> Result<ParameterClass> {
    let s = FamilySlice::new(rho, lambda)?;
    Ok(classify_slice(&s, budget))
}

/// Same as [`classify_parameter`] for a slice that is already built.
pub fn classify_slice(s: &FamilySlice, budget: IterationBudget) -> ParameterClass {
    let v_lambda = classify_orbit_from(s, s.lambda, budget, s.lambda);
    let v_mu = classify_orbit_from(s, s.mu, budget, s.mu);
    if v_lambda.ambiguous || v_mu.ambiguous {
        return ParameterClass {
            region: Region::Unresolved,
            period_lambda: None,
            period_mu: None,
        };
    }
    let region = match (v_lambda.kind, v_mu.kind) {
        (OrbitKind::AttractedToOrigin, OrbitKind::AttractedToOrigin) => Region::Shift,
        (OrbitKind::AttractedToCycle, _) => Region::MLambda,
        (OrbitKind::AttractedToOrigin, OrbitKind::AttractedToCycle) => Region::MMu,
        _ => Region::Unresolved,
    };
    ParameterClass {
        region,
        period_lambda: match v_lambda.kind {
            OrbitKind::AttractedToCycle => v_lambda.period,
            _ => None,
        },
        period_mu: match v_mu.kind {
            OrbitKind::AttractedToCycle => v_mu.period,
            _ => None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rho() -> Complex64 {
        c(2.0 / 3.0, 0.0)
    }

    #[test]
    fn origin_seed_resolves_immediately() {
        let s = FamilySlice::new(rho(), c(1.0, 0.0)).unwrap();
        let v = classify_orbit(&s, c(0.0, 0.0), 100, 1e-6);
        assert_eq!(v.kind, OrbitKind::AttractedToOrigin);
        assert!(v.iterations_used <= 1);
        assert_eq!(v.representative, Some(c(0.0, 0.0)));
    }

    #[test]
    fn small_lambda_slice_is_shift() {
        // Both asymptotic values near the origin are swallowed by the trap.
        let class = classify_parameter(rho(), c(1.0, 0.0), Default::default()).unwrap();
        assert_eq!(class.region, Region::Shift);
        assert_eq!(class.period_lambda, None);
    }

    #[test]
    fn shift_iff_both_orbits_reach_origin() {
        for &lam in &[c(1.0, 0.0), c(0.8, 0.4), c(3.0, 0.0), c(0.5, 2.0)] {
            let s = FamilySlice::new(rho(), lam).unwrap();
            let class = classify_slice(&s, Default::default());
            let vl = classify_orbit_from(&s, s.lambda, Default::default(), s.lambda);
            let vm = classify_orbit_from(&s, s.mu, Default::default(), s.mu);
            let both = vl.kind == OrbitKind::AttractedToOrigin
                && vm.kind == OrbitKind::AttractedToOrigin
                && !vl.ambiguous
                && !vm.ambiguous;
            assert_eq!(class.region == Region::Shift, both, "dichotomy failed at {lam}");
        }
    }

    #[test]
    fn large_real_lambda_attracted_to_fixed_point() {
        // Deep inside the unbounded period-one component the asymptotic
        // value converges to the nonzero fixed point.
        let class = classify_parameter(rho(), c(3.0, 0.0), Default::default()).unwrap();
        assert_eq!(class.region, Region::MLambda);
        assert_eq!(class.period_lambda, Some(1));
    }

    #[test]
    fn refine_cycle_at_origin() {
        let s = FamilySlice::new(rho(), c(1.0, 0.0)).unwrap();
        let (z, m) = refine_cycle(&s, c(0.01, 0.01), 1).unwrap();
        assert!(z.norm() < 1e-12);
        assert!((m - s.rho).norm() < 1e-10);
    }

    #[test]
    fn refined_multiplier_is_orbit_derivative() {
        let s = FamilySlice::new(rho(), c(3.0, 0.0)).unwrap();
        let v = classify_orbit_from(&s, s.lambda, Default::default(), s.lambda);
        assert_eq!(v.kind, OrbitKind::AttractedToCycle);
        let p = v.period.unwrap();
        let z = v.representative.unwrap();
        let m = s.orbit_derivative(z, p).unwrap_finite();
        assert!((m - v.multiplier.unwrap()).norm() <= 1e-10);
        assert!(v.multiplier.unwrap().norm() < 1.0);
        assert!((s.iterate(z, p).unwrap_finite() - z).norm() <= 1e-10);
    }

    #[test]
    fn trap_region_is_forward_invariant() {
        let s = FamilySlice::new(rho(), c(1.0, 0.0)).unwrap();
        let r = trap_radius(&s);
        let mut z = c(0.6, 0.3);
        let mut inside = false;
        for _ in 0..500 {
            if inside {
                assert!(z.norm() < r, "orbit left the trap at {z}");
            } else if z.norm() < r {
                inside = true;
            }
            z = s.eval(z).unwrap_finite();
        }
        assert!(inside);
    }
}
