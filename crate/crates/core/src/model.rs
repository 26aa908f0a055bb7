//! The model map: the distinguished slice whose nonzero attracting fixed
//! point has the same multiplier as the origin. Prepoles, repelling
//! periodic points and preperiodic points are resolved from their integer
//! itineraries through the labeled inverse branches.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::{ExtComplex, FamilySlice};
use crate::itinerary::{Itinerary, ItineraryKind};
use crate::koenigs::{build_linearizer, Linearizer, Normalization};
use crate::orbit::{classify_orbit_from, IterationBudget, OrbitKind};

/// The model slice together with its fixed point and linearizer.
#[derive(Debug, Clone)]
pub struct ModelMap {
    pub slice: FamilySlice,
    /// The attracting fixed point away from the origin.
    pub q0: Complex64,
    /// Derivative-one linearizer at `q0`; `lambda0` sits on the boundary
    /// of its injectivity domain.
    pub lin: Linearizer,
    /// Level of the injectivity boundary, `|phi(lambda0)|`.
    pub r0: f64,
}

/// Largest real fixed point of the slice on `(0, x_max)` having a downward
/// crossing (the attracting one), if any.
fn attracting_real_fixed_point(s: &FamilySlice, x_max: f64) -> Option<f64> {
    let g = |x: f64| s.eval(Complex64::new(x, 0.0)).finite().map(|w| w.re - x);
    let steps = 4000;
    let mut best: Option<(f64, f64)> = None;
    let mut prev_x = x_max;
    let mut prev_g = g(prev_x)?;
    for k in (0..steps).rev() {
        let x = x_max * k as f64 / steps as f64;
        if x <= 0.0 {
            break;
        }
        let gx = g(x)?;
        // Walking right-to-left, an attracting point has g going - to +.
        if prev_g < 0.0 && gx > 0.0 {
            best = Some((x, prev_x));
            break;
        }
        prev_x = x;
        prev_g = gx;
    }
    let (mut lo, mut hi) = best?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn multiplier_at(s: &FamilySlice, q: f64) -> Option<f64> {
    s.deriv(Complex64::new(q, 0.0)).finite().map(|d| d.re)
}

/// Joint Newton on `(f(q) - q, f'(q) - rho0)` in the two complex unknowns
/// `(lambda, q)`, using closed-form partials.
fn polish_model_pair(
    rho: Complex64,
    mut lambda: Complex64,
    mut q: Complex64,
) -> Result<(Complex64, Complex64)> {
    for _ in 0..60 {
        let s = FamilySlice::new(rho, lambda)?;
        let f = s
            .eval(q)
            .finite()
            .ok_or(Error::NoConvergence("model polish hit a pole"))?;
        let fp = s
            .deriv(q)
            .finite()
            .ok_or(Error::NoConvergence("model polish hit a pole"))?;
        let f1 = f - q;
        let f2 = fp - rho;
        if f1.norm() + f2.norm() <= 1e-14 * (1.0 + q.norm()) {
            return Ok((lambda, q));
        }
        let d = q.exp() / s.lambda - (-q).exp() / s.mu;
        let dprime = q.exp() / s.lambda + (-q).exp() / s.mu;
        let ll = lambda * lambda;
        // Jacobian rows: d(f1), d(f2) over (lambda, q).
        let a = f * f / ll;
        let b = fp - Complex64::new(1.0, 0.0);
        let c = 2.0 * fp * f / ll;
        let e = -2.0 * fp * dprime / d;
        let det = a * e - b * c;
        if det.norm() < 1e-300 {
            return Err(Error::NoConvergence("singular Jacobian in model polish"));
        }
        let dl = (f1 * e - b * f2) / det;
        let dq = (a * f2 - f1 * c) / det;
        lambda -= dl;
        q -= dq;
    }
    Err(Error::NoConvergence("model pair Newton"))
}

/// Builds the model map for a real multiplier in `(0, 1)`: scans the real
/// axis for the parameter whose attracting fixed point has multiplier
/// `rho0`, then polishes the pair by Newton.
pub fn model_setup(rho0: Complex64) -> Result<ModelMap> {
    let r = rho0.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::BadMultiplier(r));
    }
    if rho0.im.abs() > 1e-12 || rho0.re <= 0.0 {
        // Real slices only: the scan below walks the real axis.
        return Err(Error::NoSolutionInWindow);
    }
    let rho = Complex64::new(rho0.re, 0.0);

    // Scan lambda in (rho/2, 5) for the multiplier branch crossing rho0.
    let lo = rho.re / 2.0 + 1e-3;
    let hi = 5.0;
    let steps = 800;
    let mut bracket: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let lam = lo + (hi - lo) * k as f64 / steps as f64;
        let s = match FamilySlice::new(rho, Complex64::new(lam, 0.0)) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let m = attracting_real_fixed_point(&s, lam.max(2.0) + 5.0)
            .and_then(|q| multiplier_at(&s, q));
        if let (Some((plam, pm)), Some(m)) = (prev, m) {
            if (pm - rho.re) * (m - rho.re) <= 0.0 {
                bracket = Some((plam, lam));
                break;
            }
        }
        prev = m.map(|m| (lam, m));
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoSolutionInWindow)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let s = FamilySlice::new(rho, Complex64::new(mid, 0.0))?;
        let m = attracting_real_fixed_point(&s, mid.max(2.0) + 5.0)
            .and_then(|q| multiplier_at(&s, q))
            .ok_or(Error::NoSolutionInWindow)?;
        let s_lo = FamilySlice::new(rho, Complex64::new(lo, 0.0))?;
        let m_lo = attracting_real_fixed_point(&s_lo, lo.max(2.0) + 5.0)
            .and_then(|q| multiplier_at(&s_lo, q))
            .ok_or(Error::NoSolutionInWindow)?;
        if (m_lo - rho.re) * (m - rho.re) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lam_scan = 0.5 * (lo + hi);
    let s_scan = FamilySlice::new(rho, Complex64::new(lam_scan, 0.0))?;
    let q_scan = attracting_real_fixed_point(&s_scan, lam_scan.max(2.0) + 5.0)
        .ok_or(Error::NoSolutionInWindow)?;

    let (lambda0, q0) = polish_model_pair(
        rho,
        Complex64::new(lam_scan, 0.0),
        Complex64::new(q_scan, 0.0),
    )?;
    let slice = FamilySlice::new(rho, lambda0)?;

    // The parameter must sit in the period-one component and the second
    // asymptotic value must fall to the origin.
    let budget = IterationBudget::default();
    let v_lambda = classify_orbit_from(&slice, slice.lambda, budget, slice.lambda);
    if v_lambda.kind != OrbitKind::AttractedToCycle || v_lambda.period != Some(1) {
        return Err(Error::NoSolutionInWindow);
    }
    let v_mu = classify_orbit_from(&slice, slice.mu, budget, slice.mu);
    if v_mu.kind != OrbitKind::AttractedToOrigin {
        return Err(Error::NoSolutionInWindow);
    }

    let lin = build_linearizer(&slice, q0, slice.lambda, Normalization::DerivativeOne)?;
    let r0 = lin.r0;
    Ok(ModelMap {
        slice,
        q0: lin.fixed_point,
        lin,
        r0,
    })
}

/// Resolves a finite word to the prepole `R_{j_1..j_{n-1}}(p_{j_n})`.
pub fn prepole_point(s: &FamilySlice, word: &[i64]) -> Result<Complex64> {
    let (last, prefix) = word
        .split_last()
        .ok_or_else(|| Error::InadmissibleWord("empty prepole word".into()))?;
    s.inverse_branch_word(prefix, ExtComplex::Finite(s.pole(*last)))
}

/// Resolves a periodic word to the repelling periodic point fixed by the
/// inverse-branch composite, starting the contraction at `p_{j_1}`.
pub fn periodic_point(s: &FamilySlice, word: &[i64]) -> Result<Complex64> {
    if word.is_empty() {
        return Err(Error::InadmissibleWord("empty period word".into()));
    }
    let mut z = s.pole(word[0]);
    let mut last_step = f64::INFINITY;
    for _ in 0..600 {
        let next = s.inverse_branch_word(word, ExtComplex::Finite(z))?;
        last_step = (next - z).norm();
        z = next;
        if last_step < 1e-13 {
            break;
        }
    }
    if last_step >= 1e-13 {
        return Err(Error::NoConvergence("inverse-branch contraction"));
    }
    // Sharpen with Newton on Q^n(z) - z.
    let n = word.len();
    for _ in 0..20 {
        let f = match s.iterate(z, n) {
            ExtComplex::Finite(w) => w,
            ExtComplex::Infinity => break,
        };
        let d = match s.orbit_derivative(z, n) {
            ExtComplex::Finite(d) => d,
            ExtComplex::Infinity => break,
        };
        let g = f - z;
        if g.norm() <= 1e-14 * (1.0 + z.norm()) {
            break;
        }
        let gp = d - Complex64::new(1.0, 0.0);
        if gp.norm() < 1e-300 {
            break;
        }
        z -= g / gp;
    }
    let residual = match s.iterate(z, n) {
        ExtComplex::Finite(w) => (w - z).norm(),
        ExtComplex::Infinity => f64::INFINITY,
    };
    if residual > 1e-9 {
        return Err(Error::NoConvergence("periodic point residual"));
    }
    Ok(z)
}

/// Resolves a preperiodic word: inverse branches of the preperiod applied
/// to the periodic point of the period word.
pub fn preperiodic_point(s: &FamilySlice, pre: &[i64], per: &[i64]) -> Result<Complex64> {
    if pre.is_empty() || per.is_empty() {
        return Err(Error::InadmissibleWord(
            "preperiodic word needs both parts".into(),
        ));
    }
    let cycle = periodic_point(s, per)?;
    s.inverse_branch_word(pre, ExtComplex::Finite(cycle))
}

impl ModelMap {
    pub fn lambda0(&self) -> Complex64 {
        self.slice.lambda
    }

    pub fn mu0(&self) -> Complex64 {
        self.slice.mu
    }

    pub fn prepole_point(&self, word: &Itinerary) -> Result<Complex64> {
        if word.kind() != ItineraryKind::Finite {
            return Err(Error::InadmissibleWord(format!(
                "`{word}` is not a finite word"
            )));
        }
        prepole_point(&self.slice, &word.preperiod)
    }

    pub fn periodic_point(&self, word: &Itinerary) -> Result<Complex64> {
        if word.kind() != ItineraryKind::Periodic {
            return Err(Error::InadmissibleWord(format!(
                "`{word}` is not a periodic word"
            )));
        }
        periodic_point(&self.slice, &word.period)
    }

    pub fn preperiodic_point(&self, word: &Itinerary) -> Result<Complex64> {
        if word.kind() != ItineraryKind::Preperiodic {
            return Err(Error::InadmissibleWord(format!(
                "`{word}` is not a preperiodic word"
            )));
        }
        preperiodic_point(&self.slice, &word.preperiod, &word.period)
    }

    /// Preimage chain of the fixed point: `R_word(q0)`.
    pub fn fixed_point_preimage(&self, word: &[i64]) -> Result<Complex64> {
        self.slice
            .inverse_branch_word(word, ExtComplex::Finite(self.q0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rho() -> Complex64 {
        c(2.0 / 3.0, 0.0)
    }

    fn model() -> ModelMap {
        model_setup(rho()).unwrap()
    }

    #[test]
    fn model_multiplier_and_orbits() {
        let m = model();
        assert!(m.slice.lambda.im.abs() < 1e-12);
        assert!(m.slice.lambda.re > 0.0);
        let fp = m.slice.deriv(m.q0).unwrap_finite();
        assert!((fp - rho()).norm() <= 1e-10, "multiplier {fp}");
        assert!((m.slice.eval(m.q0).unwrap_finite() - m.q0).norm() <= 1e-12);
        let v = classify_orbit_from(&m.slice, m.slice.mu, Default::default(), m.slice.mu);
        assert_eq!(v.kind, OrbitKind::AttractedToOrigin);
    }

    #[test]
    fn model_matches_independent_scan_oracle() {
        // Plain scan plus bisection on the multiplier defect, no Newton.
        let m = model();
        let rho = rho();
        let mult = |lam: f64| -> Option<f64> {
            let s = FamilySlice::new(rho, c(lam, 0.0)).ok()?;
            let q = attracting_real_fixed_point(&s, lam.max(2.0) + 5.0)?;
            multiplier_at(&s, q)
        };
        let mut lo = None;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=2000 {
            let lam = 0.34 + (5.0 - 0.34) * k as f64 / 2000.0;
            if let Some(mm) = mult(lam) {
                if let Some((plam, pm)) = prev {
                    if (pm - rho.re) * (mm - rho.re) <= 0.0 {
                        lo = Some((plam, lam));
                        break;
                    }
                }
                prev = Some((lam, mm));
            }
        }
        let (mut a, mut b) = lo.expect("oracle bracket");
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            let ma = mult(a).unwrap();
            let mm = mult(mid).unwrap();
            if (ma - rho.re) * (mm - rho.re) <= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        let oracle = 0.5 * (a + b);
        assert!(
            (m.slice.lambda.re - oracle).abs() <= 1e-8,
            "lambda0 {} vs scan oracle {}",
            m.slice.lambda.re,
            oracle
        );
    }

    #[test]
    fn julia_line_symmetry() {
        // For the real model the basins of 0 and q0 are half planes split
        // by the pole line, so q0 = ln|lambda0/mu0|.
        let m = model();
        let expect = (m.lambda0().norm() / m.mu0().norm()).ln();
        assert!((m.q0.re - expect).abs() <= 1e-9, "{} vs {expect}", m.q0.re);
    }

    #[test]
    fn prepole_words_resolve_and_shift() {
        let m = model();
        let s = &m.slice;
        assert!((prepole_point(s, &[2]).unwrap() - s.pole(2)).norm() < 1e-12);
        for word in [&[0i64, 1][..], &[1, -2][..], &[-1, 0, 2][..]] {
            let p = prepole_point(s, word).unwrap();
            let shifted = prepole_point(s, &word[1..]).unwrap();
            let fp = s.eval(p).unwrap_finite();
            assert!(
                (fp - shifted).norm() <= 1e-9,
                "shift compatibility failed for {word:?}"
            );
            let n = word.len();
            let tail = s.iterate(p, n - 1).unwrap_finite();
            assert!((tail - s.pole(*word.last().unwrap())).norm() <= 1e-9);
            assert!(s.iterate(p, n).is_infinity(), "order-{n} prepole must blow up");
        }
    }

    #[test]
    fn order_two_prepoles_distinct() {
        let m = model();
        let mut points = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                points.push(prepole_point(&m.slice, &[a, b]).unwrap());
            }
        }
        for i in 0..points.len() {
            for j in 0..i {
                assert!(
                    (points[i] - points[j]).norm() >= 1e-6,
                    "prepoles {i} and {j} collide"
                );
            }
        }
    }

    #[test]
    fn periodic_points_are_repelling_fixed_points() {
        let m = model();
        let s = &m.slice;
        let mut fixed = Vec::new();
        for j in -2..=2 {
            let z = periodic_point(s, &[j]).unwrap();
            assert!((s.eval(z).unwrap_finite() - z).norm() <= 1e-9);
            assert!(s.deriv(z).unwrap_finite().norm() > 1.0);
            fixed.push(z);
        }
        for i in 0..fixed.len() {
            for j in 0..i {
                assert!((fixed[i] - fixed[j]).norm() >= 1e-6);
            }
        }
    }

    #[test]
    fn sigma_equivariance_of_periodic_points() {
        let m = model();
        let s = &m.slice;
        for word in [&[0i64, 1][..], &[1, -1][..], &[2, 0][..]] {
            let z = periodic_point(s, word).unwrap();
            let mut rotated = word[1..].to_vec();
            rotated.push(word[0]);
            let zr = periodic_point(s, &rotated).unwrap();
            assert!(
                (s.eval(z).unwrap_finite() - zr).norm() <= 1e-9,
                "sigma equivariance failed for {word:?}"
            );
        }
    }

    #[test]
    fn preperiodic_lands_on_cycle() {
        let m = model();
        let s = &m.slice;
        let z = preperiodic_point(s, &[1], &[0]).unwrap();
        let cycle = periodic_point(s, &[0]).unwrap();
        assert!((s.eval(z).unwrap_finite() - cycle).norm() <= 1e-9);
        assert!(s.deriv(cycle).unwrap_finite().norm() > 1.0);
        // R_1 = R_0 + i pi and R_0 fixes the cycle point, so z = cycle + i pi.
        assert!((z - (cycle + c(0.0, PI))).norm() <= 1e-9);
    }

    #[test]
    fn fixed_point_preimages() {
        let m = model();
        assert!((m.fixed_point_preimage(&[0]).unwrap() - m.q0).norm() <= 1e-10);
        for j in [-2i64, 1, 3] {
            let qj = m.fixed_point_preimage(&[j]).unwrap();
            assert!((qj - (m.q0 + c(0.0, PI * j as f64))).norm() <= 1e-9);
        }
        let q12 = m.fixed_point_preimage(&[1, 2]).unwrap();
        assert!((m.slice.iterate(q12, 2).unwrap_finite() - m.q0).norm() <= 1e-9);
    }

    #[test]
    fn lambda0_is_on_the_injectivity_boundary() {
        let m = model();
        let phi = m.lin.koenigs(m.lambda0()).unwrap();
        assert!((phi.norm() - m.r0).abs() <= 1e-9 * m.r0.max(1.0));
        // Real model: the distinguished value lands on the positive axis.
        assert!(phi.arg().abs() <= 1e-9);
    }
}
