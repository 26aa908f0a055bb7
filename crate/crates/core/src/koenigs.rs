//! Koenigs linearization at an attracting fixed point: the conjugacy
//! `phi(f(z)) = rho * phi(z)`, its inverse on the injectivity domain, and
//! the level/angle coordinates it induces on the whole basin.
//!
//! The local linearizer is computed as a Taylor series solved from the
//! functional equation (the naive limit `rho^{-m}(f^m(z) - q)` loses half
//! the mantissa to cancellation against `ulp(q)`). The series coefficients
//! of `f` at the fixed point come straight from the exponential series of
//! numerator and denominator. The extension to the whole basin uses the
//! functional equation and is single valued and analytic, but injective
//! only on the domain `|phi| < r0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::FamilySlice;

/// How the linearizer is pinned down beyond `phi(q) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `phi'(q) = 1`.
    DerivativeOne,
    /// `phi(distinguished) = r0` exactly (positive real); used for shift
    /// slices where the boundary asymptotic value must land on the same
    /// positive-real point as in the model.
    AsymptoticValueToR0 { r0: f64 },
}

/// Truncation order of the local series.
const SERIES_ORDER: usize = 28;
/// Fraction of the estimated convergence radius used for evaluation.
const SERIES_SAFETY: f64 = 0.2;
/// Cap on forward steps when descending into the local disk.
const APPROACH_CAP: usize = 20_000;

#[derive(Debug, Clone)]
pub struct Linearizer {
    pub slice: FamilySlice,
    pub fixed_point: Complex64,
    pub multiplier: Complex64,
    pub normalization: Normalization,
    /// Distinguished boundary point (an asymptotic value) defining `r0`.
    pub distinguished: Complex64,
    /// Radius of the injectivity disk in linearizing coordinates.
    pub r0: f64,
    /// Radius around the fixed point where the local series is evaluated.
    pub trap_radius: f64,
    /// `phi = scale * psi` with `psi` the derivative-one linearizer.
    scale: Complex64,
    /// Coefficients of `psi(q + u) = u + a_2 u^2 + ...` (index = power).
    psi_coeffs: Vec<Complex64>,
}

/// Newton refinement of a fixed point of the slice.
pub fn refine_fixed_point(s: &FamilySlice, seed: Complex64) -> Result<Complex64> {
    let mut z = seed;
    for _ in 0..80 {
        let f = s
            .eval(z)
            .finite()
            .ok_or(Error::NoConvergence("fixed-point orbit hit a pole"))?;
        let d = s
            .deriv(z)
            .finite()
            .ok_or(Error::NoConvergence("fixed-point orbit hit a pole"))?;
        let g = f - z;
        if g.norm() <= 1e-13 * (1.0 + z.norm()) {
            return Ok(z);
        }
        let gp = d - Complex64::new(1.0, 0.0);
        if gp.norm() < 1e-300 {
            break;
        }
        z -= g / gp;
    }
    Err(Error::NoConvergence("fixed-point refinement"))
}

/// Taylor coefficients of `f(q + u)` in `u`, truncated at `SERIES_ORDER`.
///
/// Numerator and denominator of the family are linear in `e^u`, `e^{-u}`,
/// so their series are explicit; the quotient follows by series division.
fn map_series_at(s: &FamilySlice, q: Complex64) -> Vec<Complex64> {
    let n = SERIES_ORDER + 1;
    let eq = q.exp();
    let emq = (-q).exp();
    let mut num = vec![Complex64::new(0.0, 0.0); n];
    let mut den = vec![Complex64::new(0.0, 0.0); n];
    let mut factorial = 1.0;
    for k in 0..n {
        if k > 0 {
            factorial *= k as f64;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        num[k] = (eq - sign * emq) / factorial;
        den[k] = (eq / s.lambda - sign * emq / s.mu) / factorial;
    }
    // Series reciprocal of den, then product with num.
    let mut recip = vec![Complex64::new(0.0, 0.0); n];
    recip[0] = 1.0 / den[0];
    for k in 1..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            acc += den[j] * recip[k - j];
        }
        recip[k] = -acc / den[0];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=k {
            acc += num[j] * recip[k - j];
        }
        out[k] = acc;
    }
    out
}

/// Solves `psi(F(u)) = m psi(u)` for the coefficients of `psi` given the
/// shifted map series `F` (no constant term, `F_1 = m`).
fn solve_linearizer_series(f_shifted: &[Complex64], m: Complex64) -> Vec<Complex64> {
    let n = f_shifted.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; n];
    a[1] = Complex64::new(1.0, 0.0);
    // Powers of F, built incrementally: t_j = F^j.
    let mut t: Vec<Vec<Complex64>> = vec![vec![zero; n], f_shifted.to_vec()];
    for j in 2..n {
        let prev = &t[j - 1];
        let mut next = vec![zero; n];
        for k in j..n {
            let mut acc = zero;
            for i in 1..k {
                if k - i < n {
                    acc += prev[i] * f_shifted[k - i];
                }
            }
            next[k] = acc;
        }
        t.push(next);
    }
    for k in 2..n {
        let mut acc = zero;
        for j in 1..k {
            acc += a[j] * t[j][k];
        }
        a[k] = acc / (m - m.powi(k as i32));
    }
    a
}

/// Builds a linearizer at the attracting fixed point near `fixed_point_seed`.
///
/// `distinguished` is the asymptotic value sitting on the boundary of the
/// injectivity domain: it defines `r0` under [`Normalization::DerivativeOne`]
/// and is mapped onto the prescribed `r0` under
/// [`Normalization::AsymptoticValueToR0`].
pub fn build_linearizer(
    s: &FamilySlice,
    fixed_point_seed: Complex64,
    distinguished: Complex64,
    normalization: Normalization,
) -> Result<Linearizer> {
    let q = refine_fixed_point(s, fixed_point_seed)?;
    let m = s
        .deriv(q)
        .finite()
        .ok_or(Error::NoConvergence("derivative at fixed point"))?;
    if m.norm() >= 1.0 || m.norm() == 0.0 {
        return Err(Error::NotAttracting(q, m.norm()));
    }

    let f_series = map_series_at(s, q);
    debug_assert!((f_series[0] - q).norm() < 1e-10 * (1.0 + q.norm()));
    debug_assert!((f_series[1] - m).norm() < 1e-10);
    let mut shifted = f_series;
    shifted[0] = Complex64::new(0.0, 0.0);
    shifted[1] = m;
    let psi_coeffs = solve_linearizer_series(&shifted, m);

    // Root-test estimate of the series radius; evaluate well inside it.
    let mut inv_radius: f64 = 0.0;
    for (k, c) in psi_coeffs.iter().enumerate().skip(2) {
        inv_radius = inv_radius.max(c.norm().powf(1.0 / k as f64));
    }
    let radius_est = if inv_radius > 0.0 { 1.0 / inv_radius } else { 1.0 };
    let trap = (SERIES_SAFETY * radius_est).min(1.0);
    if !(trap > 0.0) || !trap.is_finite() {
        return Err(Error::NoConvergence("linearizer series radius"));
    }

    let mut lin = Linearizer {
        slice: *s,
        fixed_point: q,
        multiplier: m,
        normalization,
        distinguished,
        r0: 0.0,
        trap_radius: trap,
        scale: Complex64::new(1.0, 0.0),
        psi_coeffs,
    };
    let psi_dist = lin.raw_value(distinguished)?;
    match normalization {
        Normalization::DerivativeOne => {
            lin.r0 = psi_dist.norm();
        }
        Normalization::AsymptoticValueToR0 { r0 } => {
            if psi_dist.norm() == 0.0 {
                return Err(Error::NotInBasin(distinguished));
            }
            lin.scale = Complex64::new(r0, 0.0) / psi_dist;
            lin.r0 = r0;
        }
    }
    if !(lin.r0 > 0.0) || !lin.r0.is_finite() {
        return Err(Error::NoConvergence("degenerate injectivity radius"));
    }
    Ok(lin)
}

impl Linearizer {
    /// Local series evaluation `(psi(q+u), psi'(q+u))` for `|u| <= trap`.
    fn local(&self, u: Complex64) -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut deriv = Complex64::new(0.0, 0.0);
        // Horner from the top.
        for k in (1..self.psi_coeffs.len()).rev() {
            value = value * u + self.psi_coeffs[k];
            deriv = deriv * u + self.psi_coeffs[k] * k as f64;
        }
        (value * u, deriv)
    }

    /// Derivative-one Koenigs value extended to the basin, with derivative.
    fn raw_value_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let mut current = z;
        let mut rho_pow = Complex64::new(1.0, 0.0);
        let mut deriv_ratio = Complex64::new(1.0, 0.0);
        for _ in 0..APPROACH_CAP {
            if (current - self.fixed_point).norm() <= self.trap_radius {
                let (value, dlocal) = self.local(current - self.fixed_point);
                return Ok((value / rho_pow, dlocal * deriv_ratio / rho_pow));
            }
            let d = self
                .slice
                .deriv(current)
                .finite()
                .ok_or(Error::NotInBasin(z))?;
            current = self
                .slice
                .eval(current)
                .finite()
                .ok_or(Error::NotInBasin(z))?;
            rho_pow *= self.multiplier;
            deriv_ratio *= d / self.multiplier;
        }
        Err(Error::NotInBasin(z))
    }

    fn raw_value(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.raw_value_deriv(z)?.0)
    }

    /// `phi(z)`, defined on the whole attracting basin.
    pub fn koenigs(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.scale * self.raw_value(z)?)
    }

    /// `(phi(z), phi'(z))`.
    pub fn koenigs_with_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (v, d) = self.raw_value_deriv(z)?;
        Ok((self.scale * v, self.scale * d))
    }

    /// Inverts `phi` on the injectivity disk `|zeta| < r0`.
    pub fn koenigs_inverse(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta.norm() > self.r0 * (1.0 + 1e-9) {
            return Err(Error::OutsideInjectivityDisk(zeta.norm(), self.r0));
        }
        let mut z = self.fixed_point;
        // Ray continuation: walk |zeta| outward reusing the previous
        // solution as the Newton seed; one leg suffices away from r0.
        let legs: &[f64] = if zeta.norm() < 0.7 * self.r0 {
            &[1.0]
        } else {
            &[0.5, 0.8, 0.95, 1.0]
        };
        for &s in legs {
            let target = zeta * s;
            z = self.invert_from(target, if s == legs[0] { None } else { Some(z) })?;
        }
        Ok(z)
    }

    fn invert_from(&self, target: Complex64, seed: Option<Complex64>) -> Result<Complex64> {
        let mut z = match seed {
            Some(z) => z,
            None => self.fixed_point + target / self.scale,
        };
        if (z - self.fixed_point).norm() > 0.95 * self.trap_radius && seed.is_none() {
            // Local-frame seed may overshoot the basin; start conservatively.
            z = self.fixed_point
                + (z - self.fixed_point) * (0.9 * self.trap_radius)
                    / (z - self.fixed_point).norm();
        }
        let tol = 1e-12 * (1.0 + target.norm());
        let mut best = z;
        let mut best_res = f64::INFINITY;
        for _ in 0..80 {
            let (value, deriv) = match self.koenigs_with_deriv(z) {
                Ok(pair) => pair,
                Err(_) => {
                    // Stepped out of the basin: retreat halfway to the best point.
                    z = 0.5 * (z + best);
                    continue;
                }
            };
            let g = value - target;
            if g.norm() < best_res {
                best_res = g.norm();
                best = z;
            }
            if g.norm() <= tol {
                return Ok(z);
            }
            if deriv.norm() < 1e-300 {
                return Err(Error::NoConvergence("Koenigs inversion derivative vanished"));
            }
            let mut step = g / deriv;
            // Keep steps bounded relative to the current distance scale.
            let cap = 0.5 * (self.trap_radius + (z - self.fixed_point).norm());
            if step.norm() > cap {
                step *= cap / step.norm();
            }
            z -= step;
        }
        if best_res <= 1e-10 * (1.0 + target.norm()) {
            return Ok(best);
        }
        Err(Error::NoConvergence("Koenigs inversion"))
    }

    /// Whether `z` lies in the injectivity domain `phi^{-1}(|zeta| < r0)`
    /// around the fixed point (level test plus inversion round trip).
    pub fn in_injectivity_domain(&self, z: Complex64) -> Result<bool> {
        let zeta = self.koenigs(z)?;
        if zeta.norm() >= self.r0 {
            return Ok(false);
        }
        match self.koenigs_inverse(zeta) {
            Ok(back) => Ok((back - z).norm() <= 1e-6 * (1.0 + z.norm())),
            Err(_) => Ok(false),
        }
    }

    /// Level `r`, angle `t` and the number of forward steps `n` needed to
    /// land in the injectivity domain: `r = |phi(f^n z)| / |rho|^n`,
    /// `t = Arg phi(f^n z)`.
    pub fn level_and_angle(&self, z: Complex64) -> Result<(f64, f64, usize)> {
        let (_, zeta, n) = self.descend_to_domain(z)?;
        Ok((zeta.norm() / self.multiplier.norm().powi(n as i32), zeta.arg(), n))
    }

    /// Iterates `z` until it enters the injectivity domain; returns the
    /// landed point, its `phi` value and the step count.
    pub fn descend_to_domain(&self, z: Complex64) -> Result<(Complex64, Complex64, usize)> {
        let mut current = z;
        for n in 0..500 {
            if self.in_injectivity_domain(current)? {
                let zeta = self.koenigs(current)?;
                return Ok((current, zeta, n));
            }
            current = self
                .slice
                .eval(current)
                .finite()
                .ok_or(Error::NotInBasin(z))?;
        }
        Err(Error::NotInBasin(z))
    }

    /// Global level `|phi(z)|` without the angle bookkeeping.
    pub fn level(&self, z: Complex64) -> Result<f64> {
        Ok(self.koenigs(z)?.norm())
    }
}
