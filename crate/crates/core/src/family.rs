//! The meromorphic family `f(z) = (e^z - e^{-z}) / (e^z/lambda - e^{-z}/mu)`
//! with `1/lambda - 1/mu = 2/rho`, together with its derivative, poles and
//! the labeled inverse branches.
//!
//! The map has exactly two asymptotic values (`lambda` as `Re z -> +inf`,
//! `mu` as `Re z -> -inf`), no critical points, a fixed point at the origin
//! with multiplier `rho`, and is periodic with period `pi*i`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Overflow guard: beyond `|Re z| > W` the map is evaluated as its
/// asymptotic limit. The truncation error at W = 50 is below 1e-21.
pub const OVERFLOW_GUARD: f64 = 50.0;

/// Points closer than this to a pole are treated as the pole itself.
pub const POLE_PROXIMITY: f64 = 1e-12;

/// Search window for branch-index recovery.
pub const BRANCH_INDEX_WINDOW: i64 = 64;

/// A value on the Riemann sphere: finite or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, ExtComplex::Infinity)
    }

    /// Finite value or panic; for call sites that have already excluded poles.
    pub fn unwrap_finite(self) -> Complex64 {
        self.finite().expect("unexpected point at infinity")
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// One map of the family: the triple `(rho, lambda, mu)` with
/// `1/lambda - 1/mu = 2/rho` and `0 < |rho| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySlice {
    pub rho: Complex64,
    pub lambda: Complex64,
    pub mu: Complex64,
}

impl FamilySlice {
    /// Builds a slice from `(rho, lambda)`, solving the constraint for `mu`.
    pub fn new(rho: Complex64, lambda: Complex64) -> Result<Self> {
        let r = rho.norm();
        if !(r > 0.0 && r < 1.0) || !rho.is_finite() {
            return Err(Error::BadMultiplier(r));
        }
        if !lambda.is_finite() || lambda == Complex64::new(0.0, 0.0) {
            return Err(Error::DegenerateParameter(lambda));
        }
        // mu = lambda*rho / (rho - 2*lambda); lambda = rho/2 makes mu infinite.
        let denom = rho - 2.0 * lambda;
        if denom.norm() <= 1e-15 * (rho.norm() + 2.0 * lambda.norm()) {
            return Err(Error::DegenerateParameter(lambda));
        }
        let mu = lambda * rho / denom;
        Ok(FamilySlice { rho, lambda, mu })
    }

    /// Residual of the defining constraint `1/lambda - 1/mu - 2/rho`,
    /// relative to `|2/rho|`.
    pub fn constraint_residual(&self) -> f64 {
        let lhs = 1.0 / self.lambda - 1.0 / self.mu;
        let rhs = 2.0 / self.rho;
        (lhs - rhs).norm() / rhs.norm()
    }

    /// Ratio `lambda/mu = 1 - 2*lambda/rho` in closed form.
    fn value_ratio(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) - 2.0 * self.lambda / self.rho
    }

    /// The j-th pole `(1/2) Log(lambda/mu) + pi*i*j` (principal logarithm).
    pub fn pole(&self, j: i64) -> Complex64 {
        0.5 * self.value_ratio().ln() + Complex64::new(0.0, std::f64::consts::PI * j as f64)
    }

    /// Distance from `z` to the nearest pole.
    pub fn pole_distance(&self, z: Complex64) -> f64 {
        let base = 0.5 * self.value_ratio().ln();
        let j = ((z.im - base.im) / std::f64::consts::PI).round();
        (z - (base + Complex64::new(0.0, std::f64::consts::PI * j))).norm()
    }

    /// Evaluates the map. Poles (within [`POLE_PROXIMITY`]) return
    /// [`ExtComplex::Infinity`]; beyond the overflow guard the asymptotic
    /// value is returned.
    pub fn eval(&self, z: Complex64) -> ExtComplex {
        if z.re > OVERFLOW_GUARD {
            return ExtComplex::Finite(self.lambda);
        }
        if z.re < -OVERFLOW_GUARD {
            return ExtComplex::Finite(self.mu);
        }
        if self.pole_distance(z) < POLE_PROXIMITY {
            return ExtComplex::Infinity;
        }
        let ep = z.exp();
        let em = (-z).exp();
        ExtComplex::Finite((ep - em) / (ep / self.lambda - em / self.mu))
    }

    /// Derivative `f'(z) = (4/rho) / (e^z/lambda - e^{-z}/mu)^2`.
    ///
    /// The numerator `N' D - N D'` collapses to `2(1/lambda - 1/mu) = 4/rho`,
    /// so the map has no critical points.
    pub fn deriv(&self, z: Complex64) -> ExtComplex {
        if z.re.abs() > OVERFLOW_GUARD {
            return ExtComplex::Finite(Complex64::new(0.0, 0.0));
        }
        if self.pole_distance(z) < POLE_PROXIMITY {
            return ExtComplex::Infinity;
        }
        let d = z.exp() / self.lambda - (-z).exp() / self.mu;
        ExtComplex::Finite(4.0 / self.rho / (d * d))
    }

    /// The labeled inverse branch
    /// `R_j(w) = (1/2) Log((w/mu - 1)/(w/lambda - 1)) + pi*i*j`.
    ///
    /// `R_j(infinity)` is the pole `p_j`. The asymptotic values have no
    /// preimage (logarithmic singularities).
    pub fn inverse_branch(&self, j: i64, w: ExtComplex) -> Result<Complex64> {
        let w = match w {
            ExtComplex::Infinity => return Ok(self.pole(j)),
            ExtComplex::Finite(w) => w,
        };
        let scale = 1.0 + w.norm();
        if (w - self.lambda).norm() < 1e-14 * scale || (w - self.mu).norm() < 1e-14 * scale {
            return Err(Error::AsymptoticValueHit(w));
        }
        let ratio = (w / self.mu - 1.0) / (w / self.lambda - 1.0);
        Ok(0.5 * ratio.ln() + Complex64::new(0.0, std::f64::consts::PI * j as f64))
    }

    /// Composite inverse branch `R_{j_1} o ... o R_{j_n}` applied to `w`.
    pub fn inverse_branch_word(&self, word: &[i64], w: ExtComplex) -> Result<Complex64> {
        let mut value = w;
        for &j in word.iter().rev() {
            value = ExtComplex::Finite(self.inverse_branch(j, value)?);
        }
        match value {
            ExtComplex::Finite(z) => Ok(z),
            ExtComplex::Infinity => unreachable!("empty word applied to infinity"),
        }
    }

    /// Recovers the unique `j` with `R_j(f(z)) = z`.
    pub fn branch_index(&self, z: Complex64) -> Result<i64> {
        let w = match self.eval(z) {
            ExtComplex::Finite(w) => ExtComplex::Finite(w),
            ExtComplex::Infinity => return Err(Error::Unresolvable(z, BRANCH_INDEX_WINDOW)),
        };
        let principal = self.inverse_branch(0, w)?;
        let guess = ((z.im - principal.im) / std::f64::consts::PI).round() as i64;
        let tol = 1e-8 * (1.0 + z.norm());
        // The rounded guess is exact up to floating error; the spiral is the
        // residual-confirmed fallback.
        for step in 0..=BRANCH_INDEX_WINDOW {
            for &j in &[guess + step, guess - step] {
                let back =
                    principal + Complex64::new(0.0, std::f64::consts::PI * j as f64);
                if (back - z).norm() <= tol {
                    return Ok(j);
                }
                if step == 0 {
                    break;
                }
            }
        }
        Err(Error::Unresolvable(z, BRANCH_INDEX_WINDOW))
    }

    /// Forward orbit step that continues through poles: the successor of the
    /// point at infinity is the given asymptotic limit.
    pub fn step_through_pole(&self, z: ExtComplex, infinity_successor: Complex64) -> ExtComplex {
        match z {
            ExtComplex::Finite(z) => self.eval(z),
            ExtComplex::Infinity => ExtComplex::Finite(infinity_successor),
        }
    }

    /// n-fold composition, stopping early at a pole hit.
    pub fn iterate(&self, z: Complex64, n: usize) -> ExtComplex {
        let mut value = ExtComplex::Finite(z);
        for _ in 0..n {
            match value {
                ExtComplex::Finite(z) => value = self.eval(z),
                ExtComplex::Infinity => return ExtComplex::Infinity,
            }
        }
        value
    }

    /// Derivative of `f^n` along the orbit of `z` (product of `f'`).
    pub fn orbit_derivative(&self, z: Complex64, n: usize) -> ExtComplex {
        let mut point = z;
        let mut total = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            match self.deriv(point) {
                ExtComplex::Finite(d) => total *= d,
                ExtComplex::Infinity => return ExtComplex::Infinity,
            }
            match self.eval(point) {
                ExtComplex::Finite(w) => point = w,
                ExtComplex::Infinity => return ExtComplex::Infinity,
            }
        }
        ExtComplex::Finite(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model_like_slice() -> FamilySlice {
        FamilySlice::new(c(2.0 / 3.0, 0.0), c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn mu_solved_from_constraint() {
        let s = model_like_slice();
        assert!((s.mu - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(s.constraint_residual() <= 1e-14);
    }

    #[test]
    fn degenerate_parameters_rejected() {
        let rho = c(2.0 / 3.0, 0.0);
        assert!(matches!(
            FamilySlice::new(rho, c(1.0 / 3.0, 0.0)),
            Err(Error::DegenerateParameter(_))
        ));
        assert!(matches!(
            FamilySlice::new(rho, c(0.0, 0.0)),
            Err(Error::DegenerateParameter(_))
        ));
        assert!(matches!(
            FamilySlice::new(c(1.5, 0.0), c(1.0, 0.0)),
            Err(Error::BadMultiplier(_))
        ));
    }

    #[test]
    fn origin_is_fixed_with_multiplier_rho() {
        let s = model_like_slice();
        assert!(s.eval(c(0.0, 0.0)).unwrap_finite().norm() < 1e-15);
        let d = s.deriv(c(0.0, 0.0)).unwrap_finite();
        assert!((d - s.rho).norm() < 1e-14);
    }

    #[test]
    fn eval_matches_hand_substitution_at_i_pi_half() {
        // e^{i pi/2} = i: numerator 2i, denominator i - 2i = -i, value -2.
        let s = model_like_slice();
        let v = s.eval(c(0.0, PI / 2.0)).unwrap_finite();
        assert!((v - c(-2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn asymptotic_limits() {
        let s = model_like_slice();
        assert!((s.eval(c(40.0, 0.0)).unwrap_finite() - s.lambda).norm() < 1e-12);
        assert!((s.eval(c(-40.0, 0.0)).unwrap_finite() - s.mu).norm() < 1e-12);
        assert!(s.deriv(c(40.0, 0.0)).unwrap_finite().norm() < 1e-12);
        assert!((s.eval(c(60.0, 3.0)).unwrap_finite() - s.lambda).norm() == 0.0);
    }

    #[test]
    fn pole_location_and_growth() {
        let s = model_like_slice();
        let p0 = s.pole(0);
        // lambda/mu = -2: (ln 2)/2 + i pi/2.
        assert!((p0 - c(0.5 * 2.0_f64.ln(), PI / 2.0)).norm() < 1e-14);
        for j in -3..3 {
            assert!((s.pole(j + 1) - s.pole(j) - c(0.0, PI)).norm() < 1e-14);
        }
        let near = p0 + c(1e-8, 0.0);
        assert!(s.eval(near).unwrap_finite().norm() > 1e6);
        assert!(s.eval(p0 + c(1e-14, 0.0)).is_infinity());
    }

    #[test]
    fn derivative_matches_central_differences() {
        let s = model_like_slice();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        let mut checked = 0;
        while checked < 100 {
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if s.pole_distance(z) < 0.1 {
                continue;
            }
            let d = s.deriv(z).unwrap_finite();
            let fd = (s.eval(z + c(h, 0.0)).unwrap_finite()
                - s.eval(z - c(h, 0.0)).unwrap_finite())
                / c(2.0 * h, 0.0);
            assert!(
                (d - fd).norm() <= 1e-6,
                "central difference mismatch at {z}: {d} vs {fd}"
            );
            checked += 1;
        }
    }

    #[test]
    fn pi_i_periodicity() {
        let s = model_like_slice();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if s.pole_distance(z) < 0.05 {
                continue;
            }
            let a = s.eval(z).unwrap_finite();
            let b = s.eval(z + c(0.0, PI)).unwrap_finite();
            assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn inverse_branch_is_right_inverse() {
        let s = model_like_slice();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut checked = 0;
        while checked < 100 {
            let w = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if (w - s.lambda).norm() < 0.05 || (w - s.mu).norm() < 0.05 {
                continue;
            }
            for j in -3..=3 {
                let z = s.inverse_branch(j, w.into()).unwrap();
                let back = s.eval(z).unwrap_finite();
                assert!(
                    (back - w).norm() <= 1e-10 * w.norm().max(1.0),
                    "round trip failed for j={j}, w={w}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn inverse_branch_ladder_and_pole_limit() {
        let s = model_like_slice();
        let w = c(0.3, 0.9);
        for j in -3..3 {
            let diff = s.inverse_branch(j + 1, w.into()).unwrap()
                - s.inverse_branch(j, w.into()).unwrap();
            assert!((diff - c(0.0, PI)).norm() < 1e-14);
        }
        let p = s.inverse_branch(0, ExtComplex::Infinity).unwrap();
        assert!((p - s.pole(0)).norm() < 1e-14);
        assert!(matches!(
            s.inverse_branch(0, s.lambda.into()),
            Err(Error::AsymptoticValueHit(_))
        ));
    }

    #[test]
    fn branch_index_round_trips() {
        let s = model_like_slice();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 50 {
            let w = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if (w - s.lambda).norm() < 0.1 || (w - s.mu).norm() < 0.1 {
                continue;
            }
            for &j in &[5, 0, -2] {
                let z = s.inverse_branch(j, w.into()).unwrap();
                assert_eq!(s.branch_index(z).unwrap(), j);
            }
            checked += 1;
        }
    }
}
