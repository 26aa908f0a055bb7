//! Fundamental-domain coordinates on an attracting basin: every point away
//! from the grand orbit of the distinguished boundary value is labeled by
//! the itinerary of the forward steps needed to reach the injectivity
//! domain, together with the global level and a landing angle.
//!
//! Words ending in `0` label the annular domains between consecutive level
//! curves (A type); words ending in a nonzero symbol label the simply
//! connected domains clustering at prepoles (B type), whose shell index is
//! recovered from the level.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::family::ExtComplex;
use crate::koenigs::Linearizer;
use crate::model::ModelMap;

/// Chart label of a basin point: itinerary word, global level `r`, and
/// `theta = t + pi*(n-1)` with the landing angle `t` and depth `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FatouCoordinate {
    pub word: Vec<i64>,
    pub r: f64,
    pub theta: f64,
}

impl FatouCoordinate {
    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// Angle offset between `theta` and the landing angle.
    fn offset(n: usize) -> f64 {
        std::f64::consts::PI * (n.max(1) as f64 - 1.0)
    }

    pub fn new(word: Vec<i64>, r: f64, t: f64) -> Self {
        let theta = t + Self::offset(word.len());
        FatouCoordinate { word, r, theta }
    }

    /// Landing angle `t` in `[-pi, pi)`.
    pub fn landing_angle(&self) -> f64 {
        self.theta - Self::offset(self.depth())
    }

    /// A-type words end in 0 (annular domains); the empty word is the
    /// base chart inside the injectivity domain.
    pub fn is_a_type(&self) -> bool {
        self.word.last().map_or(true, |&j| j == 0)
    }

    /// Shell index of a B-type coordinate, read off from the level.
    pub fn shell_index(&self, rho_abs: f64, r0: f64) -> Option<usize> {
        if self.is_a_type() || self.word.is_empty() {
            return None;
        }
        let landed = self.r * rho_abs.powi(self.depth() as i32);
        if landed <= 0.0 || landed > r0 * (1.0 + 1e-9) {
            return None;
        }
        let k = (r0 / landed).ln() / (1.0 / rho_abs).ln();
        Some(k.floor().max(0.0) as usize)
    }
}

/// Result of descending a basin point into the injectivity domain.
#[derive(Debug, Clone)]
pub struct BasinChart {
    pub word: Vec<i64>,
    /// The landed point `f^n(z)` inside the injectivity domain.
    pub landed: Complex64,
    /// `phi` at the landed point.
    pub zeta: Complex64,
}

/// Iterates `z` forward until it enters the injectivity domain of `lin`,
/// recording the branch index at every step.
pub fn basin_chart(lin: &Linearizer, z: Complex64) -> Result<BasinChart> {
    let mut current = z;
    let mut word = Vec::new();
    for _ in 0..500 {
        if lin.in_injectivity_domain(current)? {
            let zeta = lin.koenigs(current)?;
            return Ok(BasinChart {
                word,
                landed: current,
                zeta,
            });
        }
        word.push(lin.slice.branch_index(current)?);
        current = lin
            .slice
            .eval(current)
            .finite()
            .ok_or(Error::NotInBasin(z))?;
    }
    Err(Error::NotInBasin(z))
}

/// Chart of a point as (word, level, theta), generic over the linearizer.
pub fn chart_coordinate(lin: &Linearizer, z: Complex64) -> Result<FatouCoordinate> {
    let chart = basin_chart(lin, z)?;
    let n = chart.word.len() as i32;
    let r = chart.zeta.norm() / lin.multiplier.norm().powi(n);
    Ok(FatouCoordinate::new(chart.word, r, chart.zeta.arg()))
}

/// Inverse of [`chart_coordinate`]: Koenigs inversion at the rescaled level
/// followed by the labeled inverse branches of the word.
pub fn point_from_chart(lin: &Linearizer, coord: &FatouCoordinate) -> Result<Complex64> {
    let n = coord.depth();
    let rho_abs = lin.multiplier.norm();
    let landed_level = coord.r * rho_abs.powi(n as i32);
    let tol = 1.0 + 1e-9;
    if landed_level > lin.r0 * tol {
        return Err(Error::InadmissibleWord(format!(
            "level {} exceeds the injectivity level for depth {n}",
            coord.r
        )));
    }
    if n > 0 && coord.is_a_type() && landed_level < lin.r0 * rho_abs / tol {
        return Err(Error::InadmissibleWord(format!(
            "level {} too small for an annular word of depth {n}",
            coord.r
        )));
    }
    let zeta = Complex64::from_polar(landed_level, coord.landing_angle());
    let y = lin.koenigs_inverse(zeta)?;
    lin.slice.inverse_branch_word(&coord.word, ExtComplex::Finite(y))
}

impl ModelMap {
    /// Chart of a point of the immediate basin of `q0`.
    pub fn coordinate_chart(&self, z: Complex64) -> Result<FatouCoordinate> {
        // Points attracted to the origin are not in the basin of q0;
        // catch them cheaply instead of exhausting the descent loop.
        let origin_trap = crate::orbit::trap_radius(&self.slice);
        let mut probe = z;
        for _ in 0..64 {
            if probe.norm() < origin_trap {
                return Err(Error::NotInK0(z));
            }
            match self.slice.eval(probe) {
                ExtComplex::Finite(w) => probe = w,
                ExtComplex::Infinity => return Err(Error::NotInK0(z)),
            }
        }
        chart_coordinate(&self.lin, z).map_err(|e| match e {
            Error::NotInBasin(_) => Error::NotInK0(z),
            other => other,
        })
    }

    /// Inverse of [`ModelMap::coordinate_chart`].
    pub fn point_from_coordinate(&self, coord: &FatouCoordinate) -> Result<Complex64> {
        point_from_chart(&self.lin, coord)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::model_setup;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn model() -> ModelMap {
        model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap()
    }

    fn random_admissible(
        m: &ModelMap,
        rng: &mut ChaCha8Rng,
        max_depth: usize,
    ) -> FatouCoordinate {
        let rho = m.slice.rho.norm();
        let depth = rng.gen_range(0..=max_depth);
        let mut word: Vec<i64> = (0..depth).map(|_| rng.gen_range(-2..=2)).collect();
        if depth > 0 && rng.gen_bool(0.5) {
            *word.last_mut().unwrap() = 0;
        }
        let a_type = word.last().map_or(true, |&j| j == 0);
        let landed = if word.is_empty() {
            m.r0 * rng.gen_range(0.10..0.95)
        } else if a_type {
            m.r0 * (rho + (1.0 - rho) * rng.gen_range(0.05..0.95))
        } else {
            m.r0 * rng.gen_range(0.08..0.95)
        };
        let r = landed / rho.powi(word.len() as i32);
        // Stay away from the cut angle 0 and the wrap at +-pi.
        let t = if rng.gen_bool(0.5) {
            rng.gen_range(0.05..PI - 0.05)
        } else {
            rng.gen_range(-PI + 0.05..-0.05)
        };
        FatouCoordinate::new(word, r, t)
    }

    #[test]
    fn chart_round_trip_on_random_coordinates() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut tested = 0;
        while tested < 200 {
            let coord = random_admissible(&m, &mut rng, 3);
            let z = m.point_from_coordinate(&coord).unwrap();
            let back = m.coordinate_chart(z).unwrap();
            assert_eq!(back.word, coord.word, "word mismatch at {coord:?} (z = {z})");
            assert!(
                (back.r - coord.r).abs() <= 1e-8 * (1.0 + coord.r),
                "level mismatch: {} vs {}",
                back.r,
                coord.r
            );
            assert!(
                (back.theta - coord.theta).abs() <= 1e-8,
                "theta mismatch: {} vs {}",
                back.theta,
                coord.theta
            );
            let z2 = m.point_from_coordinate(&back).unwrap();
            assert!((z2 - z).norm() <= 1e-8 * (1.0 + z.norm()));
            tested += 1;
        }
    }

    #[test]
    fn interior_points_have_empty_word() {
        let m = model();
        let zeta = Complex64::from_polar(0.6 * m.r0, 2.0);
        let z = m.lin.koenigs_inverse(zeta).unwrap();
        let c = m.coordinate_chart(z).unwrap();
        assert!(c.word.is_empty());
        assert!(c.r < m.r0);
    }

    #[test]
    fn chart_is_shift_equivariant() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let rho = m.slice.rho.norm();
        let mut tested = 0;
        while tested < 60 {
            let coord = random_admissible(&m, &mut rng, 3);
            if coord.word.is_empty() {
                continue;
            }
            let z = m.point_from_coordinate(&coord).unwrap();
            let fz = m.slice.eval(z).unwrap_finite();
            let chart_f = m.coordinate_chart(fz).unwrap();
            assert_eq!(chart_f.word, coord.word[1..].to_vec());
            assert!((chart_f.r - rho * coord.r).abs() <= 1e-8 * (1.0 + coord.r));
            tested += 1;
        }
    }

    #[test]
    fn branch_images_of_interior_points_carry_the_branch_label() {
        let m = model();
        let zeta = Complex64::from_polar(0.995 * m.r0, 0.4);
        let y = m.lin.koenigs_inverse(zeta).unwrap();
        for j in [-2i64, -1, 1, 2] {
            let z = m.slice.inverse_branch(j, y.into()).unwrap();
            let c = m.coordinate_chart(z).unwrap();
            assert_eq!(c.word, vec![j], "wrong label for branch {j}");
        }
    }

    #[test]
    fn boundary_adjacent_strips_have_bounded_imaginary_part() {
        // Depth-one images of points just outside the injectivity level
        // stay in the strip of width pi around their branch index.
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let delta = 0.5;
        for _ in 0..50 {
            let r = m.r0 * (1.0 + rng.gen_range(0.001..0.45));
            let t = rng.gen_range(-PI + 0.05..PI - 0.05);
            for j in [-1i64, 0, 2] {
                let coord = FatouCoordinate::new(vec![j], r / m.slice.rho.norm(), t);
                // level of the landed point is r <= r0/rho * rho = r.
                let z = m.point_from_coordinate(&coord);
                let Ok(z) = z else { continue };
                let center = PI * j as f64;
                assert!(
                    z.im > center - PI / 2.0 - delta && z.im < center + PI / 2.0 + delta,
                    "strip violation for j={j}: Im = {}",
                    z.im
                );
            }
        }
    }

    #[test]
    fn inadmissible_levels_rejected() {
        let m = model();
        // Annular word with an interior level: the chain would re-enter
        // the injectivity domain early.
        let bad = FatouCoordinate::new(vec![0], 0.5 * m.r0 / m.slice.rho.norm(), 1.0);
        assert!(matches!(
            m.point_from_coordinate(&bad),
            Err(Error::InadmissibleWord(_))
        ));
        let too_big = FatouCoordinate::new(vec![1], 2.0 * m.r0 / m.slice.rho.norm(), 1.0);
        assert!(matches!(
            m.point_from_coordinate(&too_big),
            Err(Error::InadmissibleWord(_))
        ));
    }

    #[test]
    fn shell_index_tracks_level() {
        let m = model();
        let rho = m.slice.rho.norm();
        // Depth 1, B type: landed level in (r0*rho^{k+1}, r0*rho^k].
        for k in 0..4usize {
            let landed = m.r0 * rho.powi(k as i32) * 0.9;
            let coord = FatouCoordinate::new(vec![1], landed / rho, 0.3);
            assert_eq!(coord.shell_index(rho, m.r0), Some(k));
        }
        let a = FatouCoordinate::new(vec![0], m.r0 * 0.9 / rho, 0.3);
        assert_eq!(a.shell_index(rho, m.r0), None);
    }

    #[test]
    fn origin_basin_points_are_not_in_k0() {
        let m = model();
        assert!(matches!(
            m.coordinate_chart(Complex64::new(0.02, 0.0)),
            Err(Error::NotInK0(_))
        ));
    }
}
