//! The tree of paths in the model basin used for accessibility tracing:
//! a root on the first pulled-back level curve, one node per finite word,
//! and branches realized as concatenations of gradient and level arcs in
//! the annular fundamental domains.
//!
//! Finite targets end with a run along the level curve into the prepole;
//! periodic targets chain the branch pattern of the period word, which is
//! invariant under the corresponding inverse-branch composite and
//! contracts onto the repelling periodic point.

use num_complex::Complex64;

use crate::chart::{point_from_chart, FatouCoordinate};
use crate::error::{Error, Result};
use crate::family::ExtComplex;
use crate::itinerary::{Itinerary, ItineraryKind};
use crate::model::ModelMap;

/// Angular clearance kept from the gradient cut when sweeping a level arc.
const SWEEP_CLEARANCE: f64 = 0.04;
/// Far-end modulus for the run into a prepole: the pulled-back sample then
/// sits within ~|lambda - mu| / (2e7) of the prepole.
const POLE_RUN_MODULUS: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct PathSample {
    /// Path parameter in [0, 1).
    pub t: f64,
    pub point: Complex64,
    /// Global level of the sample in the model basin.
    pub level: f64,
    /// Chart word of the sample.
    pub word: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct TreePath {
    pub target: Itinerary,
    pub samples: Vec<PathSample>,
    /// Indices into `samples` where tree nodes sit (start of each branch).
    pub node_indices: Vec<usize>,
}

impl TreePath {
    pub fn terminal(&self) -> Complex64 {
        self.samples.last().expect("nonempty path").point
    }
}

/// Raw sample in branch-local form: chart word suffix (relative to the
/// branch prefix), level, angle.
struct LocalSample {
    word: Vec<i64>,
    level: f64,
    t: f64,
}

fn push_sweep(out: &mut Vec<LocalSample>, word: &[i64], level: f64, from: f64, to: f64, n: usize) {
    for k in 0..n {
        let t = from + (to - from) * k as f64 / (n - 1).max(1) as f64;
        out.push(LocalSample {
            word: word.to_vec(),
            level,
            t,
        });
    }
}

fn push_gradient(
    out: &mut Vec<LocalSample>,
    word: &[i64],
    t: f64,
    from_level: f64,
    to_level: f64,
    n: usize,
) {
    // Geometric interpolation: levels live on a multiplicative scale.
    let ratio = to_level / from_level;
    for k in 0..n {
        let level = from_level * ratio.powf(k as f64 / (n - 1).max(1) as f64);
        out.push(LocalSample {
            word: word.to_vec(),
            level,
            t,
        });
    }
}

/// Branch from the root to the depth-two node of symbol `j`, in local
/// chart coordinates: gradient out of the root, level sweeps across the
/// intervening annular domains, gradient into the node.
fn branch_samples(rho: f64, r0: f64, j: i64, n: usize) -> Vec<LocalSample> {
    let r_lo = r0 / rho;
    let r_hi = r0 / (rho * rho);
    let r_mid = (r_lo * r_hi).sqrt();
    let pi = std::f64::consts::PI;
    let d = SWEEP_CLEARANCE;
    let mut out = Vec::new();
    if j == 0 {
        push_gradient(&mut out, &[0, 0], pi, r_lo, r_hi, 2 * n);
        return out;
    }
    push_gradient(&mut out, &[0, 0], pi, r_lo, r_mid, n);
    if j > 0 {
        // Ascend: exit each strip through its upper gradient side.
        push_sweep(&mut out, &[0, 0], r_mid, pi, d, n);
        for k in 1..j {
            push_sweep(&mut out, &[k, 0], r_mid, -d, -pi, n);
            push_sweep(&mut out, &[k, 0], r_mid, pi, d, n);
        }
        push_sweep(&mut out, &[j, 0], r_mid, -d, -pi, n);
    } else {
        // Descend: exit each strip through its lower gradient side.
        push_sweep(&mut out, &[0, 0], r_mid, -pi, -d, n);
        for k in (j + 1..0).rev() {
            push_sweep(&mut out, &[k, 0], r_mid, d, pi, n);
            push_sweep(&mut out, &[k, 0], r_mid, -pi, -d, n);
        }
        push_sweep(&mut out, &[j, 0], r_mid, d, pi, n);
    }
    push_gradient(&mut out, &[j, 0], -pi, r_mid, r_hi, n);
    out
}

/// Realizes a local sample under a branch prefix.
fn realize(
    m: &ModelMap,
    prefix: &[i64],
    local: &LocalSample,
) -> Result<(Complex64, f64, Vec<i64>)> {
    let coord = FatouCoordinate::new(local.word.clone(), local.level, local.t);
    let top = point_from_chart(&m.lin, &coord)?;
    let point = m
        .slice
        .inverse_branch_word(prefix, ExtComplex::Finite(top))?;
    let rho = m.slice.rho.norm();
    let level = local.level / rho.powi(prefix.len() as i32);
    let mut word = prefix.to_vec();
    word.extend_from_slice(&local.word);
    Ok((point, level, word))
}

/// Run along the level curve into the prepole of `word`: inner-curve
/// points taken on the asymptotic real tail with geometrically growing
/// modulus, pulled back through the word.
fn pole_run(m: &ModelMap, word: &[i64], n: usize) -> Result<Vec<(Complex64, f64, Vec<i64>)>> {
    let rho = m.slice.rho.norm();
    let pi = std::f64::consts::PI;
    let mut out = Vec::new();
    // Angle-parametrized stretch of the inner curve from the node.
    let taus = (0..n).map(|k| pi + (0.3 - pi) * k as f64 / n as f64);
    let inner_level = m.r0 / rho;
    for tau in taus {
        let local = LocalSample {
            word: vec![0],
            level: inner_level,
            t: tau,
        };
        out.push(realize(m, word, &local)?);
    }
    // Asymptotic tail: real points of the inner curve with |w| growing
    // geometrically; the pulled-back samples close in on the prepole.
    let x_start = m.lambda0().re.max(1.0) + 1.5;
    let steps = ((POLE_RUN_MODULUS / x_start).ln() / 1.25_f64.ln()).ceil() as usize;
    let mut chart_word = word.to_vec();
    chart_word.push(0);
    for k in 0..=steps {
        let x = x_start * 1.25_f64.powi(k as i32);
        let w = Complex64::new(x, 0.0);
        let point = m.slice.inverse_branch_word(word, ExtComplex::Finite(w))?;
        // The tail hugs the level of the curve it is asymptotic to.
        let level = m.r0 / rho.powi(word.len() as i32 + 1);
        out.push((point, level, chart_word.clone()));
    }
    Ok(out)
}

/// Unrolled symbol prefix for a target, long enough that the tail of the
/// node sequence has contracted within the requested depth.
fn unrolled_prefix(target: &Itinerary, depth: usize) -> Result<Vec<i64>> {
    match target.kind() {
        ItineraryKind::Finite => Ok(target.preperiod.clone()),
        ItineraryKind::Periodic | ItineraryKind::Preperiodic => {
            let mut len = target.preperiod.len().max(1);
            while len < depth {
                len += target.period.len();
            }
            len += target.period.len() - (len - target.preperiod.len()) % target.period.len();
            Ok(target.prefix(len))
        }
        ItineraryKind::Infinity => Err(Error::InadmissibleWord(
            "cannot trace toward the infinity symbol".into(),
        )),
    }
}

/// Default contraction depth for infinite targets.
pub fn default_depth(target: &Itinerary) -> usize {
    (target.preperiod.len() + target.period.len() + 6).max(24)
}

/// Builds the tree path toward `target` with the default depth.
pub fn tree_path(m: &ModelMap, target: &Itinerary, samples_per_branch: usize) -> Result<TreePath> {
    tree_path_with_depth(m, target, samples_per_branch, default_depth(target))
}

/// Builds the tree path toward `target`: branches from the root through
/// the nodes of every word prefix, then either the run into the prepole
/// (finite targets) or the contracted tail (periodic targets).
pub fn tree_path_with_depth(
    m: &ModelMap,
    target: &Itinerary,
    samples_per_branch: usize,
    depth: usize,
) -> Result<TreePath> {
    if !target.is_valid() {
        return Err(Error::InadmissibleWord("empty itinerary".into()));
    }
    let word = unrolled_prefix(target, depth)?;
    if word.is_empty() {
        return Err(Error::InadmissibleWord("empty itinerary".into()));
    }
    let n = samples_per_branch.max(8);
    let rho = m.slice.rho.norm();

    let mut points = Vec::new();
    let mut node_indices = Vec::new();
    for (k, &j) in word.iter().enumerate() {
        node_indices.push(points.len());
        let prefix = &word[..k];
        for local in branch_samples(rho, m.r0, j, n) {
            points.push(realize(m, prefix, &local)?);
        }
    }
    if target.kind() == ItineraryKind::Finite {
        node_indices.push(points.len());
        points.extend(pole_run(m, &word, n)?);
    }

    let total = points.len();
    let samples = points
        .into_iter()
        .enumerate()
        .map(|(i, (point, level, word))| PathSample {
            t: i as f64 / total as f64,
            point,
            level,
            word,
        })
        .collect();
    Ok(TreePath {
        target: target.clone(),
        samples,
        node_indices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{model_setup, periodic_point, prepole_point};

    fn model() -> ModelMap {
        model_setup(Complex64::new(2.0 / 3.0, 0.0)).unwrap()
    }

    #[test]
    fn finite_target_lands_on_the_pole() {
        let m = model();
        let path = tree_path(&m, &Itinerary::finite(vec![0]), 64).unwrap();
        // Root, one interior node, and the pole-run marker.
        assert_eq!(path.node_indices.len(), 2);
        let terminal = path.terminal();
        assert!(
            (terminal - m.slice.pole(0)).norm() <= 1e-6,
            "terminal {terminal} vs pole {}",
            m.slice.pole(0)
        );
        // Levels never decrease along the final branch.
        let last_branch = &path.samples[*path.node_indices.last().unwrap()..];
        for pair in last_branch.windows(2) {
            assert!(pair[1].level >= pair[0].level - 1e-12);
        }
    }

    #[test]
    fn deeper_prepole_targets_agree_with_resolver() {
        let m = model();
        for word in [vec![1], vec![-1], vec![0, 1], vec![1, -1]] {
            let path = tree_path(&m, &Itinerary::finite(word.clone()), 32).unwrap();
            let expect = prepole_point(&m.slice, &word).unwrap();
            assert!(
                (path.terminal() - expect).norm() <= 1e-6,
                "terminal mismatch for {word:?}: {} vs {expect}",
                path.terminal()
            );
        }
    }

    #[test]
    fn periodic_target_contracts_to_the_repelling_point() {
        let m = model();
        let target = Itinerary::periodic(vec![0]);
        let expect = periodic_point(&m.slice, &[0]).unwrap();
        // Contraction per level is the reciprocal of the cycle multiplier
        // (about 0.83 here), so the depth for 1e-5 follows from that rate.
        let rate = 1.0 / m.slice.deriv(expect).unwrap_finite().norm();
        let depth = ((1e-6_f64).ln() / rate.ln()).ceil() as usize;
        let path = tree_path_with_depth(&m, &target, 32, depth).unwrap();
        assert!(
            (path.terminal() - expect).norm() <= 1e-5,
            "terminal {} vs fixed point {expect} at depth {depth}",
            path.terminal()
        );
        // The tail of node samples contracts geometrically.
        let d1 = (path.samples[path.node_indices[depth / 2]].point - expect).norm();
        let d2 = (path.samples[path.node_indices[depth - 1]].point - expect).norm();
        assert!(d2 < d1 * 0.5, "no geometric contraction: {d1} -> {d2}");
    }

    #[test]
    fn periodic_path_is_invariant_under_its_word() {
        let m = model();
        let target = Itinerary::periodic(vec![1]);
        let path = tree_path_with_depth(&m, &target, 16, 12).unwrap();
        // Applying the period branch maps each sample onto the sample one
        // branch deeper.
        let per_branch = path.node_indices[1] - path.node_indices[0];
        let shifted: Vec<_> = path.samples.iter().skip(per_branch).collect();
        for (i, deep) in shifted.iter().enumerate().take(3 * per_branch) {
            let image = m
                .slice
                .inverse_branch_word(&[1], ExtComplex::Finite(path.samples[i].point))
                .unwrap();
            assert!(
                (image - deep.point).norm() <= 1e-8,
                "invariance failed at sample {i}"
            );
        }
    }

    #[test]
    fn all_samples_lie_in_the_basin() {
        let m = model();
        let path = tree_path(&m, &Itinerary::preperiodic(vec![1], vec![0]), 16).unwrap();
        for sample in path.samples.iter().step_by(7) {
            let (r, _, _) = m.lin.level_and_angle(sample.point).unwrap();
            assert!(r > m.r0 * 0.99, "sample below the injectivity level");
            assert!(
                (r - sample.level).abs() <= 1e-6 * (1.0 + sample.level),
                "stored level {} vs computed {r}",
                sample.level
            );
        }
    }

    #[test]
    fn node_points_match_preimage_chain() {
        let m = model();
        let root = m
            .slice
            .inverse_branch_word(
                &[0],
                ExtComplex::Finite(
                    m.lin
                        .koenigs_inverse(Complex64::new(-m.r0, 0.0))
                        .unwrap(),
                ),
            )
            .unwrap();
        let path = tree_path(&m, &Itinerary::finite(vec![2, -1]), 16).unwrap();
        let first = path.samples[path.node_indices[0]].point;
        assert!((first - root).norm() <= 1e-9, "root mismatch: {first} vs {root}");
        let second = path.samples[path.node_indices[1]].point;
        let expect = m
            .slice
            .inverse_branch_word(&[2], ExtComplex::Finite(root))
            .unwrap();
        assert!((second - expect).norm() <= 1e-9);
    }
}
