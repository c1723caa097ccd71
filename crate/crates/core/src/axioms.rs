//! Ensemble verifiers for the four generalized Shannon–Khinchin axioms of the
//! hybrid entropy: continuity, maximality, expansibility and q-additivity.
//!
//! Every verifier is a deterministic function of its arguments. Trials and
//! restarts draw from [`trial_rng`] streams indexed by their position, so the
//! parallel evaluation order never leaks into a verdict.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ja_residual;
use crate::entropy::hybrid_weights;
use crate::error::{Error, Result};
use crate::prob::{
    mutual_information, product_joint, sample_distribution, sample_joint, trial_rng, Distribution,
    JointDistribution, QOrder,
};
use crate::simplex;

/// Largest |residual| accepted as "additivity holds".
pub const ADDITIVITY_TOL: f64 = 1e-9;
/// Smallest |residual| counted as a violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;
/// Fraction of dependent trials that must violate additivity.
pub const VIOLATION_FRACTION: f64 = 0.99;
/// Slack over `D_q(uniform)` tolerated by the maximality search.
pub const MAXIMALITY_TOL: f64 = 1e-9;
pub const EXPANSIBILITY_TOL: f64 = 1e-12;
/// Per-variable outcome bound for sampled joints.
pub const MAX_OUTCOMES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Continuity,
    Maximality,
    Expansibility,
    AdditivityIndependent,
    AdditivityDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Distribution(Distribution),
    Joint(JointDistribution),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub q: QOrder,
    pub n: usize,
    pub passed: bool,
    /// Counterexample on failure; the best point found for maximality.
    pub witness: Option<Witness>,
    /// Worst-case slack; negative on failure.
    pub margin: f64,
    /// Empirical modulus reported by the continuity probe.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<f64>,
    pub trials: usize,
    /// Dependent-trial joints on which no violation was observed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exceptions: Vec<JointDistribution>,
}

impl AxiomVerdict {
    fn new(axiom: Axiom, q: QOrder, n: usize) -> Self {
        Self {
            axiom,
            q,
            n,
            passed: false,
            witness: None,
            margin: 0.0,
            modulus: None,
            trials: 0,
            exceptions: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Continuity

const CONTINUITY_PROBES: usize = 64;
const CONTINUITY_RANDOM_BASES: usize = 8;
/// Scales probed below `delta`, as divisors.
const CONTINUITY_SCALES: [f64; 3] = [1.0, 10.0, 100.0];

/// Largest `|D_q(p') - D_q(p)|` over random simplex points `p'` within L1
/// distance `scale` of `base`.
fn oscillation<R: Rng>(rng: &mut R, base: &[f64], q: QOrder, scale: f64) -> f64 {
    let n = base.len();
    let d0 = hybrid_weights(base, q);
    let mut worst: f64 = 0.0;
    for _ in 0..CONTINUITY_PROBES {
        let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mean = dir.iter().sum::<f64>() / n as f64;
        dir.iter_mut().for_each(|x| *x -= mean);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        // An L2 step of scale/sqrt(n) bounds the L1 displacement by `scale`;
        // the projection is nonexpansive.
        let step = scale / (n as f64).sqrt() / norm;
        let moved: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + step * d).collect();
        let probe = simplex::project(&moved);
        let change = (hybrid_weights(&probe, q) - d0).abs();
        worst = if change.is_finite() { worst.max(change) } else { f64::INFINITY };
    }
    worst
}

/// Continuity probe around one base point.
///
/// The oscillation of `D_q` is measured at `delta`, `delta/10` and
/// `delta/100`. The probe passes when every oscillation is finite and the
/// finest is at most half the coarsest. The reported modulus is the largest
/// observed `oscillation / scale`; it is large near the boundary for `q < 1`
/// where `D_q` is only Hölder continuous.
pub fn check_continuity_at(q: QOrder, base: &Distribution, seed: u64, delta: f64) -> Result<AxiomVerdict> {
    if !(delta > 0.0 && delta <= 1e-3) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1e-3], got {delta}")));
    }
    let mut verdict = AxiomVerdict::new(Axiom::Continuity, q, base.len());
    let mut rng = trial_rng(seed, 0);
    let omegas: Vec<f64> = CONTINUITY_SCALES
        .iter()
        .map(|div| oscillation(&mut rng, base.weights(), q, delta / div))
        .collect();
    let modulus = CONTINUITY_SCALES
        .iter()
        .zip(&omegas)
        .map(|(div, w)| w / (delta / div))
        .fold(0.0, f64::max);
    let (coarse, fine) = (omegas[0], omegas[omegas.len() - 1]);
    verdict.margin = 0.5 * coarse - fine;
    verdict.passed = omegas.iter().all(|w| w.is_finite()) && (fine <= 0.5 * coarse || coarse == 0.0);
    verdict.modulus = Some(modulus);
    verdict.trials = CONTINUITY_PROBES * CONTINUITY_SCALES.len();
    if !verdict.passed {
        verdict.witness = Some(Witness::Distribution(base.clone()));
    }
    Ok(verdict)
}

/// Continuity probe over the uniform point, a boundary point with a zero
/// coordinate, and seeded interior points.
pub fn check_continuity(q: QOrder, n: usize, seed: u64, delta: f64) -> Result<AxiomVerdict> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("continuity probe needs n >= 2, got {n}")));
    }
    let mut boundary = vec![1.0 / (n - 1) as f64; n];
    boundary[0] = 0.0;
    let mut bases = vec![Distribution::uniform(n)?, Distribution::from_unnormalized(boundary)?];
    for i in 0..CONTINUITY_RANDOM_BASES {
        bases.push(sample_distribution(&mut trial_rng(seed, 1 + i as u64), n, 1.0)?);
    }
    let verdicts = bases
        .par_iter()
        .enumerate()
        .map(|(i, base)| check_continuity_at(q, base, seed.wrapping_add(i as u64), delta))
        .collect::<Result<Vec<_>>>()?;

    let mut verdict = AxiomVerdict::new(Axiom::Continuity, q, n);
    verdict.passed = verdicts.iter().all(|v| v.passed);
    verdict.margin = verdicts.iter().map(|v| v.margin).fold(f64::INFINITY, f64::min);
    verdict.modulus = verdicts.iter().filter_map(|v| v.modulus).reduce(f64::max);
    verdict.trials = verdicts.iter().map(|v| v.trials).sum();
    verdict.witness = verdicts.into_iter().find_map(|v| v.witness);
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// Maximality

/// Settings for the projected finite-difference ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    pub max_iterations: usize,
    /// Central-difference step.
    pub fd_step: f64,
    /// Stop once an accepted step improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            fd_step: 1e-6,
            tolerance: 1e-12,
        }
    }
}

pub const DEFAULT_RESTARTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentResult {
    pub point: Distribution,
    pub value: f64,
    pub iterations: usize,
}

/// Objective on arbitrary vectors: clip to the nonnegative orthant,
/// renormalize, evaluate `D_q`.
fn objective(w: &[f64], q: QOrder) -> f64 {
    let clipped: Vec<f64> = w.iter().map(|&x| x.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let normalized: Vec<f64> = clipped.iter().map(|x| x / sum).collect();
    hybrid_weights(&normalized, q)
}

fn gradient(x: &[f64], q: QOrder, h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = objective(&probe, q);
            probe[i] = orig - h;
            let down = objective(&probe, q);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Projected finite-difference ascent of `D_q` from `start`.
///
/// `observe` sees every iterate, each of which lies on the simplex.
pub fn ascend_with(
    start: &Distribution,
    q: QOrder,
    config: &AscentConfig,
    mut observe: impl FnMut(&[f64]),
) -> AscentResult {
    let mut x = start.weights().to_vec();
    let mut value = hybrid_weights(&x, q);
    let mut rate = 1.0;
    let mut iterations = 0;
    observe(&x);
    while iterations < config.max_iterations {
        iterations += 1;
        let g = gradient(&x, q, config.fd_step);
        let mut accepted = None;
        // Backtracking line search along the projected gradient path.
        while rate > 1e-14 {
            let moved: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + rate * gi).collect();
            let candidate = simplex::project(&moved);
            let candidate_value = hybrid_weights(&candidate, q);
            if candidate_value > value {
                accepted = Some((candidate, candidate_value));
                break;
            }
            rate *= 0.5;
        }
        let Some((next, next_value)) = accepted else {
            break;
        };
        let improvement = next_value - value;
        x = next;
        value = next_value;
        observe(&x);
        rate *= 2.0;
        if improvement < config.tolerance {
            break;
        }
    }
    AscentResult {
        point: Distribution::from_normalized(x),
        value,
        iterations,
    }
}

pub fn ascend(start: &Distribution, q: QOrder, config: &AscentConfig) -> AscentResult {
    ascend_with(start, q, config, |_| {})
}

/// Start for restart `index`: even indices draw from the uniform Dirichlet
/// law, odd indices sit next to a vertex.
pub fn maximality_start(n: usize, seed: u64, index: usize) -> Result<Distribution> {
    let mut rng = trial_rng(seed, index as u64);
    let spread = sample_distribution(&mut rng, n, 1.0)?;
    if index.is_multiple_of(2) {
        return Ok(spread);
    }
    let vertex = (index / 2) % n;
    let mut w: Vec<f64> = spread.weights().iter().map(|s| 0.1 * s).collect();
    w[vertex] += 0.9;
    Distribution::from_unnormalized(w)
}

/// Multi-start search for a point beating the uniform distribution.
pub fn check_maximality(q: QOrder, n: usize, seed: u64, restarts: usize) -> Result<AxiomVerdict> {
    check_maximality_with(q, n, seed, restarts, &AscentConfig::default())
}

pub fn check_maximality_with(
    q: QOrder,
    n: usize,
    seed: u64,
    restarts: usize,
    config: &AscentConfig,
) -> Result<AxiomVerdict> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("maximality needs n >= 2, got {n}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let uniform_value = hybrid_weights(Distribution::uniform(n)?.weights(), q);
    let results = (0..restarts)
        .into_par_iter()
        .map(|i| Ok(ascend(&maximality_start(n, seed, i)?, q, config)))
        .collect::<Result<Vec<_>>>()?;
    // First maximum in restart order.
    let best = results
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("restarts >= 1");

    let mut verdict = AxiomVerdict::new(Axiom::Maximality, q, n);
    verdict.margin = uniform_value - best.value;
    verdict.passed = best.value <= uniform_value + MAXIMALITY_TOL;
    verdict.trials = restarts;
    verdict.witness = Some(Witness::Distribution(best.point));
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// Expansibility

/// `D_q(p, 0) = D_q(p)` to [`EXPANSIBILITY_TOL`].
pub fn check_expansibility(q: QOrder, p: &Distribution) -> AxiomVerdict {
    let expanded = p.expanded(1);
    let diff = (hybrid_weights(expanded.weights(), q) - hybrid_weights(p.weights(), q)).abs();
    let mut verdict = AxiomVerdict::new(Axiom::Expansibility, q, p.len());
    verdict.passed = diff <= EXPANSIBILITY_TOL;
    verdict.margin = EXPANSIBILITY_TOL - diff;
    verdict.trials = 1;
    if !verdict.passed {
        verdict.witness = Some(Witness::Distribution(expanded));
    }
    verdict
}

// ---------------------------------------------------------------------------
// Additivity

fn sizes<R: Rng>(rng: &mut R, max_outcomes: usize) -> (usize, usize) {
    (rng.random_range(2..=max_outcomes), rng.random_range(2..=max_outcomes))
}

/// Seeded product joints with `2..=max_outcomes` outcomes per variable.
pub fn product_ensemble(seed: u64, trials: usize, max_outcomes: usize) -> Result<Vec<JointDistribution>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let (n_b, n_a) = sizes(&mut rng, max_outcomes);
            let p_a = sample_distribution(&mut rng, n_a, 1.0)?;
            let q_b = sample_distribution(&mut rng, n_b, 1.0)?;
            Ok(product_joint(&p_a, &q_b))
        })
        .collect()
}

/// Seeded joints with mutual information at least `mi_floor`, by rejection.
pub fn dependent_ensemble(
    seed: u64,
    trials: usize,
    max_outcomes: usize,
    mi_floor: f64,
) -> Result<Vec<JointDistribution>> {
    if !(mi_floor < (max_outcomes as f64).ln()) {
        return Err(Error::InvalidParameter(format!(
            "mi_floor {mi_floor} is unreachable with {max_outcomes} outcomes"
        )));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            loop {
                let (n_b, n_a) = sizes(&mut rng, max_outcomes);
                let r = sample_joint(&mut rng, n_b, n_a, 1.0)?;
                if mutual_information(&r) >= mi_floor && r.zero_columns().is_empty() {
                    return Ok(r);
                }
            }
        })
        .collect()
}

/// q-additivity on seeded product joints: passes if max |residual| < 1e-9.
pub fn check_additivity_independent(q: QOrder, seed: u64, trials: usize) -> Result<AxiomVerdict> {
    check_additivity_independent_on(q, &product_ensemble(seed, trials, MAX_OUTCOMES)?)
}

pub fn check_additivity_independent_on(q: QOrder, joints: &[JointDistribution]) -> Result<AxiomVerdict> {
    let residuals = joints
        .par_iter()
        .map(|r| ja_residual(r, q).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let mut verdict = AxiomVerdict::new(Axiom::AdditivityIndependent, q, MAX_OUTCOMES);
    verdict.trials = joints.len();
    let worst = residuals
        .iter()
        .enumerate()
        .fold((None, 0.0), |(idx, max), (i, &v)| if v > max { (Some(i), v) } else { (idx, max) });
    verdict.margin = ADDITIVITY_TOL - worst.1;
    verdict.passed = worst.1 < ADDITIVITY_TOL;
    if !verdict.passed {
        verdict.witness = worst.0.map(|i| Witness::Joint(joints[i].clone()));
    }
    Ok(verdict)
}

/// Violation of q-additivity on dependent joints.
///
/// `passed` means a violation (|residual| > 1e-6) was observed in at least
/// 99% of trials. Joints without a violation are kept in `exceptions`.
pub fn check_additivity_dependent(q: QOrder, seed: u64, trials: usize, mi_floor: f64) -> Result<AxiomVerdict> {
    check_additivity_dependent_on(q, &dependent_ensemble(seed, trials, MAX_OUTCOMES, mi_floor)?)
}

pub fn check_additivity_dependent_on(q: QOrder, joints: &[JointDistribution]) -> Result<AxiomVerdict> {
    if joints.is_empty() {
        return Err(Error::InvalidParameter("no dependent trials".into()));
    }
    let residuals = joints
        .par_iter()
        .map(|r| ja_residual(r, q).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let exceptions: Vec<JointDistribution> = joints
        .iter()
        .zip(&residuals)
        .filter(|(_, &res)| res <= VIOLATION_THRESHOLD)
        .map(|(r, _)| r.clone())
        .collect();
    let fraction = 1.0 - exceptions.len() as f64 / joints.len() as f64;

    let mut verdict = AxiomVerdict::new(Axiom::AdditivityDependent, q, MAX_OUTCOMES);
    verdict.trials = joints.len();
    verdict.passed = fraction >= VIOLATION_FRACTION;
    verdict.margin = fraction - VIOLATION_FRACTION;
    if !verdict.passed {
        verdict.witness = exceptions.first().cloned().map(Witness::Joint);
    }
    verdict.exceptions = exceptions;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::hybrid;

    fn q(v: f64) -> QOrder {
        QOrder::new(v).unwrap()
    }

    #[test]
    fn continuity_uniform_base() {
        let v = check_continuity_at(q(2.0), &Distribution::uniform(4).unwrap(), 3, 1e-3).unwrap();
        assert!(v.passed);
        assert!(v.witness.is_none());
        assert!(v.modulus.unwrap() < 1.0);
    }

    #[test]
    fn continuity_boundary_base() {
        let base = Distribution::new(vec![0.0, 0.5, 0.5]).unwrap();
        let v = check_continuity_at(q(0.6), &base, 3, 1e-3).unwrap();
        assert!(v.passed, "{v:?}");
        // Only Hölder at the boundary: the modulus grows as the scale shrinks.
        assert!(v.modulus.unwrap() > 1.0);
    }

    #[test]
    fn continuity_is_deterministic() {
        let a = check_continuity(q(2.0), 8, 11, 1e-3).unwrap();
        let b = check_continuity(q(2.0), 8, 11, 1e-3).unwrap();
        assert_eq!(a, b);
        assert!(a.passed);
    }

    #[test]
    fn continuity_rejects_bad_delta() {
        assert!(check_continuity(q(2.0), 3, 0, 0.0).is_err());
        assert!(check_continuity(q(2.0), 3, 0, 0.1).is_err());
        assert!(check_continuity(q(2.0), 1, 0, 1e-4).is_err());
    }

    #[test]
    fn maximality_q2() {
        for n in 2..=8 {
            let v = check_maximality(q(2.0), n, 5, DEFAULT_RESTARTS).unwrap();
            assert!(v.passed, "n = {n}: {v:?}");
            let Some(Witness::Distribution(best)) = &v.witness else {
                panic!("maximality always reports its argmax");
            };
            for &w in best.weights() {
                assert!((w - 1.0 / n as f64).abs() < 1e-3, "{best:?}");
            }
        }
    }

    #[test]
    fn maximality_shannon() {
        for n in [2, 5] {
            assert!(check_maximality(q(1.0), n, 1, 6).unwrap().passed);
        }
    }

    // At q = 1/2 the uniform point has zero curvature; for n >= 3 it is a saddle.
    #[test]
    fn maximality_fails_at_half_beyond_two_outcomes() {
        let half = q(0.5);
        let uniform = hybrid(&Distribution::uniform(3).unwrap(), half).value;
        let skewed = hybrid(&Distribution::new(vec![0.6, 0.2, 0.2]).unwrap(), half).value;
        assert!(skewed > uniform + 1e-4);

        assert!(check_maximality(half, 2, 0, DEFAULT_RESTARTS).unwrap().passed);
        let v = check_maximality(half, 3, 0, DEFAULT_RESTARTS).unwrap();
        assert!(!v.passed);
        assert!(v.margin < -1e-4);
    }

    #[test]
    fn maximality_small_q_is_reported() {
        let v = check_maximality(q(0.3), 2, 0, DEFAULT_RESTARTS).unwrap();
        assert!(v.witness.is_some());
        assert!(v.margin.is_finite());
    }

    #[test]
    fn ascent_stays_on_simplex() {
        for (i, qv) in [0.3, 0.5, 2.0].into_iter().enumerate() {
            let start = maximality_start(5, 9, 2 * i + 1).unwrap();
            ascend_with(&start, q(qv), &AscentConfig::default(), |x| {
                assert!(x.iter().all(|&w| w >= 0.0));
                assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            });
        }
    }

    #[test]
    fn expansibility_examples() {
        let half = Distribution::uniform(2).unwrap();
        assert!(check_expansibility(q(2.0), &half).passed);
        let p = Distribution::new(vec![0.1, 0.6, 0.3]).unwrap();
        assert!(check_expansibility(q(0.5), &p).passed);
        let point = Distribution::new(vec![1.0]).unwrap();
        let v = check_expansibility(q(3.0), &point);
        assert!(v.passed && v.witness.is_none());
        assert_eq!(hybrid_weights(&[1.0, 0.0], q(3.0)), 0.0);
    }

    #[test]
    fn additivity_independent_examples() {
        let coin = Distribution::uniform(2).unwrap();
        let fair = product_joint(&coin, &coin);
        let v = check_additivity_independent_on(q(2.0), &[fair]).unwrap();
        assert!(v.passed && v.margin > 0.0);
        assert!(check_additivity_independent(q(0.5), 1, 1000).unwrap().passed);
        assert!(check_additivity_independent(q(3.0), 2, 1000).unwrap().passed);
    }

    #[test]
    fn additivity_dependent_examples() {
        let skew = JointDistribution::new(&[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap();
        let v = check_additivity_dependent_on(q(2.0), &[skew]).unwrap();
        assert!(v.passed);

        let ensemble = dependent_ensemble(4, 200, MAX_OUTCOMES, 0.05).unwrap();
        let control = check_additivity_dependent_on(q(1.0), &ensemble).unwrap();
        assert!(!control.passed);
        assert_eq!(control.exceptions.len(), ensemble.len());

        let v = check_additivity_dependent(q(2.0), 4, 1000, 0.05).unwrap();
        assert!(v.passed, "{} exceptions", v.exceptions.len());
        assert!(v.witness.is_none());
    }

    #[test]
    fn ensembles_are_deterministic() {
        assert_eq!(product_ensemble(7, 20, 8).unwrap(), product_ensemble(7, 20, 8).unwrap());
        let dep = dependent_ensemble(7, 20, 8, 0.05).unwrap();
        assert_eq!(dep, dependent_ensemble(7, 20, 8, 0.05).unwrap());
        assert!(dep.iter().all(|r| mutual_information(r) >= 0.05));
        assert!(dependent_ensemble(7, 2, 2, 5.0).is_err());
    }
}
