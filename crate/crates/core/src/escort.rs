//! Escort transforms and the two joint-escort constructions.
//!
//! For a joint `r[k][l]` the *naive* escort `R(q)` raises every cell to the
//! power `q` and normalizes globally. The *correct* escort `R̃(q)` instead
//! composes the escort of the A-marginal with the column-wise escort of the
//! conditional: `R̃(q)[k][l] = P(q)[l] * r[k|l]^q / Σ_m r[m|l]^q`. The two agree
//! exactly when the per-column power sums `z_l = Σ_m r[m|l]^q` do not depend on
//! `l`, which independence guarantees.

use crate::error::Result;
use crate::prob::{
    condition_on_a, ConditionalDistribution, Distribution, JointDistribution, Matrix, QOrder,
    ZeroColumns,
};

/// Default absolute tolerance for [`is_escort_consistent`].
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// `w^q` rescaled by the largest weight, with `0^q = 0`.
///
/// The common factor `max^q` cancels in every normalized use.
pub(crate) fn scaled_powers(weights: &[f64], q: QOrder) -> Vec<f64> {
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![0.0; weights.len()];
    }
    let q = q.value();
    weights
        .iter()
        .map(|&w| if w > 0.0 { (w / max).powf(q) } else { 0.0 })
        .collect()
}

pub(crate) fn escort_weights(weights: &[f64], q: QOrder) -> Vec<f64> {
    if q.value() == 1.0 {
        return weights.to_vec();
    }
    let powers = scaled_powers(weights, q);
    let sum: f64 = powers.iter().sum();
    powers.into_iter().map(|w| w / sum).collect()
}

/// Escort distribution of a given order together with its source.
#[derive(Debug, Clone, PartialEq)]
pub struct EscortView {
    weights: Distribution,
    order: QOrder,
    origin: Distribution,
}

impl EscortView {
    pub fn weights(&self) -> &Distribution {
        &self.weights
    }

    pub fn order(&self) -> QOrder {
        self.order
    }

    pub fn origin(&self) -> &Distribution {
        &self.origin
    }
}

/// `P(q)[k] = p[k]^q / Σ_i p[i]^q`. Zero entries stay zero.
pub fn escort(p: &Distribution, q: QOrder) -> EscortView {
    EscortView {
        weights: Distribution::from_normalized(escort_weights(p.weights(), q)),
        order: q,
        origin: p.clone(),
    }
}

/// Recovers the source distribution: `p[k] = P[k]^(1/q) / Σ_i P[i]^(1/q)`.
pub fn escort_inverse(view: &EscortView) -> Distribution {
    escort_inverse_weights(view.weights(), view.order())
}

/// Inverse escort of an arbitrary distribution read as an escort of order `q`.
pub fn escort_inverse_weights(escorted: &Distribution, q: QOrder) -> Distribution {
    Distribution::from_normalized(escort_weights(escorted.weights(), q.reciprocal()))
}

/// `R(q)[k][l] = r[k][l]^q / Σ r^q`.
pub fn joint_escort_naive(r: &JointDistribution, q: QOrder) -> Matrix {
    let flat = escort_weights(r.matrix().as_slice(), q);
    Matrix::from_fn(r.n_b(), r.n_a(), |k, l| flat[k * r.n_a() + l])
}

/// Column-wise escort of the conditional `r[k|l]`.
pub fn conditional_escort(r: &JointDistribution, q: QOrder) -> Result<ConditionalDistribution> {
    let cond = condition_on_a(r, ZeroColumns::Strict)?;
    let columns = cond
        .columns()
        .iter()
        .map(|c| Distribution::from_normalized(escort_weights(c.weights(), q)))
        .collect();
    Ok(ConditionalDistribution::from_columns(columns))
}

/// `R̃(q)[k][l] = P(q)[l] * [R(q)/P(q)][k|l]`; its A-marginal is `P(q)` by construction.
pub fn joint_escort_correct(r: &JointDistribution, q: QOrder) -> Result<Matrix> {
    let cond = conditional_escort(r, q)?;
    let marginal = escort_weights(r.marginal_a().weights(), q);
    Ok(Matrix::from_fn(r.n_b(), r.n_a(), |k, l| {
        marginal[l] * cond.columns()[l][k]
    }))
}

/// Power sums `z_l = Σ_n r[n|l]^q` of the conditional columns.
pub(crate) fn column_power_sums(cond: &ConditionalDistribution, q: QOrder) -> Vec<f64> {
    let qv = q.value();
    cond.columns()
        .iter()
        .map(|c| {
            c.weights()
                .iter()
                .filter(|&&w| w > 0.0)
                .map(|w| w.powf(qv))
                .sum()
        })
        .collect()
}

/// `R̃(q) / R(q)` from the closed form `Σ_m P(q)[m] z_m / z_l`.
///
/// The ratio depends on the column only and is finite even on cells where
/// `R(q)` vanishes.
pub fn escort_ratio(r: &JointDistribution, q: QOrder) -> Result<Matrix> {
    let cond = condition_on_a(r, ZeroColumns::Strict)?;
    let z = column_power_sums(&cond, q);
    let marginal = escort_weights(r.marginal_a().weights(), q);
    let mean: f64 = marginal.iter().zip(&z).map(|(p, z)| p * z).sum();
    Ok(Matrix::from_fn(r.n_b(), r.n_a(), |_, l| mean / z[l]))
}

/// True iff the naive and the correct joint escorts agree to within `tol`.
///
/// Zero-probability A columns contribute zero cells to both constructions and
/// are removed before the comparison.
pub fn is_escort_consistent(r: &JointDistribution, q: QOrder, tol: f64) -> bool {
    escort_defect(r, q) < tol
}

/// `max |R(q) - R̃(q)|` over all cells.
pub fn escort_defect(r: &JointDistribution, q: QOrder) -> f64 {
    let (reduced, _) = r.without_zero_columns();
    let correct = joint_escort_correct(&reduced, q)
        .expect("zero columns were removed, conditioning cannot fail");
    joint_escort_naive(&reduced, q).max_abs_diff(&correct)
}

/// Both joint escorts of one joint at one order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEscortPair {
    pub naive: Matrix,
    pub correct: Matrix,
    pub order: QOrder,
}

impl JointEscortPair {
    pub fn new(r: &JointDistribution, q: QOrder) -> Result<Self> {
        Ok(Self {
            naive: joint_escort_naive(r, q),
            correct: joint_escort_correct(r, q)?,
            order: q,
        })
    }

    pub fn max_difference(&self) -> f64 {
        self.naive.max_abs_diff(&self.correct)
    }
}
