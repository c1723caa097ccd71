//! Entropy functionals in nats.
//!
//! The `*_weights` functions accept any nonnegative weight vector that sums to
//! one; they back both the public [`Distribution`] API and the simplex search
//! in [`crate::axioms`], which evaluates entropies on raw iterates.

use serde::Serialize;

use crate::error::Result;
use crate::escort::{escort_weights, joint_escort_correct, joint_escort_naive, scaled_powers};
use crate::prob::{Distribution, JointDistribution, QOrder};
use crate::qcalc::f_q_inv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Shannon,
    Renyi,
    Tsallis,
    Hybrid,
    AczelDaroczy,
    CrossShannon,
}

/// An entropy value tagged with the functional and order that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub functional: Functional,
    /// `q` or the Rényi order; `1` for Shannon.
    pub order: f64,
}

impl EntropyValue {
    fn new(value: f64, functional: Functional, order: f64) -> Self {
        Self {
            value,
            functional,
            order,
        }
    }
}

/// `x ln x` with `0 ln 0 = 0`.
fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

pub(crate) fn shannon_weights(p: &[f64]) -> f64 {
    -p.iter().copied().map(x_ln_x).sum::<f64>()
}

/// `ln Σ p^α`, evaluated with the largest weight factored out.
fn log_power_sum(p: &[f64], alpha: f64) -> f64 {
    let max = p.iter().copied().fold(0.0, f64::max);
    let scaled: f64 = p
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| (w / max).powf(alpha))
        .sum();
    alpha * max.ln() + scaled.ln()
}

pub(crate) fn renyi_weights(p: &[f64], alpha: QOrder) -> f64 {
    if alpha.is_unit() {
        return shannon_weights(p);
    }
    log_power_sum(p, alpha.value()) / alpha.deformation()
}

pub(crate) fn tsallis_weights(p: &[f64], q: QOrder) -> f64 {
    if q.is_unit() {
        return shannon_weights(p);
    }
    // Σ p^q - 1 = Σ p (p^(q-1) - 1), which avoids cancellation near q = 1.
    let excess: f64 = p
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * (-q.deformation() * w.ln()).exp_m1())
        .sum();
    excess / q.deformation()
}

/// Escort mean `Σ P(q)[k] ln p[k]`, always ≤ 0.
fn escort_mean_log(p: &[f64], q: QOrder) -> f64 {
    escort_weights(p, q)
        .iter()
        .zip(p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(e, w)| e * w.ln())
        .sum()
}

pub(crate) fn hybrid_weights(p: &[f64], q: QOrder) -> f64 {
    f_q_inv(-escort_mean_log(p, q), q)
}

pub(crate) fn aczel_daroczy_weights(p: &[f64], q: QOrder) -> f64 {
    // -Σ p^q ln p / Σ p^q; the rescaling by max^q cancels.
    let powers = scaled_powers(p, q);
    let total: f64 = powers.iter().sum();
    let weighted: f64 = powers
        .iter()
        .zip(p)
        .filter(|(_, &w)| w > 0.0)
        .map(|(pw, w)| pw * w.ln())
        .sum();
    -weighted / total
}

/// `-Σ p ln p`.
pub fn shannon(p: &Distribution) -> EntropyValue {
    EntropyValue::new(shannon_weights(p.weights()), Functional::Shannon, 1.0)
}

/// `ln(Σ p^α) / (1 - α)`, Shannon at `α = 1`.
pub fn renyi(p: &Distribution, alpha: QOrder) -> EntropyValue {
    EntropyValue::new(
        renyi_weights(p.weights(), alpha),
        Functional::Renyi,
        alpha.value(),
    )
}

/// `(Σ p^q - 1) / (1 - q)`, Shannon at `q = 1`.
pub fn tsallis(p: &Distribution, q: QOrder) -> EntropyValue {
    EntropyValue::new(tsallis_weights(p.weights(), q), Functional::Tsallis, q.value())
}

/// Hybrid entropy `D_q(p) = (e^(-(1-q) Σ P(q)_k ln p_k) - 1) / (1 - q)`.
///
/// Computed as `f_q^{-1}` of the negated escort mean of `ln p`, so it reduces
/// to Shannon at `q = 1` and equals `f_q^{-1}(aczel_daroczy(p, q))`.
pub fn hybrid(p: &Distribution, q: QOrder) -> EntropyValue {
    EntropyValue::new(hybrid_weights(p.weights(), q), Functional::Hybrid, q.value())
}

/// Aczél–Daróczy entropy `-Σ p^q ln p / Σ p^q`, the additive image `f_q(D_q)`.
pub fn aczel_daroczy(p: &Distribution, q: QOrder) -> EntropyValue {
    EntropyValue::new(
        aczel_daroczy_weights(p.weights(), q),
        Functional::AczelDaroczy,
        q.value(),
    )
}

/// Hybrid entropy of the flattened joint.
pub fn hybrid_joint(r: &JointDistribution, q: QOrder) -> EntropyValue {
    EntropyValue::new(
        hybrid_weights(r.matrix().as_slice(), q),
        Functional::Hybrid,
        q.value(),
    )
}

/// Cross entropy `S̃(R(q)) = -Σ R̃(q) ln R(q)` of the correct joint escort
/// against the naive one.
///
/// Cells where `R(q)` vanishes also have `R̃(q) = 0` and contribute nothing.
pub fn cross_shannon(r: &JointDistribution, q: QOrder) -> Result<EntropyValue> {
    let correct = joint_escort_correct(r, q)?;
    let naive = joint_escort_naive(r, q);
    let value = -correct
        .as_slice()
        .iter()
        .zip(naive.as_slice())
        .filter(|(_, &n)| n > 0.0)
        .map(|(c, n)| c * n.ln())
        .sum::<f64>();
    Ok(EntropyValue::new(value, Functional::CrossShannon, q.value()))
}
