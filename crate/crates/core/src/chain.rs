//! Conditional hybrid entropies and the q-additive chain rule.
//!
//! The conditional entropy of B given A can be obtained two ways:
//!
//! * the *chain* route subtracts the Aczél–Daróczy entropy of A from that of
//!   the joint, which makes the q-additive rule hold by definition;
//! * the *axiomatic* route takes the escort-weighted Kolmogorov–Nagumo mean of
//!   the per-outcome conditional entropies.
//!
//! The routes differ by exactly `(S̃(R(q)) - S(R(q))) / q`, which vanishes iff
//! the naive joint escort is consistent. All arithmetic here stays in the
//! additive `f_q` scale; `D_q` values appear only in the residuals.

use serde::Serialize;

use crate::entropy::{aczel_daroczy_weights, hybrid, hybrid_joint};
use crate::error::Result;
use crate::escort::{column_power_sums, joint_escort_correct, joint_escort_naive};
use crate::prob::{condition_on_a, JointDistribution, QOrder, ZeroColumns};
use crate::qcalc::{f_q_inv, q_add};

/// Sign of the exponent in the correction substitution.
///
/// With `c = CORRECTION_SIGN * (1-q)/q * (S̃ - S)`, the substitution
/// `D ↦ e^c (D + 1/(1-q)) - 1/(1-q)` shifts `f_q(D)` by `c / (1-q)`. The
/// axiomatic conditional exceeds the chain conditional by `(S̃ - S)/q`, so only
/// the negative sign closes the additivity residual.
pub const CORRECTION_SIGN: f64 = -1.0;

/// `f_q(D_q(B|A)) = f_q(D_q(A,B)) - f_q(D_q(A))`.
pub fn conditional_chain(r: &JointDistribution, q: QOrder) -> f64 {
    aczel_daroczy_weights(r.matrix().as_slice(), q) - aczel_daroczy_weights(r.marginal_a().weights(), q)
}

/// `Σ_l P(q)_l f_q(D_q(B | A = A_l))`, the escort-weighted mean of the
/// per-outcome Aczél–Daróczy conditional entropies.
pub fn conditional_axiomatic(r: &JointDistribution, q: QOrder) -> Result<f64> {
    let cond = condition_on_a(r, ZeroColumns::Strict)?;
    let weights = crate::escort::escort_weights(r.marginal_a().weights(), q);
    Ok(weights
        .iter()
        .zip(cond.columns())
        .map(|(w, col)| w * aczel_daroczy_weights(col.weights(), q))
        .sum())
}

/// `D_q(A,B) - [D_q(A) ⊕_q D_q(B|A)]` with the axiomatic conditional.
pub fn ja_residual(r: &JointDistribution, q: QOrder) -> Result<f64> {
    let conditional = f_q_inv(conditional_axiomatic(r, q)?, q);
    Ok(residual_with(r, q, conditional))
}

/// Additivity defect for an arbitrary conditional value in the `D_q` scale.
pub fn residual_with(r: &JointDistribution, q: QOrder, conditional: f64) -> f64 {
    let joint = hybrid_joint(r, q).value;
    let marginal = hybrid(&r.marginal_a(), q).value;
    joint - q_add(marginal, conditional, q)
}

/// `S̃(R(q)) - S(R(q))`.
///
/// Summed as `Σ (R(q) - R̃(q)) ln R(q)` so the product case cancels cell by
/// cell instead of between two entropies.
pub fn s_gap(r: &JointDistribution, q: QOrder) -> Result<f64> {
    let correct = joint_escort_correct(r, q)?;
    let naive = joint_escort_naive(r, q);
    Ok(naive
        .as_slice()
        .iter()
        .zip(correct.as_slice())
        .filter(|(&n, _)| n > 0.0)
        .map(|(n, c)| (n - c) * n.ln())
        .sum())
}

/// Min-max sandwich `(lower, upper)` around [`s_gap`].
///
/// The column mean `Σ_m P(q)_m r[n|m]^q` in the closed-form escort ratio is
/// replaced by `min_m r[n|m]^q` (lower) and `max_m r[n|m]^q` (upper); each
/// column term is weighted by `-R(q) ln R(q) ≥ 0`.
pub fn minmax_bounds(r: &JointDistribution, q: QOrder) -> Result<(f64, f64)> {
    let cond = condition_on_a(r, ZeroColumns::Strict)?;
    let z = column_power_sums(&cond, q);
    let qv = q.value();
    let n_b = r.n_b();
    let power = |n: usize, m: usize| {
        let w = cond.columns()[m][n];
        if w > 0.0 {
            w.powf(qv)
        } else {
            0.0
        }
    };
    let mut min_sum = 0.0;
    let mut max_sum = 0.0;
    for n in 0..n_b {
        let (lo, hi) = (0..r.n_a())
            .map(|m| power(n, m))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        min_sum += lo;
        max_sum += hi;
    }
    let naive = joint_escort_naive(r, q);
    let (mut lower, mut upper) = (0.0, 0.0);
    for l in 0..r.n_a() {
        // Clamp away rounding so each bracket keeps its sign.
        let below = ((min_sum - z[l]) / z[l]).min(0.0);
        let above = ((max_sum - z[l]) / z[l]).max(0.0);
        let weight: f64 = (0..n_b)
            .map(|k| naive.get(k, l))
            .filter(|&v| v > 0.0)
            .map(|v| -v * v.ln())
            .sum();
        lower += weight * below;
        upper += weight * above;
    }
    Ok((lower, upper))
}

/// Tilts the axiomatic conditional by the exponential correction so that the
/// q-additive rule holds for dependent events. Result is in the `D_q` scale.
pub fn corrected_conditional(r: &JointDistribution, q: QOrder) -> Result<f64> {
    let conditional = f_q_inv(conditional_axiomatic(r, q)?, q);
    if q.is_unit() {
        return Ok(conditional);
    }
    let gap = s_gap(r, q)?;
    Ok(tilt(conditional, gap, q))
}

/// `e^c (D + 1/(1-q)) - 1/(1-q)` written as `D + expm1(c) (D + 1/(1-q))`.
fn tilt(conditional: f64, gap: f64, q: QOrder) -> f64 {
    let d = q.deformation();
    let c = CORRECTION_SIGN * d / q.value() * gap;
    conditional + c.exp_m1() * (conditional + 1.0 / d)
}

/// Every quantity of the chain-rule analysis for one joint at one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRuleReport {
    pub q: QOrder,
    /// `f_q(D_q(A,B))`.
    pub joint_entropy: f64,
    /// `f_q(D_q(A))`.
    pub marginal_entropy: f64,
    pub conditional_chain: f64,
    pub conditional_axiomatic: f64,
    /// `conditional_axiomatic - conditional_chain`.
    pub gap: f64,
    pub s_tilde_minus_s: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub residual: f64,
    pub corrected_residual: f64,
}

pub fn chain_rule_report(r: &JointDistribution, q: QOrder) -> Result<ChainRuleReport> {
    let joint_entropy = aczel_daroczy_weights(r.matrix().as_slice(), q);
    let marginal_entropy = aczel_daroczy_weights(r.marginal_a().weights(), q);
    let chain = conditional_chain(r, q);
    let axiomatic = conditional_axiomatic(r, q)?;
    let s_tilde_minus_s = s_gap(r, q)?;
    let (lower_bound, upper_bound) = minmax_bounds(r, q)?;
    let residual = residual_with(r, q, f_q_inv(axiomatic, q));
    let corrected = if q.is_unit() {
        f_q_inv(axiomatic, q)
    } else {
        tilt(f_q_inv(axiomatic, q), s_tilde_minus_s, q)
    };
    Ok(ChainRuleReport {
        q,
        joint_entropy,
        marginal_entropy,
        conditional_chain: chain,
        conditional_axiomatic: axiomatic,
        gap: axiomatic - chain,
        s_tilde_minus_s,
        lower_bound,
        upper_bound,
        residual,
        corrected_residual: residual_with(r, q, corrected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{aczel_daroczy, cross_shannon, renyi, shannon};
    use crate::escort::{escort, is_escort_consistent, CONSISTENCY_TOL};
    use crate::prob::{mutual_information, product_joint, random_distribution, random_joint, Distribution};
    use crate::qcalc::f_q;
    use proptest::prelude::*;

    fn q(v: f64) -> QOrder {
        QOrder::new(v).unwrap()
    }

    fn dist(w: &[f64]) -> Distribution {
        Distribution::new(w.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn skew() -> JointDistribution {
        JointDistribution::new(&[vec![0.2, 0.1], vec![0.3, 0.4]]).unwrap()
    }

    fn sym() -> JointDistribution {
        JointDistribution::new(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    /// Shannon conditional entropy `S(B|A) = Σ_l p_l S(r[.|l])` summed by hand.
    fn shannon_conditional(r: &JointDistribution) -> f64 {
        let p = r.marginal_a();
        let mut total = 0.0;
        for l in 0..r.n_a() {
            for k in 0..r.n_b() {
                let c = r.get(k, l) / p[l];
                if c > 0.0 {
                    total -= p[l] * c * c.ln();
                }
            }
        }
        total
    }

    /// Direct double sum of the axiomatic definition with raw powers.
    fn axiomatic_oracle(r: &JointDistribution, q: f64) -> f64 {
        let p = r.marginal_a();
        let zp: f64 = p.weights().iter().map(|w| w.powf(q)).sum();
        let mut total = 0.0;
        for l in 0..r.n_a() {
            let col: Vec<f64> = (0..r.n_b()).map(|k| r.get(k, l) / p[l]).collect();
            let z: f64 = col.iter().map(|c| c.powf(q)).sum();
            let inner: f64 = col
                .iter()
                .filter(|&&c| c > 0.0)
                .map(|c| c.powf(q) * c.ln())
                .sum();
            total -= p[l].powf(q) / zp * inner / z;
        }
        total
    }

    /// Escort form of the chain conditional built from S and I_{1/q}.
    fn chain_escort_form(r: &JointDistribution, qq: QOrder) -> f64 {
        let big_r = Distribution::from_unnormalized(joint_escort_naive(r, qq).as_slice().to_vec()).unwrap();
        let big_p = escort(&r.marginal_a(), qq);
        let inv = qq.reciprocal();
        let qv = qq.value();
        (shannon(&big_r).value - shannon(big_p.weights()).value) / qv
            - qq.deformation() / qv
                * (renyi(&big_r, inv).value - renyi(big_p.weights(), inv).value)
    }

    #[test]
    fn chain_examples() {
        let qb = dist(&[0.6, 0.3, 0.1]);
        let pa = dist(&[0.25, 0.75]);
        let r = product_joint(&pa, &qb);
        close(conditional_chain(&r, q(2.0)), aczel_daroczy(&qb, q(2.0)).value, 1e-12);
        close(conditional_chain(&skew(), q(1.0)), shannon_conditional(&skew()), 1e-14);

        let oracle = aczel_daroczy(&skew().flatten(), q(2.0)).value
            - aczel_daroczy(&skew().marginal_a(), q(2.0)).value;
        close(conditional_chain(&skew(), q(2.0)), oracle, 1e-15);
        close(conditional_chain(&skew(), q(2.0)), chain_escort_form(&skew(), q(2.0)), 1e-10);
    }

    #[test]
    fn axiomatic_examples() {
        let r = product_joint(&dist(&[0.25, 0.75]), &dist(&[0.6, 0.3, 0.1]));
        close(
            conditional_axiomatic(&r, q(2.0)).unwrap(),
            conditional_chain(&r, q(2.0)),
            1e-12,
        );
        close(conditional_axiomatic(&skew(), q(1.0)).unwrap(), shannon_conditional(&skew()), 1e-14);
        let ax = conditional_axiomatic(&skew(), q(2.0)).unwrap();
        close(ax, axiomatic_oracle(&skew(), 2.0), 1e-14);
        assert!((ax - conditional_chain(&skew(), q(2.0))).abs() > 1e-3);
    }

    #[test]
    fn axiomatic_escort_form() {
        // (1/q)[S̃ - S(P)] - ((1-q)/q)[I(R) - I(P)]
        for qv in [0.5, 2.0, 3.0] {
            let qq = q(qv);
            let r = skew();
            let big_r = Distribution::from_unnormalized(joint_escort_naive(&r, qq).as_slice().to_vec()).unwrap();
            let big_p = escort(&r.marginal_a(), qq);
            let inv = qq.reciprocal();
            let form = (cross_shannon(&r, qq).unwrap().value - shannon(big_p.weights()).value) / qv
                - qq.deformation() / qv * (renyi(&big_r, inv).value - renyi(big_p.weights(), inv).value);
            close(conditional_axiomatic(&r, qq).unwrap(), form, 1e-10);
        }
    }

    #[test]
    fn residual_examples() {
        let r = product_joint(&dist(&[0.3, 0.7]), &dist(&[0.1, 0.5, 0.4]));
        for v in [0.5, 2.0] {
            assert!(ja_residual(&r, q(v)).unwrap().abs() < 1e-10);
        }
        assert!(ja_residual(&skew(), q(1.0)).unwrap().abs() < 1e-10);
        assert!(ja_residual(&skew(), q(2.0)).unwrap().abs() > 1e-4);
    }

    #[test]
    fn symmetric_dependent_joint_satisfies_additivity() {
        // Dependent, yet its conditional columns share one power sum, so the two
        // routes agree and the q-additive rule holds exactly.
        let r = sym();
        assert!(mutual_information(&r) > 0.1);
        for v in [0.5, 2.0, 3.0] {
            assert!(s_gap(&r, q(v)).unwrap().abs() < 1e-14);
            assert!(ja_residual(&r, q(v)).unwrap().abs() < 1e-14);
            let (lo, hi) = minmax_bounds(&r, q(v)).unwrap();
            assert!(lo < -1e-3 && hi > 1e-3);
        }
    }

    #[test]
    fn s_gap_examples() {
        let r = product_joint(&dist(&[0.3, 0.7]), &dist(&[0.1, 0.5, 0.4]));
        assert!(s_gap(&r, q(2.0)).unwrap().abs() < 1e-12);
        assert!(s_gap(&skew(), q(1.0)).unwrap().abs() < 1e-15);

        let naive: [f64; 4] = [0.04 / 0.30, 0.01 / 0.30, 0.09 / 0.30, 0.16 / 0.30];
        let correct = [
            0.5 * 0.16 / 0.52,
            0.5 * 0.04 / 0.68,
            0.5 * 0.36 / 0.52,
            0.5 * 0.64 / 0.68,
        ];
        let oracle: f64 = (0..4).map(|i| (naive[i] - correct[i]) * naive[i].ln()).sum();
        let gap = s_gap(&skew(), q(2.0)).unwrap();
        close(gap, oracle, 1e-14);
        assert!(gap > 0.0);
    }

    #[test]
    fn bounds_examples() {
        let r = product_joint(&dist(&[0.3, 0.7]), &dist(&[0.1, 0.5, 0.4]));
        let (lo, hi) = minmax_bounds(&r, q(2.0)).unwrap();
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);

        let (lo, hi) = minmax_bounds(&skew(), q(1.0)).unwrap();
        let gap = s_gap(&skew(), q(1.0)).unwrap();
        assert!(lo <= gap && gap <= hi && lo <= 0.0 && hi >= 0.0);

        let (lo, hi) = minmax_bounds(&skew(), q(2.0)).unwrap();
        let gap = s_gap(&skew(), q(2.0)).unwrap();
        assert!(lo < 0.0 && 0.0 < gap && gap < hi, "{lo} {gap} {hi}");
    }

    #[test]
    fn correction_examples() {
        let r = product_joint(&dist(&[0.3, 0.7]), &dist(&[0.1, 0.5, 0.4]));
        let plain = f_q_inv(conditional_axiomatic(&r, q(2.0)).unwrap(), q(2.0));
        close(corrected_conditional(&r, q(2.0)).unwrap(), plain, 1e-12);

        let plain = f_q_inv(conditional_axiomatic(&skew(), q(1.0)).unwrap(), q(1.0));
        assert_eq!(corrected_conditional(&skew(), q(1.0)).unwrap(), plain);

        let fixed = corrected_conditional(&skew(), q(2.0)).unwrap();
        assert!(residual_with(&skew(), q(2.0), fixed).abs() < 1e-9);
    }

    #[test]
    fn correction_sign_is_determined_by_the_residual() {
        // Printed form: e^{+(1-q)/q (S̃ - S)}; evaluate both signs literally.
        for qv in [0.5, 0.7, 2.0, 3.0] {
            let qq = q(qv);
            let r = skew();
            let d = qq.deformation();
            let conditional = f_q_inv(conditional_axiomatic(&r, qq).unwrap(), qq);
            let gap = s_gap(&r, qq).unwrap();
            let literal = |sign: f64| {
                (sign * d / qv * gap).exp() * (conditional + 1.0 / d) - 1.0 / d
            };
            let plus = residual_with(&r, qq, literal(1.0)).abs();
            let minus = residual_with(&r, qq, literal(-1.0)).abs();
            assert!(minus < 1e-9, "q = {qv}: {minus}");
            assert!(plus > 1e-4, "q = {qv}: {plus}");
            close(tilt(conditional, gap, qq), literal(CORRECTION_SIGN), 1e-12);
        }
    }

    #[test]
    fn corrected_conditional_is_the_chain_conditional() {
        for qv in [0.5, 2.0] {
            let qq = q(qv);
            let fixed = corrected_conditional(&skew(), qq).unwrap();
            close(f_q(fixed, qq).unwrap(), conditional_chain(&skew(), qq), 1e-12);
        }
    }

    #[test]
    fn zero_columns_propagate() {
        let r = JointDistribution::new(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        assert!(conditional_axiomatic(&r, q(2.0)).is_err());
        assert!(chain_rule_report(&r, q(2.0)).is_err());
        assert!(minmax_bounds(&r, q(2.0)).is_err());
    }

    #[test]
    fn report_fields_agree_with_operations() {
        let r = skew();
        let qq = q(2.0);
        let rep = chain_rule_report(&r, qq).unwrap();
        assert_eq!(rep.conditional_chain, conditional_chain(&r, qq));
        assert_eq!(rep.residual, ja_residual(&r, qq).unwrap());
        close(rep.gap, rep.s_tilde_minus_s / 2.0, 1e-12);
        assert!(rep.corrected_residual.abs() < 1e-9);
        close(rep.joint_entropy - rep.marginal_entropy, rep.conditional_chain, 1e-15);
    }

    #[test]
    fn unit_order_collapse() {
        for seed in 0..50 {
            let r = random_joint(3, 4, seed, 1.0).unwrap();
            let s = shannon_conditional(&r);
            for v in [1.0, 1.0 + 1e-9] {
                let rep = chain_rule_report(&r, q(v)).unwrap();
                close(rep.conditional_chain, s, 1e-8);
                close(rep.conditional_axiomatic, s, 1e-8);
                close(f_q(corrected_conditional(&r, q(v)).unwrap(), q(v)).unwrap(), s, 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn two_route_identity(seed in 0u64..100_000, nb in 1usize..8, na in 1usize..8, qi in 0usize..5) {
            let qq = q([0.5, 0.7, 1.5, 2.0, 3.0][qi]);
            let r = random_joint(nb, na, seed, 1.0).unwrap();
            let rep = chain_rule_report(&r, qq).unwrap();
            prop_assert!((rep.gap - rep.s_tilde_minus_s / qq.value()).abs() < 1e-10);
            prop_assert!((rep.conditional_chain - chain_escort_form(&r, qq)).abs() < 1e-10);
            prop_assert!((rep.conditional_axiomatic - axiomatic_oracle(&r, qq.value())).abs() < 1e-10);
        }

        #[test]
        fn sandwich_and_closure(seed in 0u64..100_000, nb in 1usize..8, na in 1usize..8, qv in 0.3f64..4.0) {
            let qq = q(qv);
            let r = random_joint(nb, na, seed, 1.0).unwrap();
            let rep = chain_rule_report(&r, qq).unwrap();
            prop_assert!(rep.lower_bound <= 0.0 && rep.upper_bound >= 0.0);
            prop_assert!(rep.lower_bound - 1e-12 <= rep.s_tilde_minus_s);
            prop_assert!(rep.s_tilde_minus_s <= rep.upper_bound + 1e-12);
            prop_assert!(rep.corrected_residual.abs() < 1e-9);
        }

        #[test]
        fn independence_gives_additivity(seed in 0u64..100_000, nb in 1usize..8, na in 1usize..8, qi in 0usize..5) {
            let qq = q([0.5, 0.7, 1.5, 2.0, 3.0][qi]);
            let pa = random_distribution(na, seed, 1.0).unwrap();
            let qb = random_distribution(nb, seed ^ 0x9e37_79b9, 1.0).unwrap();
            let r = product_joint(&pa, &qb);
            prop_assert!(ja_residual(&r, qq).unwrap().abs() < 1e-9);
            prop_assert!(is_escort_consistent(&r, qq, CONSISTENCY_TOL));
            let (lo, hi) = minmax_bounds(&r, qq).unwrap();
            prop_assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
        }
    }
}
