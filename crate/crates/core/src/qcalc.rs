//! Deformed exponential and logarithm, the map `f_q` and q-addition.
//!
//! `f_q(x) = ln exp_q(x)` sends q-addition to ordinary addition:
//! `f_q(a ⊕_q b) = f_q(a) + f_q(b)`. All formulas go through `exp_m1` and
//! `ln_1p` so they stay accurate as `q` approaches one; at `|q - 1| <
//! EPS_Q_ONE` the classical limits are returned directly.

use crate::error::{Error, Result};
use crate::prob::QOrder;

fn domain_base(x: f64, q: QOrder) -> Result<f64> {
    let base = 1.0 + q.deformation() * x;
    if base > 0.0 {
        Ok(base)
    } else {
        Err(Error::DomainCutoff {
            x,
            q: q.value(),
            base,
        })
    }
}

/// `exp_q(x) = [1 + (1 - q) x]^(1 / (1 - q))`.
pub fn q_exp(x: f64, q: QOrder) -> Result<f64> {
    if q.is_unit() {
        return Ok(x.exp());
    }
    domain_base(x, q)?;
    let d = q.deformation();
    Ok(((d * x).ln_1p() / d).exp())
}

/// `ln_q(y) = (y^(1 - q) - 1) / (1 - q)`.
pub fn q_log(y: f64, q: QOrder) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::NonpositiveArgument(y));
    }
    if q.is_unit() {
        return Ok(y.ln());
    }
    let d = q.deformation();
    Ok((d * y.ln()).exp_m1() / d)
}

/// `f_q(x) = ln[1 + (1 - q) x] / (1 - q)`.
pub fn f_q(x: f64, q: QOrder) -> Result<f64> {
    if q.is_unit() {
        return Ok(x);
    }
    domain_base(x, q)?;
    let d = q.deformation();
    Ok((d * x).ln_1p() / d)
}

/// `f_q^{-1}(x) = (e^((1 - q) x) - 1) / (1 - q)`, defined on the whole line.
pub fn f_q_inv(x: f64, q: QOrder) -> f64 {
    if q.is_unit() {
        return x;
    }
    let d = q.deformation();
    (d * x).exp_m1() / d
}

/// `a ⊕_q b = a + b + (1 - q) a b`.
pub fn q_add(a: f64, b: f64, q: QOrder) -> f64 {
    a + b + q.deformation() * a * b
}
