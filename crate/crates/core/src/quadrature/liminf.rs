//! Dyadic difference quotients for lower-right derivatives at `0⁺`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Quotients `q_k` at parameters `p_k = p₀·2^{−k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiminfEstimate {
    pub parameters: Vec<f64>,
    pub quotients: Vec<f64>,
    /// One Richardson step on the last two quotients.
    pub extrapolated: f64,
    /// Minimum over the last three quotients.
    pub liminf_proxy: f64,
    pub converged: bool,
}

impl LiminfEstimate {
    pub fn last_quotient(&self) -> f64 {
        *self.quotients.last().expect("at least three levels")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientOptions {
    /// Relative spread allowed among the last three quotients.
    pub rel_tol: f64,
    /// Spread is measured against `max(|q_last|, abs_floor)`.
    pub abs_floor: f64,
    /// Leading error `q_k − q ~ p_k^γ`; Richardson uses the ratio `2^γ`.
    pub error_exponent: f64,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-3, abs_floor: 0.0, error_exponent: 1.0 }
    }
}

const TAIL: usize = 3;

/// `order = 1`: `(F(t) − F(0))/t`; `order = 2`: `2(F(t) − F(0))/t²`, on `t_k = t0·2^{−k}`.
pub fn liminf_quotient(
    values: impl FnMut(f64) -> Result<f64>,
    order: u32,
    t0: f64,
    levels: usize,
) -> Result<LiminfEstimate> {
    liminf_quotient_with(values, order, t0, levels, &QuotientOptions::default())
}

pub fn liminf_quotient_with(
    mut values: impl FnMut(f64) -> Result<f64>,
    order: u32,
    t0: f64,
    levels: usize,
    opts: &QuotientOptions,
) -> Result<LiminfEstimate> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidParameter(format!("quotient order {order} must be 1 or 2")));
    }
    if levels < TAIL {
        return Err(Error::InvalidParameter(format!("levels = {levels} must be at least {TAIL}")));
    }
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(Error::InvalidParameter(format!("t0 = {t0} must be positive")));
    }
    let base = values(0.0)?;
    if !base.is_finite() {
        return Err(Error::NonFinite("quotient base value"));
    }
    let mut parameters = Vec::with_capacity(levels);
    let mut quotients = Vec::with_capacity(levels);
    for k in 0..levels {
        let t = t0 * 0.5f64.powi(k as i32);
        let v = values(t)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("quotient sample"));
        }
        let q = match order {
            1 => (v - base) / t,
            _ => 2.0 * (v - base) / (t * t),
        };
        parameters.push(t);
        quotients.push(q);
    }
    Ok(summarize(parameters, quotients, opts))
}

/// Same summary for quotients that the caller has already formed.
pub fn summarize(parameters: Vec<f64>, quotients: Vec<f64>, opts: &QuotientOptions) -> LiminfEstimate {
    let k = quotients.len();
    let ratio = 2f64.powf(opts.error_exponent);
    let (prev, last) = (quotients[k - 2], quotients[k - 1]);
    let extrapolated = (ratio * last - prev) / (ratio - 1.0);
    let tail = &quotients[k - TAIL..];
    let liminf_proxy = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let converged = hi - liminf_proxy <= opts.rel_tol * last.abs().max(opts.abs_floor);
    LiminfEstimate { parameters, quotients, extrapolated, liminf_proxy, converged }
}
