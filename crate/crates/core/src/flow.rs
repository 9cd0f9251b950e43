//! The deformation flow `Φ[f](x, t) = Γ_x(t·f(x))` on the cone and its partials.
//!
//! Each partial derivative has the shape `∂ᵢΦ = eᵢ + αᵢ e_n + βᵢ e_{n+1}`, so the
//! whole differential is carried by the two coefficient vectors `α` and `β`.

use crate::domain::{gamma_curve, norm, AmbientPoint, ConeParams, PlanePoint};
use crate::error::{Error, Result};
use crate::trial::{is_smooth_at, TrialFunction};

/// Coefficients of `∂ᵢΦ[f](x, t) = eᵢ + αᵢ e_n + βᵢ e_{n+1}`, `i = 1..n`.
///
/// Both vectors have length `n`; the last entries are `α_n`, `β_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCoefficients {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl FlowCoefficients {
    pub fn zeros(n: usize) -> Self {
        Self { alpha: vec![0.0; n], beta: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_n(&self) -> f64 {
        self.alpha[self.n() - 1]
    }

    pub fn beta_n(&self) -> f64 {
        self.beta[self.n() - 1]
    }

    /// `α_1..α_{n−1}`.
    pub fn alpha_tangential(&self) -> &[f64] {
        &self.alpha[..self.n() - 1]
    }

    /// `β_1..β_{n−1}`.
    pub fn beta_tangential(&self) -> &[f64] {
        &self.beta[..self.n() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.iter().chain(&self.beta).all(|v| v.is_finite())
    }
}

/// `Φ[f](x, t) = (x', λ√(|x'|² + t²f²) + x_n − λ|x'|, t·f(x))`.
pub fn flow_map(params: &ConeParams, f: &TrialFunction, x: &PlanePoint, t: f64) -> Result<AmbientPoint> {
    gamma_curve(params, x, t * f.value(x))
}

/// Flow coefficients at a differentiability point of `Φ[f](·, t)`.
pub fn flow_coefficients(
    params: &ConeParams,
    f: &TrialFunction,
    x: &PlanePoint,
    t: f64,
) -> Result<FlowCoefficients> {
    params.require_in_slice(x)?;
    if !is_smooth_at(f, &x.x_prime, x.x_n) {
        return Err(Error::NonSmoothPoint);
    }
    let value = f.value(x);
    let grad = f.gradient(x);
    let mut coeffs = FlowCoefficients::zeros(params.n());
    coefficients_into(params.lambda(), &x.x_prime, value, &grad, t, &mut coeffs.alpha, &mut coeffs.beta);
    if !coeffs.is_finite() {
        return Err(Error::NonFinite("flow coefficients"));
    }
    Ok(coeffs)
}

/// Raw coefficient evaluation from `f(x)` and `∇f(x)`; no membership or smoothness checks.
///
/// With `ρ_t = √(|x'|² + t²f²)`:
/// `αᵢ = λ(t²f∂ᵢf/ρ_t + xᵢ/ρ_t − xᵢ/|x'|)` for `i < n`, `α_n = λt²f∂_nf/ρ_t`,
/// `βᵢ = t∂ᵢf`. The difference `xᵢ/ρ_t − xᵢ/|x'|` is rewritten as
/// `−xᵢ t²f² / (ρ_t |x'| (|x'| + ρ_t))`.
pub(crate) fn coefficients_into(
    lambda: f64,
    xp: &[f64],
    value: f64,
    grad: &[f64],
    t: f64,
    alpha: &mut [f64],
    beta: &mut [f64],
) {
    let n = grad.len();
    let r = norm(xp);
    let tf = t * value;
    let rho = r.hypot(tf);
    for i in 0..n {
        beta[i] = t * grad[i];
    }
    if rho == 0.0 {
        // Only reachable on the axis with t·f = 0; take the t = 0 limit.
        alpha.iter_mut().for_each(|a| *a = 0.0);
        return;
    }
    let lead = t * tf / rho;
    for i in 0..n - 1 {
        let shift = if r > 0.0 { -xp[i] * tf * tf / (rho * r * (r + rho)) } else { 0.0 };
        alpha[i] = lambda * (lead * grad[i] + shift);
    }
    alpha[n - 1] = lambda * lead * grad[n - 1];
}

/// The `n` partial derivatives `∂ᵢΦ[f](x, t)` as vectors of `ℝ^{n+1}` in the
/// coordinate order `(x', x_n, t)`.
pub fn flow_partials(
    params: &ConeParams,
    f: &TrialFunction,
    x: &PlanePoint,
    t: f64,
) -> Result<Vec<Vec<f64>>> {
    let c = flow_coefficients(params, f, x, t)?;
    Ok(partials_from_coefficients(&c))
}

pub fn partials_from_coefficients(c: &FlowCoefficients) -> Vec<Vec<f64>> {
    let n = c.n();
    (0..n)
        .map(|i| {
            let mut v = vec![0.0; n + 1];
            v[i] = 1.0;
            v[n - 1] += c.alpha[i];
            v[n] = c.beta[i];
            v
        })
        .collect()
}
