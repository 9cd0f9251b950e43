//! The area `A[f](t)` of the deformed slice `Φ[f](Σ, t)`, its reparametrization
//! `𝒜[f](s) = A[f](√s)`, and lower-right first and second variations.
//!
//! The closed form of the second variation is
//! `½(∫_Σ |∇f|² − λ ∫_{ℝ^{n−1}} f(x', λ|x'|)²/|x'| dx')`.

use serde::Serialize;

use crate::domain::ConeParams;
use crate::error::{Error, Result};
use crate::flow::{coefficients_into, FlowCoefficients};
use crate::jacobian::jacobian_excess;
use crate::quadrature::{
    boundary_integral, integrate_sigma_hinted, liminf_quotient_with, trace_integral, LiminfEstimate, PanelHints,
    QuadratureSpec, QuotientOptions,
};
use crate::trial::TrialFunction;

/// Cutoffs used for the log-divergence certificate when `n = 2` and `f(0) ≠ 0`.
pub const DIVERGENCE_EPSILONS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Evidence that the closed form is `−∞`: cutoff-regularized values and the
/// least-squares slope of those values against `ln(1/ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceCertificate {
    pub epsilons: Vec<f64>,
    pub regularized_values: Vec<f64>,
    pub log_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    /// Order-1 quotients of `A[f]` in `t`.
    pub first_variation: Option<LiminfEstimate>,
    /// Order-1 quotients of `𝒜[f]` in `s = t²`.
    pub second_variation_fd: Option<LiminfEstimate>,
    pub closed_form: f64,
    /// `½∫|∇f|²`.
    pub dirichlet_term: f64,
    /// `−(λ/2)·∫ f(x', λ|x'|)²/|x'| dx'`.
    pub boundary_term: f64,
    /// `|second_variation_fd.extrapolated − closed_form|`, when both are finite.
    pub discrepancy: Option<f64>,
    pub divergence: Option<DivergenceCertificate>,
    /// Both quotient sequences stabilized.
    pub conclusive: bool,
}

impl VariationReport {
    pub fn is_divergent(&self) -> bool {
        self.divergence.is_some()
    }

    /// `discrepancy / |closed_form|`.
    pub fn relative_discrepancy(&self) -> Option<f64> {
        self.discrepancy.map(|d| if self.closed_form == 0.0 { d } else { d / self.closed_form.abs() })
    }
}

/// Quadrature settings adjusted to the support of `f`.
pub fn spec_for(f: &TrialFunction, spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_support_radius(f.support_radius())
}

fn check_dims(params: &ConeParams, f: &TrialFunction) -> Result<()> {
    if params.n() != f.n() {
        return Err(Error::InvalidParameter(format!(
            "trial function has n = {} but the cone has n = {}",
            f.n(),
            params.n()
        )));
    }
    Ok(())
}

/// `|spt f ∩ Σ|`, the area at `t = 0`.
pub fn support_measure(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<f64> {
    check_dims(params, f)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let hints = PanelHints::for_trial(f);
    integrate_sigma_hinted(params, &spec_for(f, spec), &hints, |xp, xn| {
        Ok(if f.value_at(xp, xn) != 0.0 { 1.0 } else { 0.0 })
    })
}

/// `A[f](t) − A[f](0) = ∫_{spt f} (J[f](x, t) − 1) dx`, computed without cancellation.
pub fn area_excess(params: &ConeParams, f: &TrialFunction, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_dims(params, f)?;
    if f.is_zero() || t == 0.0 {
        return Ok(0.0);
    }
    let n = params.n();
    let lambda = params.lambda();
    let hints = PanelHints::for_trial(f);
    let mut grad = vec![0.0; n];
    let mut c = FlowCoefficients::zeros(n);
    integrate_sigma_hinted(params, &spec_for(f, spec), &hints, |xp, xn| {
        let value = f.value_at(xp, xn);
        f.gradient_at(xp, xn, &mut grad);
        if value == 0.0 && grad.iter().all(|g| *g == 0.0) {
            return Ok(0.0);
        }
        coefficients_into(lambda, xp, value, &grad, t, &mut c.alpha, &mut c.beta);
        let excess = jacobian_excess(&c);
        let j2 = 1.0 + excess;
        if !(j2 > 0.0) {
            return Err(Error::DegenerateJacobian { value: j2, t });
        }
        Ok(excess / (j2.sqrt() + 1.0))
    })
}

/// `A[f](t) = ∫_{spt f} J[f](x, t) dx`.
pub fn area(params: &ConeParams, f: &TrialFunction, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(support_measure(params, f, spec)? + area_excess(params, f, t, spec)?)
}

/// `∫_Σ |∇f|²`.
pub fn dirichlet_energy(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<f64> {
    check_dims(params, f)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let hints = PanelHints::for_trial(f);
    let mut grad = vec![0.0; params.n()];
    integrate_sigma_hinted(params, &spec_for(f, spec), &hints, |xp, xn| {
        f.gradient_at(xp, xn, &mut grad);
        Ok(grad.iter().map(|g| g * g).sum())
    })
}

/// `∫ g/(|x'| + √(|x'|² + s·g)) dx'` with `g = f(x', λ|x'|)²`.
///
/// This is `(𝒥(s) − 𝒥(0))/s` for `𝒥(s) = ∫ √(|x'|² + s·g) dx'`; it increases
/// monotonically to `½∫ g/|x'|` as `s ↓ 0` and is finite for every `s > 0`.
pub fn regularized_boundary_integral(
    params: &ConeParams,
    f: &TrialFunction,
    s: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_dims(params, f)?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("regularization s = {s} must be positive")));
    }
    trace_integral(params, f, spec, 0.0, |r, g| if g == 0.0 { 0.0 } else { g / (r + r.hypot((s * g).sqrt())) })
}

/// `½∫|∇f|² − (λ/2)∫_{|x'|>ε} f(x', λ|x'|)²/|x'| dx'`.
pub fn regularized_second_variation(
    params: &ConeParams,
    f: &TrialFunction,
    epsilon: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let d = dirichlet_energy(params, f, spec)?;
    let b = boundary_integral(params, f, &spec.with_epsilon_cutoff(epsilon))?;
    Ok(0.5 * d - 0.5 * params.lambda() * b)
}

/// Least-squares slope of `values` against `ln(1/ε)`.
pub fn log_slope(epsilons: &[f64], values: &[f64]) -> f64 {
    let xs: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = values.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Dirichlet term, boundary term and their sum. Quotient fields are left empty.
///
/// For `n = 2` with `f(0) ≠ 0` and no cutoff the boundary term diverges; the
/// report then carries `closed_form = −∞` and a [`DivergenceCertificate`].
pub fn second_variation_closed_form(
    params: &ConeParams,
    f: &TrialFunction,
    spec: &QuadratureSpec,
) -> Result<VariationReport> {
    let d = dirichlet_energy(params, f, spec)?;
    let dirichlet_term = 0.5 * d;
    let lambda = params.lambda();
    let (boundary_term, divergence) = match boundary_integral(params, f, spec) {
        Ok(b) => (0.0 - 0.5 * lambda * b, None),
        Err(Error::DivergentBoundaryIntegral { .. }) => {
            let mut regularized_values = Vec::with_capacity(DIVERGENCE_EPSILONS.len());
            for eps in DIVERGENCE_EPSILONS {
                let b = boundary_integral(params, f, &spec.with_epsilon_cutoff(eps))?;
                regularized_values.push(dirichlet_term - 0.5 * lambda * b);
            }
            let log_slope = log_slope(&DIVERGENCE_EPSILONS, &regularized_values);
            let term = if lambda > 0.0 { f64::NEG_INFINITY } else { 0.0 };
            let cert = DivergenceCertificate { epsilons: DIVERGENCE_EPSILONS.to_vec(), regularized_values, log_slope };
            (term, if lambda > 0.0 { Some(cert) } else { None })
        }
        Err(e) => return Err(e),
    };
    Ok(VariationReport {
        first_variation: None,
        second_variation_fd: None,
        closed_form: dirichlet_term + boundary_term,
        dirichlet_term,
        boundary_term,
        discrepancy: None,
        divergence,
        conclusive: false,
    })
}

/// `0.1 · inradius(spt f) / (1 + Lip f)`.
pub fn default_t0(f: &TrialFunction) -> f64 {
    0.1 * f.support_inradius() / (1.0 + f.lipschitz_bound())
}

/// Closed form plus both quotient sequences.
///
/// First variation: `(A(t_k) − A(0))/t_k` on `t_k = t0·2^{−k}`. Second: the
/// quotient `(𝒜(s_k) − 𝒜(0))/s_k` on `s_k = t0²·2^{−k}`, whose limit is the
/// closed form. Near the axis the quotient converges like `√s`, which is the
/// exponent used for its Richardson step.
pub fn variation_report(
    params: &ConeParams,
    f: &TrialFunction,
    t0: f64,
    levels: usize,
    spec: &QuadratureSpec,
) -> Result<VariationReport> {
    let mut report = second_variation_closed_form(params, f, spec)?;
    let scale = report.dirichlet_term.abs().max(report.closed_form.abs());
    let scale = if scale.is_finite() { scale } else { report.dirichlet_term.abs() };
    let first_opts = QuotientOptions { abs_floor: scale, ..QuotientOptions::default() };
    let first = liminf_quotient_with(|t| area_excess(params, f, t, spec), 1, t0, levels, &first_opts)?;
    let second_opts = QuotientOptions { abs_floor: 0.0, error_exponent: 0.5, ..QuotientOptions::default() };
    let second =
        liminf_quotient_with(|s| area_excess(params, f, s.sqrt(), spec), 1, t0 * t0, levels, &second_opts)?;
    let second_converged = second.converged || f.is_zero();
    report.conclusive = first.converged && second_converged && report.divergence.is_none();
    report.discrepancy = if report.closed_form.is_finite() {
        Some((second.extrapolated - report.closed_form).abs())
    } else {
        None
    };
    report.first_variation = Some(first);
    report.second_variation_fd = Some(second);
    Ok(report)
}
