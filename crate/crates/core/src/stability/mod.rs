//! Kato's constant, the threshold aperture `λ*(n)`, Kato margins, the shear
//! reduction to a half-space, and stability verdicts.
//!
//! For `n ≥ 3` the slice is strictly stable whenever `λ(1 + λ)² ≤ K_n`, where
//! `K_n = 2Γ(n/4)²/Γ((n−2)/4)²` is the sharp constant of the half-space inequality
//! `∫_{ℝⁿ₊} |∇g|² ≥ K_n ∫_{ℝ^{n−1}} g(x', 0)²/|x'| dx'`.
//! For `n = 2` any field with `f(0) ≠ 0` has second variation `−∞`.

mod gamma;

use serde::{Deserialize, Serialize};

use crate::domain::{norm, ConeParams, PlanePoint};
use crate::error::{Error, Result};
use crate::quadrature::{boundary_integral, estimate, integrate_halfspace_hinted, PanelHints, QuadratureSpec};
use crate::trial::{TrialFamily, TrialFunction};
use crate::variation::{dirichlet_energy, log_slope, regularized_second_variation, spec_for};

pub use gamma::gamma;

/// Margins below this are treated as violations in the proven-stable regime.
pub const MARGIN_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub n: usize,
    pub k_n: f64,
    pub lambda_star: f64,
    /// `λ*(1 + λ*)² − K_n`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ProvenStable,
    Unstable,
    Inconclusive,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::ProvenStable => "proven_stable",
            Regime::Unstable => "unstable",
            Regime::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub regime: Regime,
    pub witness: Option<TrialFunction>,
    /// Smallest margin found (a regularized second variation for `n = 2`).
    pub margin: Option<f64>,
    /// Fitted slope against `ln(1/ε)`, for the `n = 2` witness path.
    pub log_slope: Option<f64>,
    /// One entry per battery member, or per cutoff for the `n = 2` path.
    pub margins: Vec<f64>,
}

impl StabilityVerdict {
    fn inconclusive(margins: Vec<f64>) -> Self {
        let margin = margins.iter().copied().reduce(f64::min);
        Self { regime: Regime::Inconclusive, witness: None, margin, log_slope: None, margins }
    }
}

fn require_n_at_least_3(n: usize, what: &'static str) -> Result<()> {
    if n < 3 {
        Err(Error::UnsupportedDimension { n, what })
    } else {
        Ok(())
    }
}

/// `K_n = 2Γ(n/4)²/Γ((n−2)/4)²` for `n ≥ 3`.
pub fn kato_constant(n: usize) -> Result<f64> {
    require_n_at_least_3(n, "Kato's constant")?;
    let ratio = gamma(n as f64 / 4.0) / gamma((n as f64 - 2.0) / 4.0);
    Ok(2.0 * ratio * ratio)
}

/// The unique root of `λ(1 + λ)² = K_n`, by bisection on `[0, max(1, K_n)]`.
pub fn lambda_star(n: usize) -> Result<ThresholdResult> {
    let k_n = kato_constant(n)?;
    let h = |l: f64| l * (1.0 + l) * (1.0 + l) - k_n;
    let (mut lo, mut hi) = (0.0, k_n.max(1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_star = if h(hi).abs() < h(lo).abs() { hi } else { lo };
    Ok(ThresholdResult { n, k_n, lambda_star, residual: h(lambda_star) })
}

/// `∫_Σ |∇f|² − K_n/(1+λ)² · ∫ f(x', λ|x'|)²/|x'| dx'`.
pub fn kato_margin(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<f64> {
    require_n_at_least_3(params.n(), "Kato margins")?;
    let k = kato_constant(params.n())?;
    let d = dirichlet_energy(params, f, spec)?;
    let b = boundary_integral(params, f, &spec.with_epsilon_cutoff(0.0))?;
    Ok(d - k / (1.0 + params.lambda()).powi(2) * b)
}

/// `T(x) = (x', x_n + λ|x'|)`, mapping `{x_n > 0}` onto `Σ` with `det DT ≡ 1`.
pub fn shear_map(params: &ConeParams, x: &PlanePoint) -> PlanePoint {
    PlanePoint::new(x.x_prime.clone(), x.x_n + params.lambda() * x.x_prime_norm())
}

/// Energies on both sides of the shear and the common trace integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShearCheck {
    /// `∫_Σ |∇f|²`.
    pub dirichlet_sigma: f64,
    /// `∫_{x_n > 0} |∇(f∘T)|²`.
    pub dirichlet_halfspace: f64,
    /// `∫ (f∘T)(x', 0)²/|x'| dx' = ∫ f(x', λ|x'|)²/|x'| dx'`.
    pub trace: f64,
}

impl ShearCheck {
    /// `(1+λ)²·E_f − E_g`; nonnegative by `|∇g| ≤ (1+λ)|∇f∘T|`.
    pub fn energy_slack(&self, lambda: f64) -> f64 {
        (1.0 + lambda).powi(2) * self.dirichlet_sigma - self.dirichlet_halfspace
    }

    /// `E_g − K_n·trace`; nonnegative by the half-space inequality.
    pub fn kato_slack(&self, k_n: f64) -> f64 {
        self.dirichlet_halfspace - k_n * self.trace
    }
}

pub fn shear_transform_check(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<ShearCheck> {
    require_n_at_least_3(params.n(), "the shear check")?;
    let n = params.n();
    let lambda = params.lambda();
    let dirichlet_sigma = dirichlet_energy(params, f, spec)?;
    let hints = PanelHints::for_trial(f);
    let mut grad = vec![0.0; n];
    let dirichlet_halfspace = if f.is_zero() {
        0.0
    } else {
        integrate_halfspace_hinted(params, &spec_for(f, spec), &hints, |xp, y| {
            // ∇g(x) = ∇f(Tx) + λ ∂_n f(Tx) (x'/|x'|, 0)
            let r = norm(xp);
            f.gradient_at(xp, y + lambda * r, &mut grad);
            let dn = grad[n - 1];
            let mut total = dn * dn;
            for (g, x) in grad[..n - 1].iter().zip(xp) {
                let v = g + lambda * dn * x / r;
                total += v * v;
            }
            Ok(total)
        })?
    };
    let trace = boundary_integral(params, f, &spec.with_epsilon_cutoff(0.0))?;
    Ok(ShearCheck { dirichlet_sigma, dirichlet_halfspace, trace })
}

/// The fixed `n = 2` witness: `(1 − |x|²)²₊`, so `f(0) = 1`.
pub fn n2_witness() -> TrialFunction {
    TrialFunction::new(2, TrialFamily::BoundaryConcentrated { radius: 1.0, exponent: 2.0, height: 0.0 })
        .expect("valid witness shape")
}

/// Evaluates `½∫|∇f|² − (λ/2)∫_{|x₁|>ε} f(x₁, λ|x₁|)²/|x₁|` for the witness on
/// each cutoff. The verdict is `Unstable` when the values strictly decrease and
/// their slope against `ln(1/ε)` is within 10% of `−λ`.
pub fn instability_witness_n2(
    params: &ConeParams,
    epsilons: &[f64],
    spec: &QuadratureSpec,
) -> Result<StabilityVerdict> {
    if params.n() != 2 {
        return Err(Error::UnsupportedDimension { n: params.n(), what: "the two-dimensional witness" });
    }
    if epsilons.len() < 2
        || epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0))
        || epsilons.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter(
            "cutoffs must be a decreasing sequence of at least two values in (0, 1)".into(),
        ));
    }
    let f = n2_witness();
    let values = epsilons
        .iter()
        .map(|eps| regularized_second_variation(params, &f, *eps, spec))
        .collect::<Result<Vec<f64>>>()?;
    let slope = log_slope(epsilons, &values);
    let lambda = params.lambda();
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let slope_ok = lambda > 0.0 && (slope + lambda).abs() <= 0.1 * lambda;
    let regime = if decreasing && slope_ok { Regime::Unstable } else { Regime::Inconclusive };
    Ok(StabilityVerdict {
        regime,
        witness: (regime == Regime::Unstable).then_some(f),
        margin: values.last().copied(),
        log_slope: Some(slope),
        margins: values,
    })
}

/// Verdict for `n = 2` and a given field: a field with `f(0) ≠ 0` is a witness
/// (its closed form is `−∞` for `λ > 0`); otherwise nothing is concluded.
pub fn assess_n2(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<StabilityVerdict> {
    if params.n() != 2 {
        return Err(Error::UnsupportedDimension { n: params.n(), what: "the two-dimensional witness" });
    }
    if f.value_at_vertex() != 0.0 && params.lambda() > 0.0 {
        return Ok(StabilityVerdict {
            regime: Regime::Unstable,
            witness: Some(f.clone()),
            margin: Some(f64::NEG_INFINITY),
            log_slope: None,
            margins: vec![f64::NEG_INFINITY],
        });
    }
    let d = dirichlet_energy(params, f, spec)?;
    let b = boundary_integral(params, f, spec)?;
    Ok(StabilityVerdict::inconclusive(vec![d - params.lambda() * b]))
}

/// `∫|∇f|² − λ∫ f(x', λ|x'|)²/|x'| dx'` with its quadrature error estimate.
pub fn stability_margin(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let spec = spec.with_epsilon_cutoff(0.0);
    let d = estimate(&spec, |s| dirichlet_energy(params, f, s))?;
    let b = estimate(&spec, |s| boundary_integral(params, f, s))?;
    let lambda = params.lambda();
    Ok((d.value - lambda * b.value, d.error + lambda * b.error))
}

/// Margins over a battery and the resulting verdict.
///
/// `λ ≤ λ*`: proven stable, and a margin below `−1e−8` is an invariant violation.
/// `λ > λ*`: unstable only if some margin is below `−10×` its error estimate.
pub fn stability_sweep(
    params: &ConeParams,
    battery: &[TrialFunction],
    spec: &QuadratureSpec,
) -> Result<StabilityVerdict> {
    require_n_at_least_3(params.n(), "the stability sweep")?;
    if battery.is_empty() {
        return Ok(StabilityVerdict::inconclusive(Vec::new()));
    }
    let threshold = lambda_star(params.n())?;
    let within = params.lambda() <= threshold.lambda_star * (1.0 + 1e-12);
    let mut margins = Vec::with_capacity(battery.len());
    let mut witness: Option<(usize, f64)> = None;
    for (i, f) in battery.iter().enumerate() {
        let (m, err) = stability_margin(params, f, spec)?;
        if within && m < -MARGIN_SLACK {
            return Err(Error::InvariantViolation(format!(
                "margin {m:e} < 0 for battery member {i} at λ = {} ≤ λ*",
                params.lambda()
            )));
        }
        if !within && m < -10.0 * err && witness.is_none_or(|(_, best)| m < best) {
            witness = Some((i, m));
        }
        margins.push(m);
    }
    let margin = margins.iter().copied().reduce(f64::min);
    if within {
        return Ok(StabilityVerdict { regime: Regime::ProvenStable, witness: None, margin, log_slope: None, margins });
    }
    Ok(match witness {
        Some((i, m)) => StabilityVerdict {
            regime: Regime::Unstable,
            witness: Some(battery[i].clone()),
            margin: Some(m),
            log_slope: None,
            margins,
        },
        None => StabilityVerdict::inconclusive(margins),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn kato_constant_closed_forms() {
        assert_relative_eq!(kato_constant(4).unwrap(), 2.0 / PI, max_relative = 1e-13);
        assert_relative_eq!(kato_constant(6).unwrap(), PI / 2.0, max_relative = 1e-13);
        assert_relative_eq!(kato_constant(3).unwrap(), 0.228_473_290_522_231_8, max_relative = 1e-13);
        assert!(matches!(kato_constant(2), Err(Error::UnsupportedDimension { n: 2, .. })));
    }

    #[test]
    fn threshold_residual() {
        for n in 3..=12 {
            let t = lambda_star(n).unwrap();
            assert!(t.residual.abs() <= 1e-12 * t.k_n);
            assert!(t.lambda_star > 0.0);
        }
        assert_relative_eq!(lambda_star(4).unwrap().lambda_star, 0.349_546_212_970_872_5, max_relative = 1e-12);
    }

    #[test]
    fn shear_map_example() {
        let p = ConeParams::new(3, 2.0).unwrap();
        assert_eq!(shear_map(&p, &PlanePoint::new(vec![3.0, 4.0], 1.0)), PlanePoint::new(vec![3.0, 4.0], 11.0));
    }

    #[test]
    fn empty_battery_is_inconclusive() {
        let p = ConeParams::new(3, 0.05).unwrap();
        let v = stability_sweep(&p, &[], &QuadratureSpec::default()).unwrap();
        assert_eq!(v.regime, Regime::Inconclusive);
        assert!(v.margin.is_none());
    }

    #[test]
    fn two_dimensional_sweep_is_rejected() {
        let p = ConeParams::new(2, 0.5).unwrap();
        assert!(stability_sweep(&p, &[], &QuadratureSpec::default()).is_err());
    }
}
