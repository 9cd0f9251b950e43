//! The squared area-distortion factor `J[f]² = det(DΦᵀ DΦ)`.
//!
//! Three routes are kept deliberately separate:
//!
//! * [`jacobian_closed_form`]: the closed expression in the flow coefficients,
//! * [`wedge_expansion`]: the coefficients of `v₁ ∧ … ∧ v_n` on an orthonormal basis
//!   of 2-blades completing `e_μ = e₁ ∧ … ∧ e_{n−1}`, whose squared norm is `J²`,
//! * [`jacobian_gram_oracle`]: a generic Gram determinant by Gaussian elimination
//!   that knows nothing about the structure of the partials.

use crate::domain::{ConeParams, PlanePoint};
use crate::error::{Error, Result};
use crate::flow::{flow_coefficients, partials_from_coefficients, FlowCoefficients};
use crate::trial::TrialFunction;

/// All views of `J²` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBreakdown {
    /// Closed form in the flow coefficients.
    pub j_squared: f64,
    /// `1 + t²(|∇f|² + 2λ f ∂_n f / √(|x'|² + t²f²))`.
    pub main_term: f64,
    pub remainder: f64,
    /// Gram determinant of the partials.
    pub gram_value: f64,
    pub wedge_norm_squared: f64,
}

/// `(1+α_n)²(1+Σβᵢ²) + β_n²(1+Σαᵢ²) − 2(1+α_n)β_n Σαᵢβᵢ`, sums over `i < n`.
pub fn jacobian_closed_form(c: &FlowCoefficients) -> f64 {
    let (an, bn) = (c.alpha_n(), c.beta_n());
    let sb2: f64 = c.beta_tangential().iter().map(|b| b * b).sum();
    let sa2: f64 = c.alpha_tangential().iter().map(|a| a * a).sum();
    let sab: f64 = c.alpha_tangential().iter().zip(c.beta_tangential()).map(|(a, b)| a * b).sum();
    (1.0 + an).powi(2) * (1.0 + sb2) + bn * bn * (1.0 + sa2) - 2.0 * (1.0 + an) * bn * sab
}

/// `J² − 1`, expanded so that no `1 − 1` cancellation occurs for small coefficients.
pub fn jacobian_excess(c: &FlowCoefficients) -> f64 {
    let (an, bn) = (c.alpha_n(), c.beta_n());
    let mut sb2 = 0.0;
    let mut sa2 = 0.0;
    let mut sab = 0.0;
    for (a, b) in c.alpha_tangential().iter().zip(c.beta_tangential()) {
        sb2 += b * b;
        sa2 += a * a;
        sab += a * b;
    }
    let one_an = 1.0 + an;
    an * (2.0 + an) + one_an * one_an * sb2 + bn * bn * (1.0 + sa2) - 2.0 * one_an * bn * sab
}

/// Coefficients of `v₁ ∧ … ∧ v_n` on `{e_μ∧e_n, e_μ∧e_{n+1}, e^n_{μ,i}∧e_{n+1}}`:
/// `(1 + α_n, β_n, β_nαᵢ − (1 + α_n)βᵢ for i = 1..n−1)`.
pub fn wedge_expansion(c: &FlowCoefficients) -> Vec<f64> {
    let (an, bn) = (c.alpha_n(), c.beta_n());
    let mut out = Vec::with_capacity(c.n() + 1);
    out.push(1.0 + an);
    out.push(bn);
    out.extend(
        c.alpha_tangential()
            .iter()
            .zip(c.beta_tangential())
            .map(|(a, b)| bn * a - (1.0 + an) * b),
    );
    out
}

pub fn wedge_norm_squared(c: &FlowCoefficients) -> f64 {
    wedge_expansion(c).iter().map(|w| w * w).sum()
}

/// `R = α_n²(1+Σβᵢ²) + 2α_nΣβᵢ² + β_n²Σαᵢ² − 2(1+α_n)β_nΣαᵢβᵢ`, sums over `i < n`.
pub fn remainder(c: &FlowCoefficients) -> f64 {
    let (an, bn) = (c.alpha_n(), c.beta_n());
    let sb2: f64 = c.beta_tangential().iter().map(|b| b * b).sum();
    let sa2: f64 = c.alpha_tangential().iter().map(|a| a * a).sum();
    let sab: f64 = c.alpha_tangential().iter().zip(c.beta_tangential()).map(|(a, b)| a * b).sum();
    an * an * (1.0 + sb2) + 2.0 * an * sb2 + bn * bn * sa2 - 2.0 * (1.0 + an) * bn * sab
}

/// `1 + 2α_n + Σᵢ βᵢ²` over all `i`; equals closed form minus remainder.
pub fn linear_part(c: &FlowCoefficients) -> f64 {
    1.0 + 2.0 * c.alpha_n() + c.beta.iter().map(|b| b * b).sum::<f64>()
}

/// Determinant of the Gram matrix `[vᵢ·vⱼ]` by elimination with partial pivoting.
pub fn jacobian_gram_oracle(partials: &[Vec<f64>]) -> Result<f64> {
    if partials.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Gram oracle input"));
    }
    let k = partials.len();
    let mut g: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| partials[i].iter().zip(&partials[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(determinant(&mut g))
}

fn determinant(m: &mut [Vec<f64>]) -> f64 {
    let k = m.len();
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("nonempty column");
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..k {
            let factor = m[row][col] / p;
            if factor != 0.0 {
                for j in col..k {
                    m[row][j] -= factor * m[col][j];
                }
            }
        }
    }
    det
}

/// `1 + t²(|∇f|² + 2λ f ∂_n f / √(|x'|² + t²f²))` from raw field data.
pub fn main_term(lambda: f64, t: f64, value: f64, grad: &[f64], x_prime_norm: f64) -> f64 {
    let g2: f64 = grad.iter().map(|g| g * g).sum();
    let rho = x_prime_norm.hypot(t * value);
    let cross = if rho > 0.0 { 2.0 * lambda * value * grad[grad.len() - 1] / rho } else { 0.0 };
    1.0 + t * t * (g2 + cross)
}

/// Every view of `J²` at a differentiability point.
pub fn jacobian_breakdown(
    params: &ConeParams,
    f: &TrialFunction,
    x: &PlanePoint,
    t: f64,
) -> Result<JacobianBreakdown> {
    let c = flow_coefficients(params, f, x, t)?;
    let gram_value = jacobian_gram_oracle(&partials_from_coefficients(&c))?;
    Ok(JacobianBreakdown {
        j_squared: jacobian_closed_form(&c),
        main_term: main_term(params.lambda(), t, f.value(x), &f.gradient(x), x.x_prime_norm()),
        remainder: remainder(&c),
        gram_value,
        wedge_norm_squared: wedge_norm_squared(&c),
    })
}

/// A constant `C(λ, n, Lip f)` with `|R[f](x, t)| ≤ C t²` for all `|t| ≤ 1`.
///
/// Built from `|α_n| ≤ λLt`, `|βᵢ| ≤ Lt`, `Σ_{i<n} βᵢ² ≤ L²t²` and
/// `|αᵢ| ≤ λ(Lt + 1)` for `i < n`.
pub fn remainder_bound(lambda: f64, n: usize, lip: f64) -> f64 {
    let m = (n - 1) as f64;
    let l = lip;
    let alpha_tan = lambda * (1.0 + l);
    lambda * lambda * l * l * (1.0 + l * l)
        + 2.0 * lambda * l * l * l
        + m * alpha_tan * alpha_tan * l * l
        + 2.0 * (1.0 + lambda * l) * l * m.sqrt() * alpha_tan * l
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn coeffs(alpha: &[f64], beta: &[f64]) -> FlowCoefficients {
        FlowCoefficients { alpha: alpha.to_vec(), beta: beta.to_vec() }
    }

    #[test]
    fn undeformed_is_one() {
        let c = FlowCoefficients::zeros(4);
        assert_eq!(jacobian_closed_form(&c), 1.0);
        assert_eq!(jacobian_excess(&c), 0.0);
        assert_eq!(remainder(&c), 0.0);
        assert_eq!(wedge_expansion(&c), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn shear_only_has_unit_gram() {
        let c = coeffs(&[0.4, -1.3, 0.0], &[0.0; 3]);
        assert_relative_eq!(jacobian_closed_form(&c), 1.0, max_relative = 1e-15);
        let g = jacobian_gram_oracle(&partials_from_coefficients(&c)).unwrap();
        assert_relative_eq!(g, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn vertical_tilt_in_two_dimensions() {
        let b = 0.7;
        let c = coeffs(&[0.0, 0.0], &[0.0, b]);
        assert_relative_eq!(jacobian_closed_form(&c), 1.0 + b * b, max_relative = 1e-15);
    }

    #[test]
    fn gram_oracle_basics() {
        let basis: Vec<Vec<f64>> = (0..3).map(|i| (0..4).map(|j| f64::from(i == j)).collect()).collect();
        assert_eq!(jacobian_gram_oracle(&basis).unwrap(), 1.0);
        assert_eq!(jacobian_gram_oracle(&[vec![2.0, 0.0]]).unwrap(), 4.0);
        assert!(jacobian_gram_oracle(&[vec![f64::NAN, 0.0]]).is_err());
    }

    #[test]
    fn wedge_coefficient_formula() {
        let a = 0.3;
        let c = coeffs(&[a, 0.0, 0.2], &[0.5, -0.1, 0.4]);
        let w = wedge_expansion(&c);
        assert_relative_eq!(w[2], 0.4 * a - 1.2 * 0.5, max_relative = 1e-15);
        assert_eq!(w.len(), 4);
    }

    #[test]
    fn closed_minus_remainder_is_linear_part() {
        let c = coeffs(&[0.3, -0.7, 0.2], &[0.5, -0.1, 0.4]);
        assert_relative_eq!(jacobian_closed_form(&c) - remainder(&c), linear_part(&c), max_relative = 1e-14);
        assert_relative_eq!(jacobian_excess(&c) + 1.0, jacobian_closed_form(&c), max_relative = 1e-15);
    }

    #[test]
    fn determinant_with_pivoting() {
        let mut m = vec![vec![0.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(determinant(&mut m), -6.0);
    }
}
