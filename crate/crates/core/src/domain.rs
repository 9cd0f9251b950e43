//! Cone geometry.
//!
//! `Ω_λ = {(x', x_n, t) : x_n > λ √(|x'|² + t²)}` is the circular cone with aperture
//! parameter `λ`, and `Σ = {x ∈ Ω_λ : t = 0}` is the flat slice through its axis.
//! Every point `x ∈ Σ̄` carries a foliation curve
//! `Γ_x(t) = (x', x_n + ω(x', t) − ω(x', 0), t)` which stays in `Ω̄_λ`, and which
//! stays on `∂Ω_λ` exactly when `x ∈ ∂Σ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to classify points on `∂Σ` and `∂Ω_λ`.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-12;

/// Dimension `n` of the slice and aperture parameter `λ` of the cone.
///
/// `λ = 0` is accepted as the degenerate flat case, where `Ω_0` is a half-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    n: usize,
    lambda: f64,
    #[serde(default = "default_tol")]
    membership_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_MEMBERSHIP_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

impl Membership {
    pub fn is_in_closure(self) -> bool {
        self != Membership::Outside
    }
}

impl ConeParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n = {n} must be at least 2")));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "aperture parameter λ = {lambda} must be finite and nonnegative"
            )));
        }
        Ok(Self { n, lambda, membership_tol: DEFAULT_MEMBERSHIP_TOL })
    }

    /// Replaces the relative membership tolerance (absolute tolerance is `tol·(1 + |x|)`).
    pub fn with_membership_tol(mut self, tol: f64) -> Self {
        self.membership_tol = tol.abs();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    /// Opening angle `α_λ = 2·arccot(λ)`.
    pub fn aperture(&self) -> f64 {
        aperture_of(self.lambda)
    }

    /// Lipschitz constant of `(x, t) ↦ Γ_x(t)` in the 1-norm `|x'−y'| + |x_n−y_n| + |t−u|`.
    pub fn foliation_lipschitz_bound(&self) -> f64 {
        foliation_lipschitz_bound(self)
    }

    fn tolerance_at(&self, norm: f64) -> f64 {
        self.membership_tol * (1.0 + norm)
    }

    /// Classifies `x` against `Σ̄`. The vertex is a boundary point.
    pub fn classify_plane(&self, x: &PlanePoint) -> Membership {
        self.check_dim(x.x_prime.len());
        let excess = x.x_n - self.lambda * x.x_prime_norm();
        classify(excess, self.tolerance_at(x.norm()))
    }

    /// Classifies `p` against `Ω̄_λ`.
    pub fn classify_ambient(&self, p: &AmbientPoint) -> Membership {
        self.check_dim(p.x_prime.len());
        let excess = p.x_n - omega_profile(self, &p.x_prime, p.t);
        classify(excess, self.tolerance_at(p.norm()))
    }

    fn check_dim(&self, len: usize) {
        debug_assert_eq!(len + 1, self.n, "point dimension does not match n");
    }

    pub(crate) fn require_in_slice(&self, x: &PlanePoint) -> Result<()> {
        if x.x_prime.len() + 1 != self.n {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {} but n = {}",
                x.x_prime.len() + 1,
                self.n
            )));
        }
        match self.classify_plane(x) {
            Membership::Outside => Err(Error::OutsideSlice {
                x_n_excess: x.x_n - self.lambda * x.x_prime_norm(),
            }),
            _ => Ok(()),
        }
    }
}

fn classify(excess: f64, tol: f64) -> Membership {
    if excess > tol {
        Membership::Interior
    } else if excess >= -tol {
        Membership::Boundary
    } else {
        Membership::Outside
    }
}

pub fn aperture_of(lambda: f64) -> f64 {
    // arccot(λ) = atan(1/λ) for λ > 0; the flat case opens to π.
    if lambda == 0.0 {
        std::f64::consts::PI
    } else {
        2.0 * (1.0 / lambda).atan()
    }
}

/// A point `x = (x', x_n)` of the `n`-plane containing `Σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x_prime: Vec<f64>,
    pub x_n: f64,
}

impl PlanePoint {
    pub fn new(x_prime: Vec<f64>, x_n: f64) -> Self {
        Self { x_prime, x_n }
    }

    /// Builds a point from its full coordinate list; the last entry is `x_n`.
    pub fn from_coords(coords: &[f64]) -> Self {
        let (last, head) = coords.split_last().expect("a plane point needs at least one coordinate");
        Self { x_prime: head.to_vec(), x_n: *last }
    }

    pub fn origin(n: usize) -> Self {
        Self { x_prime: vec![0.0; n - 1], x_n: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x_prime.len() + 1
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x_prime.clone();
        c.push(self.x_n);
        c
    }

    pub fn x_prime_norm(&self) -> f64 {
        norm(&self.x_prime)
    }

    pub fn norm(&self) -> f64 {
        self.x_prime_norm().hypot(self.x_n)
    }
}

/// A point `x̃ = (x', x_n, t)` of `ℝ^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub x_prime: Vec<f64>,
    pub x_n: f64,
    pub t: f64,
}

impl AmbientPoint {
    pub fn new(x_prime: Vec<f64>, x_n: f64, t: f64) -> Self {
        Self { x_prime, x_n, t }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x_prime.clone();
        c.push(self.x_n);
        c.push(self.t);
        c
    }

    pub fn norm(&self) -> f64 {
        norm(&self.x_prime).hypot(self.x_n).hypot(self.t)
    }

    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        let d: f64 = self
            .x_prime
            .iter()
            .zip(&other.x_prime)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            + (self.x_n - other.x_n).powi(2)
            + (self.t - other.t).powi(2);
        d.sqrt()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// `ω_λ(x', t) = λ √(|x'|² + t²)`.
pub fn omega_profile(params: &ConeParams, x_prime: &[f64], t: f64) -> f64 {
    params.lambda * norm(x_prime).hypot(t)
}

/// `ω_λ(x', t) − ω_λ(x', 0)` for `|x'| = r`, evaluated without cancellation.
pub(crate) fn omega_increment(lambda: f64, r: f64, t: f64) -> f64 {
    let rho = r.hypot(t);
    let denom = rho + r;
    if denom == 0.0 {
        0.0
    } else {
        lambda * t * t / denom
    }
}

/// The foliation point `Γ_x(t)`. Rejects `x ∉ Σ̄`.
pub fn gamma_curve(params: &ConeParams, x: &PlanePoint, t: f64) -> Result<AmbientPoint> {
    params.require_in_slice(x)?;
    let r = x.x_prime_norm();
    Ok(AmbientPoint {
        x_prime: x.x_prime.clone(),
        x_n: x.x_n + omega_increment(params.lambda, r, t),
        t,
    })
}

/// `1 + 2·Lip(ω_λ) = 1 + 2λ`.
pub fn foliation_lipschitz_bound(params: &ConeParams) -> f64 {
    1.0 + 2.0 * params.lambda
}
