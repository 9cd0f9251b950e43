//! Compactly supported Lipschitz deformation fields on `Σ̄`.
//!
//! Each family is parameterized so it can be read from a config file, and each
//! carries an analytic description of where its gradient fails to exist. The
//! quadrature uses those surfaces to split its panels, and the flow uses them to
//! reject nodes where the derivative formulas do not apply.

use serde::{Deserialize, Serialize};

use crate::domain::{norm, PlanePoint};
use crate::error::{Error, Result};

/// Parameterized trial-field families.
///
/// Centers are full coordinate lists `(x', x_n)` of length `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrialFamily {
    /// Cone-shaped hat `(1 − |x − c|/ρ)₊`.
    RadialBump { center: Vec<f64>, radius: f64 },
    /// Product `∏ᵢ (1 − (xᵢ − cᵢ)²/ρ²)₊^p` over all coordinates.
    TensorBump { center: Vec<f64>, radius: f64, exponent: f64 },
    /// Polynomial bump `(1 − |x − c|²/ρ²)₊^p` centered anywhere.
    ShiftedBump { center: Vec<f64>, radius: f64, exponent: f64 },
    /// Polynomial bump centered on the axis at height `h < ρ`, normalized to `f(0) = 1`.
    /// Its boundary trace stays near one around the vertex.
    BoundaryConcentrated { radius: f64, exponent: f64, height: f64 },
}

impl TrialFamily {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TrialFamily::RadialBump { .. } => "radial_bump",
            TrialFamily::TensorBump { .. } => "tensor_bump",
            TrialFamily::ShiftedBump { .. } => "shifted_bump",
            TrialFamily::BoundaryConcentrated { .. } => "boundary_concentrated",
        }
    }
}

/// A surface across which a trial field (or its gradient) is not smooth.
#[derive(Debug, Clone, PartialEq)]
pub enum KinkSurface {
    Sphere { center: Vec<f64>, radius: f64 },
    /// The hyperplane `x_axis = offset` (axis indexes full coordinates, `n − 1` is `x_n`).
    Plane { axis: usize, offset: f64 },
    Point { center: Vec<f64> },
}

/// A scaled member `c·f` of a [`TrialFamily`] in dimension `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrialFunctionRepr")]
pub struct TrialFunction {
    n: usize,
    family: TrialFamily,
    amplitude: f64,
    #[serde(skip)]
    vertex_value: f64,
}

/// Deserialized form; goes through validation in [`TrialFunction::with_amplitude`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrialFunctionRepr {
    n: usize,
    family: TrialFamily,
    #[serde(default = "unit_amplitude")]
    amplitude: f64,
}

fn unit_amplitude() -> f64 {
    1.0
}

impl TryFrom<TrialFunctionRepr> for TrialFunction {
    type Error = Error;

    fn try_from(r: TrialFunctionRepr) -> Result<Self> {
        Self::with_amplitude(r.n, r.family, r.amplitude)
    }
}

const KINK_TOL: f64 = 1e-12;

impl TrialFunction {
    pub fn new(n: usize, family: TrialFamily) -> Result<Self> {
        Self::with_amplitude(n, family, 1.0)
    }

    pub fn with_amplitude(n: usize, family: TrialFamily, amplitude: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("trial field dimension n = {n} must be ≥ 2")));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter("trial amplitude must be finite".into()));
        }
        validate_family(n, &family)?;
        let mut f = Self { n, family, amplitude, vertex_value: 0.0 };
        f.vertex_value = f.value_at(&vec![0.0; n - 1], 0.0);
        Ok(f)
    }

    /// The field `c·f`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut g = self.clone();
        g.amplitude *= c;
        g.vertex_value *= c;
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &TrialFamily {
        &self.family
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Cached `f(0)`.
    pub fn value_at_vertex(&self) -> f64 {
        self.vertex_value
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    /// `f` vanishes outside the ball of this radius about the origin.
    pub fn support_radius(&self) -> f64 {
        match &self.family {
            TrialFamily::RadialBump { center, radius }
            | TrialFamily::ShiftedBump { center, radius, .. } => norm(center) + radius,
            TrialFamily::TensorBump { center, radius, .. } => {
                norm(center) + radius * (self.n as f64).sqrt()
            }
            TrialFamily::BoundaryConcentrated { radius, height, .. } => height + radius,
        }
    }

    /// Radius of the largest ball contained in the support.
    pub fn support_inradius(&self) -> f64 {
        match &self.family {
            TrialFamily::RadialBump { radius, .. }
            | TrialFamily::ShiftedBump { radius, .. }
            | TrialFamily::TensorBump { radius, .. }
            | TrialFamily::BoundaryConcentrated { radius, .. } => *radius,
        }
    }

    /// Upper bound for `Lip(f)`.
    pub fn lipschitz_bound(&self) -> f64 {
        let a = self.amplitude.abs();
        match &self.family {
            TrialFamily::RadialBump { radius, .. } => a / radius,
            TrialFamily::ShiftedBump { radius, exponent, .. } => {
                a * profile_lipschitz(*exponent) / radius
            }
            TrialFamily::TensorBump { radius, exponent, .. } => {
                a * (self.n as f64).sqrt() * profile_lipschitz(*exponent) / radius
            }
            TrialFamily::BoundaryConcentrated { radius, exponent, height } => {
                let norm_factor = (1.0 - (height / radius).powi(2)).powf(*exponent);
                a * profile_lipschitz(*exponent) / radius / norm_factor
            }
        }
    }

    pub fn value(&self, x: &PlanePoint) -> f64 {
        self.value_at(&x.x_prime, x.x_n)
    }

    pub fn gradient(&self, x: &PlanePoint) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.gradient_at(&x.x_prime, x.x_n, &mut g);
        g
    }

    /// `f(x', x_n)`.
    pub fn value_at(&self, xp: &[f64], xn: f64) -> f64 {
        debug_assert_eq!(xp.len() + 1, self.n);
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let a = self.amplitude;
        match &self.family {
            TrialFamily::RadialBump { center, radius } => {
                let d = dist(center, xp, xn);
                a * (1.0 - d / radius).max(0.0)
            }
            TrialFamily::ShiftedBump { center, radius, exponent } => {
                let u2 = dist2(center, xp, xn) / (radius * radius);
                a * poly_bump(u2, *exponent)
            }
            TrialFamily::BoundaryConcentrated { radius, exponent, height } => {
                let u2 = (norm2(xp) + (xn - height).powi(2)) / (radius * radius);
                let h2 = (height / radius).powi(2);
                a * poly_bump(u2, *exponent) / (1.0 - h2).powf(*exponent)
            }
            TrialFamily::TensorBump { center, radius, exponent } => {
                let mut v = a;
                for (i, c) in center.iter().enumerate() {
                    let s = coord(xp, xn, i) - c;
                    v *= poly_bump(s * s / (radius * radius), *exponent);
                    if v == 0.0 {
                        break;
                    }
                }
                v
            }
        }
    }

    /// Writes `∇f(x', x_n)` into `out` (length `n`). At kinks the value is one of the
    /// one-sided limits; callers that care test [`is_smooth_point`] first.
    pub fn gradient_at(&self, xp: &[f64], xn: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        out.iter_mut().for_each(|g| *g = 0.0);
        if self.amplitude == 0.0 {
            return;
        }
        let a = self.amplitude;
        match &self.family {
            TrialFamily::RadialBump { center, radius } => {
                let d = dist(center, xp, xn);
                if d > 0.0 && d < *radius {
                    let s = -a / (radius * d);
                    for (i, g) in out.iter_mut().enumerate() {
                        *g = s * (coord(xp, xn, i) - center[i]);
                    }
                }
            }
            TrialFamily::ShiftedBump { center, radius, exponent } => {
                let r2 = radius * radius;
                let u2 = dist2(center, xp, xn) / r2;
                if u2 < 1.0 {
                    let s = a * poly_bump_slope(u2, *exponent) * 2.0 / r2;
                    for (i, g) in out.iter_mut().enumerate() {
                        *g = s * (coord(xp, xn, i) - center[i]);
                    }
                }
            }
            TrialFamily::BoundaryConcentrated { radius, exponent, height } => {
                let r2 = radius * radius;
                let u2 = (norm2(xp) + (xn - height).powi(2)) / r2;
                if u2 < 1.0 {
                    let h2 = (height / radius).powi(2);
                    let s = a * poly_bump_slope(u2, *exponent) * 2.0 / r2
                        / (1.0 - h2).powf(*exponent);
                    let last = self.n - 1;
                    for (i, g) in out.iter_mut().enumerate() {
                        let c = if i == last { *height } else { 0.0 };
                        *g = s * (coord(xp, xn, i) - c);
                    }
                }
            }
            TrialFamily::TensorBump { center, radius, exponent } => {
                let r2 = radius * radius;
                let n = self.n;
                // n ≤ 16 is enforced at construction.
                let mut phi_buf = [0.0f64; 16];
                let mut dphi_buf = [0.0f64; 16];
                let (phi, dphi) = (&mut phi_buf[..n], &mut dphi_buf[..n]);
                for i in 0..n {
                    let s = coord(xp, xn, i) - center[i];
                    let u2 = s * s / r2;
                    phi[i] = poly_bump(u2, *exponent);
                    dphi[i] = if u2 < 1.0 { poly_bump_slope(u2, *exponent) * 2.0 * s / r2 } else { 0.0 };
                }
                for i in 0..n {
                    let mut g = a * dphi[i];
                    for (j, p) in phi.iter().enumerate() {
                        if j != i {
                            g *= p;
                        }
                    }
                    out[i] = g;
                }
            }
        }
    }

    /// Surfaces where `∇f` is discontinuous or undefined.
    pub fn kink_set(&self) -> Vec<KinkSurface> {
        if self.amplitude == 0.0 {
            return Vec::new();
        }
        match &self.family {
            TrialFamily::RadialBump { center, radius } => vec![
                KinkSurface::Sphere { center: center.clone(), radius: *radius },
                KinkSurface::Point { center: center.clone() },
            ],
            TrialFamily::ShiftedBump { center, radius, exponent } => {
                if *exponent == 1.0 {
                    vec![KinkSurface::Sphere { center: center.clone(), radius: *radius }]
                } else {
                    Vec::new()
                }
            }
            TrialFamily::BoundaryConcentrated { radius, exponent, height } => {
                if *exponent == 1.0 {
                    vec![KinkSurface::Sphere { center: self.axis_point(*height), radius: *radius }]
                } else {
                    Vec::new()
                }
            }
            TrialFamily::TensorBump { center, radius, exponent } => {
                if *exponent == 1.0 {
                    self.box_faces(center, *radius)
                } else {
                    Vec::new()
                }
            }
        }
    }

    /// Surfaces across which `f` loses smoothness of any order: the kink set plus the
    /// boundary of the support. Quadrature panels are split along these.
    pub fn panel_surfaces(&self) -> Vec<KinkSurface> {
        if self.amplitude == 0.0 {
            return Vec::new();
        }
        match &self.family {
            TrialFamily::RadialBump { .. } => self.kink_set(),
            TrialFamily::ShiftedBump { center, radius, .. } => {
                vec![KinkSurface::Sphere { center: center.clone(), radius: *radius }]
            }
            TrialFamily::BoundaryConcentrated { radius, height, .. } => {
                vec![KinkSurface::Sphere { center: self.axis_point(*height), radius: *radius }]
            }
            TrialFamily::TensorBump { center, radius, .. } => self.box_faces(center, *radius),
        }
    }

    fn axis_point(&self, height: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n];
        c[self.n - 1] = height;
        c
    }

    fn box_faces(&self, center: &[f64], radius: f64) -> Vec<KinkSurface> {
        center
            .iter()
            .enumerate()
            .flat_map(|(axis, c)| {
                [
                    KinkSurface::Plane { axis, offset: c - radius },
                    KinkSurface::Plane { axis, offset: c + radius },
                ]
            })
            .collect()
    }

    fn on_kink(&self, xp: &[f64], xn: f64) -> bool {
        self.kink_set().iter().any(|k| match k {
            KinkSurface::Sphere { center, radius } => {
                (dist(center, xp, xn) - radius).abs() <= KINK_TOL * (1.0 + radius)
            }
            KinkSurface::Point { center } => dist(center, xp, xn) <= KINK_TOL * (1.0 + norm(center)),
            KinkSurface::Plane { axis, offset } => {
                (coord(xp, xn, *axis) - offset).abs() <= KINK_TOL * (1.0 + offset.abs())
            }
        })
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        self.family.kind_name().to_string()
    }
}

/// True iff both `f` and the flow map are differentiable at `x`: `x` is off the
/// axis `{x' = 0}` and off the kink set of `f`.
pub fn is_smooth_point(f: &TrialFunction, x: &PlanePoint) -> bool {
    is_smooth_at(f, &x.x_prime, x.x_n)
}

pub(crate) fn is_smooth_at(f: &TrialFunction, xp: &[f64], xn: f64) -> bool {
    norm(xp) > 0.0 && !f.on_kink(xp, xn)
}

/// The hat `max(0, 1 − |x − center|/radius)`.
pub fn make_radial_bump(center: &PlanePoint, radius: f64, n: usize) -> Result<TrialFunction> {
    TrialFunction::new(n, TrialFamily::RadialBump { center: center.coords(), radius })
}

fn validate_family(n: usize, family: &TrialFamily) -> Result<()> {
    let check_radius = |r: f64| {
        if r.is_finite() && r > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("radius {r} must be positive and finite")))
        }
    };
    let check_exponent = |p: f64| {
        if p.is_finite() && p >= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("exponent {p} must be ≥ 1 for a Lipschitz field")))
        }
    };
    let check_center = |c: &[f64]| {
        if c.len() != n {
            Err(Error::InvalidParameter(format!("center has {} coordinates, expected {n}", c.len())))
        } else if c.iter().any(|v| !v.is_finite()) {
            Err(Error::InvalidParameter("center must be finite".into()))
        } else {
            Ok(())
        }
    };
    match family {
        TrialFamily::RadialBump { center, radius } => {
            check_center(center)?;
            check_radius(*radius)
        }
        TrialFamily::ShiftedBump { center, radius, exponent } => {
            check_center(center)?;
            check_radius(*radius)?;
            check_exponent(*exponent)
        }
        TrialFamily::TensorBump { center, radius, exponent } => {
            if n > 16 {
                return Err(Error::UnsupportedDimension { n, what: "tensor bumps" });
            }
            check_center(center)?;
            check_radius(*radius)?;
            check_exponent(*exponent)
        }
        TrialFamily::BoundaryConcentrated { radius, exponent, height } => {
            check_radius(*radius)?;
            check_exponent(*exponent)?;
            if !(height.is_finite() && *height >= 0.0 && height < radius) {
                return Err(Error::InvalidParameter(format!(
                    "height {height} must lie in [0, radius)"
                )));
            }
            Ok(())
        }
    }
}

/// `max_u |d/du (1 − u²)^p|` over `u ∈ [0, 1]`.
fn profile_lipschitz(p: f64) -> f64 {
    // Maximum sits at u² = 1/(2p − 1); for p = 1 that is u = 1 and the value is 2.
    let u2 = 1.0 / (2.0 * p - 1.0);
    2.0 * p * u2.sqrt() * (1.0 - u2).powf(p - 1.0)
}

fn poly_bump(u2: f64, p: f64) -> f64 {
    if u2 >= 1.0 {
        0.0
    } else if p == 1.0 {
        1.0 - u2
    } else {
        (1.0 - u2).powf(p)
    }
}

/// `d/d(u²) (1 − u²)^p`.
fn poly_bump_slope(u2: f64, p: f64) -> f64 {
    if u2 >= 1.0 {
        0.0
    } else if p == 1.0 {
        -1.0
    } else {
        -p * (1.0 - u2).powf(p - 1.0)
    }
}

#[inline]
fn coord(xp: &[f64], xn: f64, i: usize) -> f64 {
    if i < xp.len() {
        xp[i]
    } else {
        xn
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn dist2(center: &[f64], xp: &[f64], xn: f64) -> f64 {
    let (cn, cp) = center.split_last().expect("center is nonempty");
    cp.iter().zip(xp).map(|(c, x)| (x - c) * (x - c)).sum::<f64>() + (xn - cn) * (xn - cn)
}

fn dist(center: &[f64], xp: &[f64], xn: f64) -> f64 {
    dist2(center, xp, xn).sqrt()
}

/// A battery of `count` vertex-anchored fields, cycling through radii, exponents
/// and heights. Every member has `f(0) = 1`.
pub fn boundary_battery(n: usize, count: usize) -> Result<Vec<TrialFunction>> {
    const RADII: [f64; 4] = [1.0, 0.5, 2.0, 1.5];
    const EXPONENTS: [f64; 5] = [2.0, 1.0, 3.0, 1.5, 4.0];
    const HEIGHT_FRACTIONS: [f64; 3] = [0.0, 0.35, 0.7];
    (0..count)
        .map(|k| {
            let radius = RADII[k % RADII.len()];
            let exponent = EXPONENTS[k % EXPONENTS.len()];
            let height = HEIGHT_FRACTIONS[k % HEIGHT_FRACTIONS.len()] * radius;
            TrialFunction::new(n, TrialFamily::BoundaryConcentrated { radius, exponent, height })
        })
        .collect()
}
