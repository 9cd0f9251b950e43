//! Integration over `Σ ∩ B_R`, over the boundary trace, and dyadic quotients.
//!
//! Volume integrals use the shear `y = x_n − λ|x'|` (unit Jacobian), which maps
//! `Σ ∩ B_R` to `{y > 0, |(x', y + λ|x'|)| < R}`. The `x'` directions are
//! covered in polar form `x' = rθ`; `r` and `y` use composite Gauss–Legendre
//! rules split at the points where the integrand loses smoothness, so no node
//! ever lies on the axis `{x' = 0}`.

mod gauss;
mod liminf;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::domain::{norm, ConeParams, PlanePoint};
use crate::error::{Error, Result};
use crate::trial::{KinkSurface, TrialFamily, TrialFunction};

pub use gauss::GaussLegendre;
pub use liminf::{liminf_quotient, liminf_quotient_with, summarize, LiminfEstimate, QuotientOptions};
pub use sphere::{sphere_area, SphereGrid};

/// Node counts and support radius for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Nodes along each vertical line `{x'} × (0, y_max)`.
    pub box_nodes_per_axis: usize,
    pub support_radius: f64,
    /// Inner cutoff `ε` for the boundary integral; `0` means none.
    pub epsilon_cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial_nodes: 128,
            angular_nodes: 64,
            box_nodes_per_axis: 128,
            support_radius: 1.0,
            epsilon_cutoff: 0.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(radial_nodes: usize, angular_nodes: usize, box_nodes_per_axis: usize, support_radius: f64) -> Self {
        Self { radial_nodes, angular_nodes, box_nodes_per_axis, support_radius, epsilon_cutoff: 0.0 }
    }

    pub fn with_support_radius(mut self, r: f64) -> Self {
        self.support_radius = r;
        self
    }

    pub fn with_epsilon_cutoff(mut self, eps: f64) -> Self {
        self.epsilon_cutoff = eps;
        self
    }

    /// The same settings with every node count halved (never below 2).
    pub fn coarsened(&self) -> Self {
        Self {
            radial_nodes: (self.radial_nodes / 2).max(2),
            angular_nodes: (self.angular_nodes / 2).max(2),
            box_nodes_per_axis: (self.box_nodes_per_axis / 2).max(2),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, count) in [
            ("radial_nodes", self.radial_nodes),
            ("angular_nodes", self.angular_nodes),
            ("box_nodes_per_axis", self.box_nodes_per_axis),
        ] {
            if count < 2 {
                return Err(Error::InvalidParameter(format!("{name} = {count} must be at least 2")));
            }
        }
        if !(self.support_radius.is_finite() && self.support_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "support_radius = {} must be positive",
                self.support_radius
            )));
        }
        if !(self.epsilon_cutoff.is_finite() && self.epsilon_cutoff >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon_cutoff = {} must be nonnegative",
                self.epsilon_cutoff
            )));
        }
        Ok(())
    }
}

/// A value with the change observed when all node counts are halved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
}

/// Runs `run` at `spec` and at `spec.coarsened()`.
pub fn estimate(spec: &QuadratureSpec, mut run: impl FnMut(&QuadratureSpec) -> Result<f64>) -> Result<QuadratureEstimate> {
    let value = run(spec)?;
    let coarse = run(&spec.coarsened())?;
    Ok(QuadratureEstimate { value, error: (value - coarse).abs() })
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Where the integrand is non-smooth, and optionally a ball outside of which it vanishes.
#[derive(Debug, Clone, Default)]
pub struct PanelHints {
    surfaces: Vec<KinkSurface>,
    clip: Option<(Vec<f64>, f64)>,
}

impl PanelHints {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_surfaces(surfaces: Vec<KinkSurface>) -> Self {
        Self { surfaces, clip: None }
    }

    /// Panel surfaces of `f`, clipped to a ball around its support.
    pub fn for_trial(f: &TrialFunction) -> Self {
        let n = f.n();
        let clip = match f.family() {
            TrialFamily::RadialBump { center, radius } | TrialFamily::ShiftedBump { center, radius, .. } => {
                Some((center.clone(), *radius))
            }
            TrialFamily::TensorBump { center, radius, .. } => Some((center.clone(), radius * (n as f64).sqrt())),
            TrialFamily::BoundaryConcentrated { radius, height, .. } => {
                let mut c = vec![0.0; n];
                c[n - 1] = *height;
                Some((c, *radius))
            }
        };
        Self { surfaces: f.panel_surfaces(), clip: if f.is_zero() { None } else { clip } }
    }

    /// Radii `r = |x'|` at which the integrand of the `x'` variables can kink,
    /// including the radii where a surface meets the cone `x_n = λr`.
    fn radial_breaks(&self, n: usize, lambda: f64, out: &mut Vec<f64>) {
        for s in &self.surfaces {
            match s {
                KinkSurface::Sphere { center, radius } => {
                    let (cp, cn) = split(center);
                    let a = norm(cp);
                    out.push(a + radius);
                    if a > radius * 1e-12 {
                        out.push(a - radius);
                    } else {
                        cone_sphere_roots(lambda, cn, *radius, out);
                    }
                }
                KinkSurface::Point { center } => out.push(norm(split(center).0)),
                KinkSurface::Plane { axis, offset } => {
                    if *axis == n - 1 {
                        if lambda > 0.0 {
                            out.push(offset / lambda);
                        }
                    } else {
                        out.push(offset.abs());
                    }
                }
            }
        }
    }

    /// Heights `x_n` where the vertical line through `x'` crosses a surface.
    fn vertical_breaks(&self, xp: &[f64], out: &mut Vec<f64>) {
        let n = xp.len() + 1;
        for s in &self.surfaces {
            match s {
                KinkSurface::Sphere { center, radius } => {
                    let d2 = dist2(&center[..n - 1], xp);
                    let h2 = radius * radius - d2;
                    if h2 > 0.0 {
                        let h = h2.sqrt();
                        out.push(center[n - 1] - h);
                        out.push(center[n - 1] + h);
                    }
                }
                KinkSurface::Point { center } => out.push(center[n - 1]),
                KinkSurface::Plane { axis, offset } => {
                    if *axis == n - 1 {
                        out.push(*offset);
                    }
                }
            }
        }
    }
}

fn split(c: &[f64]) -> (&[f64], f64) {
    let (last, head) = c.split_last().expect("nonempty center");
    (head, *last)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Positive roots of `(1+λ²)r² − 2λc r + c² − ρ² = 0`: where the sphere about
/// `(0, c)` of radius `ρ` meets the cone `x_n = λr`.
fn cone_sphere_roots(lambda: f64, c: f64, rho: f64, out: &mut Vec<f64>) {
    let a = 1.0 + lambda * lambda;
    let disc = lambda * lambda * c * c - a * (c * c - rho * rho);
    if disc < 0.0 {
        return;
    }
    let s = disc.sqrt();
    for r in [(lambda * c - s) / a, (lambda * c + s) / a] {
        if r > 0.0 {
            out.push(r);
        }
    }
}

/// Composite panels on `[a, b]` split at `breaks`, with about `total` nodes overall.
fn panels(a: f64, b: f64, breaks: &mut Vec<f64>, total: usize) -> Vec<(f64, f64, usize)> {
    let len = b - a;
    if !(len > 0.0) {
        return Vec::new();
    }
    let tiny = 1e-13 * (a.abs() + b.abs() + len);
    breaks.retain(|x| x.is_finite() && *x > a + tiny && *x < b - tiny);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= tiny);
    let min_nodes = (total / 8).clamp(2, 8);
    let mut out = Vec::with_capacity(breaks.len() + 1);
    let mut lo = a;
    for &hi in breaks.iter().chain(std::iter::once(&b)) {
        let count = ((total as f64) * (hi - lo) / len).round() as usize;
        out.push((lo, hi, count.max(min_nodes)));
        lo = hi;
    }
    out
}

/// Largest `r` with a point of `Σ ∩ B_R` above it.
fn radial_extent(lambda: f64, support_radius: f64) -> f64 {
    support_radius / (1.0 + lambda * lambda).sqrt()
}

/// Which coordinate the integrand receives as its last argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Vertical {
    /// `x_n`, i.e. the integral over `Σ`.
    Slice,
    /// `y = x_n − λ|x'|`, i.e. the integral over the half-space image.
    Sheared,
}

fn integrate_region(
    params: &ConeParams,
    spec: &QuadratureSpec,
    hints: &PanelHints,
    vertical: Vertical,
    mut integrand: impl FnMut(&[f64], f64) -> Result<f64>,
) -> Result<f64> {
    spec.validate()?;
    let n = params.n();
    let lambda = params.lambda();
    let big_r = spec.support_radius;
    let mut r_lo = 0.0;
    let mut r_hi = radial_extent(lambda, big_r);
    if let Some((c, rho)) = &hints.clip {
        let a = norm(&c[..n - 1]);
        r_lo = (a - rho).max(0.0);
        r_hi = r_hi.min(a + rho);
    }
    let mut breaks = Vec::new();
    hints.radial_breaks(n, lambda, &mut breaks);
    let radial = panels(r_lo, r_hi, &mut breaks, spec.radial_nodes);
    let sphere = SphereGrid::new(n - 1, spec.angular_nodes);

    let mut total = CompensatedSum::default();
    let mut xp = vec![0.0; n - 1];
    let mut vbreaks = Vec::new();
    for &(a, b, count) in &radial {
        let rule = GaussLegendre::cached(count);
        for (r, wr) in rule.mapped(a, b) {
            let radial_weight = wr * r.powi(n as i32 - 2);
            let shift = lambda * r;
            let y_top = (big_r * big_r - r * r).max(0.0).sqrt() - shift;
            for (theta, wt) in sphere.iter() {
                for (x, d) in xp.iter_mut().zip(theta) {
                    *x = r * d;
                }
                let (mut y_lo, mut y_hi) = (0.0f64, y_top);
                if let Some((c, rho)) = &hints.clip {
                    let h2 = rho * rho - dist2(&c[..n - 1], &xp);
                    if h2 <= 0.0 {
                        continue;
                    }
                    let h = h2.sqrt();
                    y_lo = y_lo.max(c[n - 1] - h - shift);
                    y_hi = y_hi.min(c[n - 1] + h - shift);
                }
                if y_hi <= y_lo {
                    continue;
                }
                vbreaks.clear();
                hints.vertical_breaks(&xp, &mut vbreaks);
                vbreaks.iter_mut().for_each(|v| *v -= shift);
                let mut line = CompensatedSum::default();
                for (ya, yb, ycount) in panels(y_lo, y_hi, &mut vbreaks, spec.box_nodes_per_axis) {
                    let yrule = GaussLegendre::cached(ycount);
                    for (y, wy) in yrule.mapped(ya, yb) {
                        let last = match vertical {
                            Vertical::Slice => y + shift,
                            Vertical::Sheared => y,
                        };
                        let v = integrand(&xp, last)?;
                        if !v.is_finite() {
                            return Err(Error::NonFinite("integrand"));
                        }
                        line.add(wy * v);
                    }
                }
                total.add(radial_weight * wt * line.value());
            }
        }
    }
    Ok(total.value())
}

/// `∫_{Σ ∩ B_R} F(x) dx` with `R = spec.support_radius`.
pub fn integrate_sigma(
    params: &ConeParams,
    integrand: impl Fn(&PlanePoint) -> f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut point = PlanePoint::origin(params.n());
    integrate_region(params, spec, &PanelHints::none(), Vertical::Slice, |xp, xn| {
        point.x_prime.copy_from_slice(xp);
        point.x_n = xn;
        Ok(integrand(&point))
    })
}

/// `∫_{Σ ∩ B_R} F(x', x_n) dx` with panel hints; `F` may fail.
pub fn integrate_sigma_hinted(
    params: &ConeParams,
    spec: &QuadratureSpec,
    hints: &PanelHints,
    integrand: impl FnMut(&[f64], f64) -> Result<f64>,
) -> Result<f64> {
    integrate_region(params, spec, hints, Vertical::Slice, integrand)
}

/// `∫ G(x', y) dx' dy` over the shear image `{y > 0} ∩ T⁻¹(B_R)` of `Σ ∩ B_R`.
///
/// `hints` describe `G ∘ T⁻¹`, i.e. they are given in the unsheared coordinates.
pub fn integrate_halfspace_hinted(
    params: &ConeParams,
    spec: &QuadratureSpec,
    hints: &PanelHints,
    integrand: impl FnMut(&[f64], f64) -> Result<f64>,
) -> Result<f64> {
    integrate_region(params, spec, hints, Vertical::Sheared, integrand)
}

/// `∫_{|x'| > r_lo} K(|x'|, f(x', λ|x'|)²) dx'` over the trace of `f`.
///
/// With `r_lo > 0` the radius is integrated in `u = ln r`, which keeps the
/// `1/|x'|`-type kernels well resolved down to the cutoff.
pub fn trace_integral(
    params: &ConeParams,
    f: &TrialFunction,
    spec: &QuadratureSpec,
    r_lo: f64,
    kernel: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    spec.validate()?;
    let n = params.n();
    let lambda = params.lambda();
    let r_hi = radial_extent(lambda, f.support_radius());
    if f.is_zero() || r_lo >= r_hi {
        return Ok(0.0);
    }
    let mut breaks = Vec::new();
    PanelHints::for_trial(f).radial_breaks(n, lambda, &mut breaks);
    let sphere = SphereGrid::new(n - 1, spec.angular_nodes);
    let log = r_lo > 0.0;
    let (a, b) = if log { (r_lo.ln(), r_hi.ln()) } else { (0.0, r_hi) };
    if log {
        breaks.retain(|r| *r > 0.0);
        breaks.iter_mut().for_each(|r| *r = r.ln());
    }
    let mut total = CompensatedSum::default();
    let mut xp = vec![0.0; n - 1];
    for (pa, pb, count) in panels(a, b, &mut breaks, spec.radial_nodes) {
        let rule = GaussLegendre::cached(count);
        for (u, wu) in rule.mapped(pa, pb) {
            let (r, jac) = if log { (u.exp(), u.exp()) } else { (u, 1.0) };
            let mut shell = CompensatedSum::default();
            for (theta, wt) in sphere.iter() {
                for (x, d) in xp.iter_mut().zip(theta) {
                    *x = r * d;
                }
                let g = f.value_at(&xp, lambda * r).powi(2);
                let v = kernel(r, g);
                if !v.is_finite() {
                    return Err(Error::NonFinite("trace integrand"));
                }
                shell.add(wt * v);
            }
            total.add(wu * jac * r.powi(n as i32 - 2) * shell.value());
        }
    }
    Ok(total.value())
}

/// `∫_{ℝ^{n−1}} f(x', λ|x'|)² / |x'| dx'`, restricted to `|x'| > ε` when
/// `spec.epsilon_cutoff = ε > 0`.
///
/// For `n = 2` the integral diverges logarithmically unless `f(0) = 0`; without
/// a cutoff that case is reported as [`Error::DivergentBoundaryIntegral`].
pub fn boundary_integral(params: &ConeParams, f: &TrialFunction, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if f.n() != params.n() {
        return Err(Error::InvalidParameter(format!(
            "trial function has n = {} but the cone has n = {}",
            f.n(),
            params.n()
        )));
    }
    let eps = spec.epsilon_cutoff;
    if params.n() == 2 && eps == 0.0 && f.value_at_vertex() != 0.0 {
        return Err(Error::DivergentBoundaryIntegral { vertex_value: f.value_at_vertex() });
    }
    trace_integral(params, f, spec, eps, |r, g| if g == 0.0 { 0.0 } else { g / r })
}
