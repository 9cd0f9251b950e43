//! Product grids on the unit sphere `S^{m}` ⊂ `ℝ^{m+1}`.
//!
//! `m = 0` is the two-point set `{±1}`, `m = 1` a uniform circle, and `m ≥ 2`
//! uses hyperspherical angles: Gauss–Legendre in each polar angle (weighted by
//! the matching power of `sin`) and a uniform grid in the azimuth.

use super::gauss::GaussLegendre;

#[derive(Debug, Clone)]
pub struct SphereGrid {
    dim: usize,
    directions: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereGrid {
    /// Grid on `S^{ambient − 1}` with `azimuth_nodes` azimuthal points and
    /// `max(2, azimuth_nodes / 2)` points per polar angle.
    pub fn new(ambient: usize, azimuth_nodes: usize) -> Self {
        assert!(ambient >= 1);
        let m = ambient - 1;
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        match m {
            0 => {
                directions.extend([1.0, -1.0]);
                weights.extend([1.0, 1.0]);
            }
            _ => {
                let polar_nodes = (azimuth_nodes / 2).max(2);
                let rule = GaussLegendre::cached(polar_nodes);
                let by_angle: Vec<(f64, f64)> = rule.mapped(0.0, std::f64::consts::PI).collect();
                // For odd powers of sin, u = cos φ turns the weight into a polynomial.
                let by_cosine: Vec<(f64, f64)> = rule
                    .mapped(-1.0, 1.0)
                    .map(|(u, w)| (u.acos(), w / (1.0 - u * u).sqrt()))
                    .collect();
                let dphi = std::f64::consts::TAU / azimuth_nodes as f64;
                let azimuth: Vec<f64> = (0..azimuth_nodes).map(|k| (k as f64 + 0.5) * dphi).collect();
                let mut index = vec![0usize; m - 1];
                loop {
                    // Polar prefix: θ_j = (∏_{k<j} sin φ_k) cos φ_j.
                    let mut prefix = Vec::with_capacity(ambient);
                    let mut sin_prod = 1.0;
                    let mut w = dphi;
                    for (j, &ix) in index.iter().enumerate() {
                        let power = m - 1 - j;
                        let (phi, wphi) = if power % 2 == 1 { by_cosine[ix] } else { by_angle[ix] };
                        prefix.push(sin_prod * phi.cos());
                        w *= wphi * phi.sin().powi(power as i32);
                        sin_prod *= phi.sin();
                    }
                    for &az in &azimuth {
                        directions.extend_from_slice(&prefix);
                        directions.push(sin_prod * az.cos());
                        directions.push(sin_prod * az.sin());
                        weights.push(w);
                    }
                    if !advance(&mut index, polar_nodes) {
                        break;
                    }
                }
            }
        }
        Self { dim: ambient, directions, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.directions.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }
}

fn advance(index: &mut [usize], base: usize) -> bool {
    for slot in index.iter_mut().rev() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

/// `|S^{m}| = 2π^{(m+1)/2} / Γ((m+1)/2)`, for tests and sanity checks.
pub fn sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => sphere_area(m - 2) * 2.0 * PI / (m - 1) as f64,
    }
}
