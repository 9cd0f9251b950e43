//! Quadrature against closed-form oracles.

use std::f64::consts::{PI, SQRT_2};

use conestab::domain::ConeParams;
use conestab::quadrature::{
    boundary_integral, estimate, integrate_sigma, liminf_quotient, sphere_area, GaussLegendre, QuadratureSpec,
    SphereGrid,
};
use conestab::trial::{TrialFamily, TrialFunction};
use conestab::variation::{dirichlet_energy, log_slope, regularized_boundary_integral};
use conestab::Error;
use proptest::prelude::*;

fn hat(n: usize, center: Vec<f64>) -> TrialFunction {
    TrialFunction::new(n, TrialFamily::RadialBump { center, radius: 1.0 }).unwrap()
}

fn vertex_bump(n: usize) -> TrialFunction {
    TrialFunction::new(n, TrialFamily::BoundaryConcentrated { radius: 1.0, exponent: 2.0, height: 0.0 }).unwrap()
}

#[test]
fn slice_volume_of_a_ball_in_a_flat_cone() {
    // λ = 0: Σ ∩ B_1 is a half-ball.
    let p = ConeParams::new(3, 0.0).unwrap();
    let v = integrate_sigma(&p, |_| 1.0, &QuadratureSpec::new(64, 32, 64, 1.0)).unwrap();
    assert!((v - 2.0 * PI / 3.0).abs() < 1e-4, "{v}");
}

#[test]
fn sector_area_in_two_dimensions() {
    // Σ ∩ B_1 for n = 2 is a sector of opening π − 2 atan λ.
    let lambda: f64 = 0.75;
    let p = ConeParams::new(2, lambda).unwrap();
    let v = integrate_sigma(&p, |_| 1.0, &QuadratureSpec::new(64, 32, 64, 1.0)).unwrap();
    let exact = 0.5 * (PI - 2.0 * lambda.atan());
    assert!((v - exact).abs() < 1e-4, "{v} vs {exact}");
}

#[test]
fn interior_hat_dirichlet_energy() {
    // |∇f| = 1 on the unit ball around (0, 0, 2), which lies inside Σ for λ = 0.5.
    let p = ConeParams::new(3, 0.5).unwrap();
    let f = hat(3, vec![0.0, 0.0, 2.0]);
    let d = dirichlet_energy(&p, &f, &QuadratureSpec::default()).unwrap();
    assert!((d - 4.0 * PI / 3.0).abs() < 1e-4, "{d}");
}

#[test]
fn hat_boundary_integral() {
    let p = ConeParams::new(3, 1.0).unwrap();
    let b = boundary_integral(&p, &hat(3, vec![0.0; 3]), &QuadratureSpec::default()).unwrap();
    assert!((b - PI * SQRT_2 / 3.0).abs() < 1e-6, "{b}");
}

#[test]
fn vertex_bump_trace_in_flat_cone() {
    // ∫_{ℝ²} (1 − r²)⁴/r dx' = 2π ∫_0^1 (1 − r²)⁴ dr = 2π · 128/315.
    let p = ConeParams::new(3, 0.0).unwrap();
    let b = boundary_integral(&p, &vertex_bump(3), &QuadratureSpec::default()).unwrap();
    assert!((b - 256.0 * PI / 315.0).abs() < 1e-10, "{b}");
}

#[test]
fn two_dimensional_trace_diverges_logarithmically() {
    let p = ConeParams::new(2, 1.0).unwrap();
    let f = vertex_bump(2);
    let spec = QuadratureSpec::default();
    assert!(matches!(boundary_integral(&p, &f, &spec), Err(Error::DivergentBoundaryIntegral { .. })));
    let eps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let values: Vec<f64> =
        eps.iter().map(|e| boundary_integral(&p, &f, &spec.with_epsilon_cutoff(*e)).unwrap()).collect();
    // Both half-lines contribute ln(1/ε)·f(0)².
    let slope = log_slope(&eps, &values);
    assert!((slope - 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn two_dimensional_trace_of_field_vanishing_at_vertex_is_finite() {
    let p = ConeParams::new(2, 0.5).unwrap();
    let f = TrialFunction::new(2, TrialFamily::ShiftedBump { center: vec![0.8, 0.6], radius: 0.5, exponent: 2.0 })
        .unwrap();
    let b = boundary_integral(&p, &f, &QuadratureSpec::default()).unwrap();
    assert!(b.is_finite() && b > 0.0);
}

#[test]
fn tiny_cutoff_matches_polar_route() {
    for n in [3, 4] {
        let p = ConeParams::new(n, 0.5).unwrap();
        let f = vertex_bump(n);
        let spec = QuadratureSpec::new(64, 16, 64, 1.0);
        let full = boundary_integral(&p, &f, &spec).unwrap();
        let cut = boundary_integral(&p, &f, &spec.with_epsilon_cutoff(1e-9)).unwrap();
        assert!((full - cut).abs() < 1e-6 * full, "n = {n}: {full} vs {cut}");
    }
}

#[test]
fn refinement_stays_within_error_estimate() {
    let p = ConeParams::new(3, 0.3).unwrap();
    let f = TrialFunction::new(3, TrialFamily::TensorBump { center: vec![0.0, 0.0, 0.5], radius: 0.8, exponent: 2.0 })
        .unwrap();
    let spec = QuadratureSpec::new(32, 16, 32, 1.0);
    let fine = QuadratureSpec::new(64, 32, 64, 1.0);
    let coarse = estimate(&spec, |s| dirichlet_energy(&p, &f, s)).unwrap();
    let refined = dirichlet_energy(&p, &f, &fine).unwrap();
    assert!((refined - coarse.value).abs() <= coarse.error.max(1e-12), "{coarse:?} vs {refined}");
}

#[test]
fn regularized_trace_is_monotone_and_tends_to_half_trace() {
    let p = ConeParams::new(3, 1.0).unwrap();
    let f = vertex_bump(3);
    let spec = QuadratureSpec::default();
    let half = 0.5 * boundary_integral(&p, &f, &spec).unwrap();
    let values: Vec<f64> =
        (0..8).map(|k| regularized_boundary_integral(&p, &f, 0.1f64.powi(k), &spec).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values.iter().all(|v| *v < half));
    assert!((values[7] - half).abs() < 1e-2 * half);
}

#[test]
fn zero_field_integrates_to_zero() {
    let p = ConeParams::new(3, 0.4).unwrap();
    let f = TrialFunction::with_amplitude(3, TrialFamily::RadialBump { center: vec![0.0; 3], radius: 1.0 }, 0.0)
        .unwrap();
    let spec = QuadratureSpec::default();
    assert_eq!(dirichlet_energy(&p, &f, &spec).unwrap(), 0.0);
    assert_eq!(boundary_integral(&p, &f, &spec).unwrap(), 0.0);
}

#[test]
fn liminf_of_smooth_quotients() {
    let e = liminf_quotient(|t| Ok(3.0 * t + t * t), 1, 0.5, 10).unwrap();
    assert!((e.extrapolated - 3.0).abs() < 1e-12);
    assert!(e.converged);
    let e = liminf_quotient(|t| Ok(2.0 * t * t + t.powi(3)), 2, 0.5, 10).unwrap();
    assert!((e.extrapolated - 4.0).abs() < 1e-10);
    // An oscillating sequence never converges and its liminf sits at the bottom.
    let e = liminf_quotient(|t| Ok(if t == 0.0 { 0.0 } else { t * (1.0 + (1.0 / t).sin()) }), 1, 0.5, 12).unwrap();
    assert!(!e.converged);
    assert!(e.liminf_proxy <= e.last_quotient());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_legendre_integrates_monomials(k in 0u32..40, a in -2.0..0.0f64, b in 0.1..2.0f64) {
        let rule = GaussLegendre::new(20);
        let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k + 1) as f64;
        let got = rule.integrate(a, b, |x| x.powi(k as i32));
        prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn sphere_grid_weights_sum_to_area(ambient in 2usize..7) {
        let area = sphere_area(ambient - 1);
        let total: f64 = SphereGrid::new(ambient, 32).iter().map(|(_, w)| w).sum();
        prop_assert!((total - area).abs() <= 1e-12 * area);
    }

    #[test]
    fn trace_scales_quadratically_with_amplitude(c in 0.1..5.0f64) {
        let p = ConeParams::new(3, 0.5).unwrap();
        let spec = QuadratureSpec::new(32, 16, 32, 1.0);
        let f = vertex_bump(3);
        let b1 = boundary_integral(&p, &f, &spec).unwrap();
        let bc = boundary_integral(&p, &f.scaled(c), &spec).unwrap();
        prop_assert!((bc - c * c * b1).abs() <= 1e-12 * bc);
    }
}
