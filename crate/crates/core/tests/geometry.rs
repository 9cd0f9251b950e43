//! Property tests for the cone geometry, the flow and the Jacobian expansions.

use conestab::domain::{gamma_curve, omega_profile, ConeParams, Membership, PlanePoint};
use conestab::flow::{flow_coefficients, flow_map, partials_from_coefficients, FlowCoefficients};
use conestab::jacobian::{
    jacobian_breakdown, jacobian_closed_form, jacobian_excess, jacobian_gram_oracle, linear_part, remainder,
    wedge_norm_squared,
};
use conestab::trial::{TrialFamily, TrialFunction};
use conestab::Error;
use proptest::prelude::*;

fn coeffs(n: usize) -> impl Strategy<Value = FlowCoefficients> {
    (prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
        .prop_map(|(alpha, beta)| FlowCoefficients { alpha, beta })
}

fn any_coeffs() -> impl Strategy<Value = FlowCoefficients> {
    prop::sample::select(vec![2usize, 3, 4, 6]).prop_flat_map(coeffs)
}

/// A point of the closed slice `x_n ≥ λ|x'|`, with `lift ≥ 0` above the boundary.
fn slice_point(lambda: f64, xp: Vec<f64>, lift: f64) -> PlanePoint {
    let r = xp.iter().map(|a| a * a).sum::<f64>().sqrt();
    PlanePoint::new(xp, lambda * r + lift)
}

fn hadamard(c: &FlowCoefficients) -> f64 {
    partials_from_coefficients(c).iter().map(|v| v.iter().map(|a| a * a).sum::<f64>()).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn three_jacobian_routes_agree(c in any_coeffs()) {
        let scale = hadamard(&c);
        let closed = jacobian_closed_form(&c);
        let wedge = wedge_norm_squared(&c);
        let gram = jacobian_gram_oracle(&partials_from_coefficients(&c)).unwrap();
        prop_assert!((closed - wedge).abs() <= 1e-12 * scale);
        prop_assert!((closed - gram).abs() <= 1e-12 * scale);
    }

    #[test]
    fn excess_matches_closed_form(c in any_coeffs()) {
        let scale = hadamard(&c);
        prop_assert!((jacobian_excess(&c) - (jacobian_closed_form(&c) - 1.0)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn closed_form_minus_remainder_is_linear_part(c in any_coeffs()) {
        let scale = hadamard(&c);
        let lhs = jacobian_closed_form(&c) - remainder(&c);
        prop_assert!((lhs - linear_part(&c)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn gram_determinant_is_nonnegative(c in any_coeffs()) {
        prop_assert!(jacobian_closed_form(&c) >= -1e-12 * hadamard(&c));
    }

    #[test]
    fn omega_is_one_homogeneous(
        lambda in 0.0..3.0f64,
        xp in prop::collection::vec(-2.0..2.0f64, 3),
        t in -2.0..2.0f64,
        s in 0.01..10.0f64,
    ) {
        let p = ConeParams::new(4, lambda).unwrap();
        let scaled: Vec<f64> = xp.iter().map(|a| s * a).collect();
        let lhs = omega_profile(&p, &scaled, s * t);
        let rhs = s * omega_profile(&p, &xp, t);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn gamma_keeps_boundary_on_boundary(
        lambda in 0.0..3.0f64,
        xp in prop::collection::vec(-2.0..2.0f64, 2),
        t in -5.0..5.0f64,
    ) {
        let p = ConeParams::new(3, lambda).unwrap();
        let x = slice_point(lambda, xp, 0.0);
        let g = gamma_curve(&p, &x, t).unwrap();
        prop_assert_eq!(p.classify_ambient(&g), Membership::Boundary);
        prop_assert_eq!(g.t, t);
        prop_assert_eq!(gamma_curve(&p, &x, 0.0).unwrap().x_n, x.x_n);
    }

    #[test]
    fn gamma_keeps_interior_inside(
        lambda in 0.0..3.0f64,
        xp in prop::collection::vec(-2.0..2.0f64, 2),
        lift in 0.01..2.0f64,
        t in -5.0..5.0f64,
    ) {
        let p = ConeParams::new(3, lambda).unwrap();
        let g = gamma_curve(&p, &slice_point(lambda, xp, lift), t).unwrap();
        prop_assert_eq!(p.classify_ambient(&g), Membership::Interior);
    }

    #[test]
    fn gamma_is_lipschitz(
        lambda in 0.0..3.0f64,
        a in prop::collection::vec(-2.0..2.0f64, 2),
        b in prop::collection::vec(-2.0..2.0f64, 2),
        la in 0.0..2.0f64,
        lb in 0.0..2.0f64,
        t in -3.0..3.0f64,
        u in -3.0..3.0f64,
    ) {
        let p = ConeParams::new(3, lambda).unwrap();
        let (x, y) = (slice_point(lambda, a, la), slice_point(lambda, b, lb));
        let d1: f64 = x.x_prime.iter().zip(&y.x_prime).map(|(s, r)| (s - r).abs()).sum::<f64>()
            + (x.x_n - y.x_n).abs()
            + (t - u).abs();
        let gap = gamma_curve(&p, &x, t).unwrap().distance(&gamma_curve(&p, &y, u).unwrap());
        prop_assert!(gap <= p.foliation_lipschitz_bound() * d1 * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn curves_at_equal_height_are_disjoint(
        lambda in 0.0..3.0f64,
        a in prop::collection::vec(-2.0..2.0f64, 2),
        b in prop::collection::vec(-2.0..2.0f64, 2),
        la in 0.0..2.0f64,
        lb in 0.0..2.0f64,
        t in -3.0..3.0f64,
    ) {
        let p = ConeParams::new(3, lambda).unwrap();
        let (x, y) = (slice_point(lambda, a, la), slice_point(lambda, b, lb));
        prop_assume!(x != y);
        prop_assert_ne!(gamma_curve(&p, &x, t).unwrap(), gamma_curve(&p, &y, t).unwrap());
    }

    #[test]
    fn flow_breakdown_is_consistent(
        lambda in 0.0..2.0f64,
        xp in prop::collection::vec(-0.5..0.5f64, 2),
        lift in 0.1..1.0f64,
        t in -1.0..1.0f64,
        amp in 0.2..2.0f64,
    ) {
        let p = ConeParams::new(3, lambda).unwrap();
        let x = slice_point(lambda, xp, lift);
        prop_assume!(x.x_prime_norm() > 1e-3);
        let f = TrialFunction::with_amplitude(
            3,
            TrialFamily::ShiftedBump { center: vec![0.0, 0.0, 0.6], radius: 2.0, exponent: 3.0 },
            amp,
        ).unwrap();
        let b = jacobian_breakdown(&p, &f, &x, t).unwrap();
        let scale = 1.0 + b.j_squared.abs();
        prop_assert!((b.j_squared - b.gram_value).abs() <= 1e-11 * scale);
        prop_assert!((b.j_squared - b.wedge_norm_squared).abs() <= 1e-11 * scale);
        prop_assert!((b.main_term + b.remainder - b.j_squared).abs() <= 1e-11 * scale);
    }
}

#[test]
fn zero_field_has_unit_jacobian() {
    let p = ConeParams::new(3, 0.7).unwrap();
    let f = TrialFunction::with_amplitude(
        3,
        TrialFamily::ShiftedBump { center: vec![0.0, 0.0, 1.0], radius: 1.0, exponent: 2.0 },
        0.0,
    )
    .unwrap();
    let x = PlanePoint::new(vec![0.3, 0.1], 1.0);
    let b = jacobian_breakdown(&p, &f, &x, 0.5).unwrap();
    assert_eq!(b.j_squared, 1.0);
    assert_eq!(b.remainder, 0.0);
    assert_eq!(flow_map(&p, &f, &x, 0.5).unwrap().t, 0.0);
}

#[test]
fn flow_rejects_axis_and_exterior_points() {
    let p = ConeParams::new(3, 0.5).unwrap();
    let f = TrialFunction::new(3, TrialFamily::ShiftedBump { center: vec![0.0, 0.0, 1.0], radius: 1.0, exponent: 2.0 })
        .unwrap();
    assert_eq!(flow_coefficients(&p, &f, &PlanePoint::new(vec![0.0, 0.0], 0.5), 0.1), Err(Error::NonSmoothPoint));
    assert!(matches!(
        flow_coefficients(&p, &f, &PlanePoint::new(vec![1.0, 0.0], 0.1), 0.1),
        Err(Error::OutsideSlice { .. })
    ));
}

#[test]
fn flow_is_the_foliation_at_height_tf() {
    let p = ConeParams::new(3, 0.5).unwrap();
    let f = TrialFunction::new(3, TrialFamily::ShiftedBump { center: vec![0.0, 0.0, 1.0], radius: 1.0, exponent: 2.0 })
        .unwrap();
    let x = PlanePoint::new(vec![0.2, 0.1], 0.9);
    let t = 0.3;
    let phi = flow_map(&p, &f, &x, t).unwrap();
    assert_eq!(phi, gamma_curve(&p, &x, t * f.value(&x)).unwrap());
}
