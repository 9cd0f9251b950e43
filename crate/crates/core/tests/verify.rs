//! The randomized invariant suites, including a negative control.

use conestab::quadrature::QuadratureSpec;
use conestab::verify::{
    foliation_suite, jacobian_flow_suite, jacobian_identity_suite, run_all, VerifyConfig, SUITE_VERSIONS,
};

fn quick() -> VerifyConfig {
    VerifyConfig {
        samples: 500,
        point_samples: 60,
        quadrature: QuadratureSpec::new(24, 8, 24, 1.0),
        ..VerifyConfig::default()
    }
}

#[test]
fn all_suites_pass_in_suite_order() {
    let results = run_all(&quick()).unwrap();
    let names: Vec<&str> = results.iter().map(|r| r.name.as_str()).collect();
    let expected: Vec<&str> = SUITE_VERSIONS.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, expected);
    for r in &results {
        assert!(r.passed, "{r:?}");
        assert_eq!(r.violations, 0);
        assert!(r.samples > 0);
    }
}

#[test]
fn dropped_cross_term_is_detected() {
    let c = VerifyConfig { corrupt_closed_form: true, ..quick() };
    let identity = jacobian_identity_suite(&c).unwrap();
    assert!(!identity.passed);
    assert!(identity.violations > identity.samples / 2);
    assert!(!jacobian_flow_suite(&c).unwrap().passed);
}

#[test]
fn seed_changes_samples_but_not_verdicts() {
    let a = jacobian_identity_suite(&quick()).unwrap();
    let b = jacobian_identity_suite(&VerifyConfig { seed: 7, ..quick() }).unwrap();
    assert!(a.passed && b.passed);
    assert_ne!(a.worst_error, b.worst_error);
    assert_eq!(a, jacobian_identity_suite(&quick()).unwrap());
    assert_eq!(foliation_suite(&quick()).unwrap(), foliation_suite(&quick()).unwrap());
}

#[test]
fn zero_samples_are_rejected() {
    assert!(run_all(&VerifyConfig { samples: 0, ..quick() }).is_err());
    assert!(run_all(&VerifyConfig { point_samples: 0, ..quick() }).is_err());
}
