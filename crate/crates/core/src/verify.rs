//! Seeded invariant suites: Jacobian identities, foliation properties, finite
//! difference checks of the flow and of trial gradients, remainder bounds,
//! thresholds and Kato margins.
//!
//! Every suite draws from its own ChaCha stream derived from the configured seed,
//! so results do not depend on which other suites run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{gamma_curve, ConeParams, Membership, PlanePoint};
use crate::error::{Error, Result};
use crate::flow::{coefficients_into, flow_coefficients, flow_map, partials_from_coefficients, FlowCoefficients};
use crate::jacobian::{
    jacobian_closed_form, jacobian_gram_oracle, linear_part, main_term, remainder, remainder_bound,
    wedge_norm_squared,
};
use crate::quadrature::QuadratureSpec;
use crate::stability::{kato_constant, kato_margin, lambda_star, shear_transform_check, MARGIN_SLACK};
use crate::trial::{boundary_battery, TrialFamily, TrialFunction};

/// Version tag per suite, reported alongside results.
pub const SUITE_VERSIONS: [(&str, &str); 8] = [
    ("jacobian_identity", "1"),
    ("jacobian_flow", "1"),
    ("foliation", "1"),
    ("flow_partials", "1"),
    ("trial_gradients", "1"),
    ("remainder_bound", "1"),
    ("thresholds", "1"),
    ("kato_margins", "1"),
];

/// Dimensions exercised by the Jacobian suites.
pub const JACOBIAN_DIMENSIONS: [usize; 4] = [2, 3, 4, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random coefficient draws per dimension for the algebraic Jacobian suite.
    pub samples: usize,
    /// Sampled points (or point pairs) for the geometric suites.
    pub point_samples: usize,
    pub lambda: f64,
    /// Test hook: evaluate the closed form without its cross term.
    pub corrupt_closed_form: bool,
    pub quadrature: QuadratureSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed_c0de,
            samples: 10_000,
            point_samples: 1_000,
            lambda: 0.5,
            corrupt_closed_form: false,
            quadrature: QuadratureSpec::new(48, 24, 48, 1.0),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.point_samples == 0 {
            return Err(Error::InvalidParameter("sample counts must be positive".into()));
        }
        ConeParams::new(3, self.lambda)?;
        self.quadrature.validate()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub worst_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub violations: usize,
}

impl SuiteResult {
    fn from_errors(name: &str, tolerance: f64, errors: &[f64]) -> Self {
        let worst_error = errors.iter().copied().fold(0.0, f64::max);
        let violations = errors.iter().filter(|e| !(**e <= tolerance)).count();
        Self { name: name.into(), passed: violations == 0, worst_error, tolerance, samples: errors.len(), violations }
    }
}

/// Runs every suite in [`SUITE_VERSIONS`] order.
pub fn run_all(config: &VerifyConfig) -> Result<Vec<SuiteResult>> {
    config.validate()?;
    Ok(vec![
        jacobian_identity_suite(config)?,
        jacobian_flow_suite(config)?,
        foliation_suite(config)?,
        flow_partials_suite(config)?,
        trial_gradient_suite(config)?,
        remainder_bound_suite(config)?,
        threshold_suite(config)?,
        kato_margin_suite(config)?,
    ])
}

fn closed_form(c: &FlowCoefficients, corrupt: bool) -> f64 {
    if corrupt {
        let (an, bn) = (c.alpha_n(), c.beta_n());
        let sb2: f64 = c.beta_tangential().iter().map(|b| b * b).sum();
        let sa2: f64 = c.alpha_tangential().iter().map(|a| a * a).sum();
        (1.0 + an).powi(2) * (1.0 + sb2) + bn * bn * (1.0 + sa2)
    } else {
        jacobian_closed_form(c)
    }
}

/// `|a − b|` relative to the Hadamard bound `∏|vᵢ|²`, which dominates every
/// quantity compared here and sets the scale of rounding in the Gram route.
fn hadamard_scale(partials: &[Vec<f64>]) -> f64 {
    partials.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).product()
}

fn jacobian_errors(c: &FlowCoefficients, corrupt: bool, extra: Option<f64>) -> Result<f64> {
    let partials = partials_from_coefficients(c);
    let scale = hadamard_scale(&partials);
    let closed = closed_form(c, corrupt);
    let gram = jacobian_gram_oracle(&partials)?;
    let wedge = wedge_norm_squared(c);
    let split = extra.unwrap_or_else(|| linear_part(c)) + remainder(c);
    let worst = [(closed - gram).abs(), (closed - wedge).abs(), (wedge - gram).abs(), (split - closed).abs()]
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

pub const JACOBIAN_TOL: f64 = 1e-10;

/// Random `(α, β) ∈ [−1, 1]^{2n}`: closed form, wedge norm, Gram determinant and
/// linear part plus remainder agree.
pub fn jacobian_identity_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(1);
    let mut errors = Vec::with_capacity(config.samples * JACOBIAN_DIMENSIONS.len());
    for n in JACOBIAN_DIMENSIONS {
        for _ in 0..config.samples {
            let c = FlowCoefficients {
                alpha: (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
                beta: (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            };
            errors.push(jacobian_errors(&c, config.corrupt_closed_form, None)?);
        }
    }
    Ok(SuiteResult::from_errors("jacobian_identity", JACOBIAN_TOL, &errors))
}

/// A random smooth-ish field in dimension `n` (exponent ≥ 2, so no kinks).
pub fn random_trial(rng: &mut impl Rng, n: usize, lambda: f64) -> Result<TrialFunction> {
    let radius = rng.gen_range(0.5..1.5);
    let exponent = [2.0, 2.5, 3.0][rng.gen_range(0..3)];
    let mut center = vec![0.0; n];
    for c in center.iter_mut().take(n - 1) {
        *c = rng.gen_range(-0.5..0.5);
    }
    center[n - 1] = rng.gen_range(0.0..1.5) + lambda * crate::domain::norm(&center[..n - 1]);
    let family = match rng.gen_range(0..3) {
        0 => TrialFamily::ShiftedBump { center, radius, exponent },
        1 => TrialFamily::TensorBump { center, radius, exponent },
        _ => TrialFamily::BoundaryConcentrated { radius, exponent, height: rng.gen_range(0.0..0.7) * radius },
    };
    let amplitude = rng.gen_range(0.2..2.0);
    TrialFunction::with_amplitude(n, family, amplitude)
}

/// A point of `Σ` at distance at least `margin` from `∂Σ` and from the axis,
/// drawn from the box `[−2, 2]^{n−1} × [0, 3]`.
fn random_slice_point(rng: &mut impl Rng, params: &ConeParams, margin: f64) -> PlanePoint {
    let n = params.n();
    let slope = (1.0 + params.lambda().powi(2)).sqrt();
    loop {
        let xp: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let xn = rng.gen_range(0.0..3.0);
        let r = crate::domain::norm(&xp);
        if r > margin && (xn - params.lambda() * r) / slope > margin {
            return PlanePoint::new(xp, xn);
        }
    }
}

/// A point near the support of `f` where `f ≠ 0`, if one is found quickly.
fn random_support_point(rng: &mut impl Rng, params: &ConeParams, f: &TrialFunction, margin: f64) -> Option<PlanePoint> {
    for _ in 0..10_000 {
        let x = random_slice_point(rng, params, margin);
        if f.value(&x).abs() > 1e-3 * f.amplitude().abs() {
            return Some(x);
        }
    }
    None
}

/// Genuine flow samples: the three Jacobian routes agree and
/// `main_term + remainder` reproduces the closed form.
pub fn jacobian_flow_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(2);
    let per_dim = config.point_samples.div_ceil(JACOBIAN_DIMENSIONS.len());
    let mut errors = Vec::with_capacity(config.point_samples);
    for n in JACOBIAN_DIMENSIONS {
        let params = ConeParams::new(n, config.lambda)?;
        let target = errors.len() + per_dim;
        while errors.len() < target {
            let f = random_trial(&mut rng, n, config.lambda)?;
            let Some(x) = random_support_point(&mut rng, &params, &f, 1e-6) else { continue };
            let t = rng.gen_range(-1.0..1.0);
            let c = flow_coefficients(&params, &f, &x, t)?;
            let mt = main_term(config.lambda, t, f.value(&x), &f.gradient(&x), x.x_prime_norm());
            errors.push(jacobian_errors(&c, config.corrupt_closed_form, Some(mt))?);
        }
    }
    Ok(SuiteResult::from_errors("jacobian_flow", JACOBIAN_TOL, &errors))
}

/// Injectivity at equal heights, boundary invariance and the Lipschitz bound
/// `|Γ_x(t) − Γ_y(u)| ≤ (1 + 2λ)(|x' − y'| + |x_n − y_n| + |t − u|)`.
pub fn foliation_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(3);
    let mut errors = Vec::with_capacity(config.point_samples);
    for k in 0..config.point_samples {
        let n = 2 + k % 4;
        let params = ConeParams::new(n, config.lambda)?;
        let lip = params.foliation_lipschitz_bound();
        let on_boundary = k % 3 == 0;
        let sample = |rng: &mut ChaCha8Rng| {
            let mut x = random_slice_point(rng, &params, 0.0);
            if on_boundary {
                x.x_n = params.lambda() * x.x_prime_norm();
            }
            x
        };
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let t = rng.gen_range(-3.0..3.0);
        let u = rng.gen_range(-3.0..3.0);
        let gx = gamma_curve(&params, &x, t)?;
        let gy = gamma_curve(&params, &y, u)?;
        let gyt = gamma_curve(&params, &y, t)?;
        let mut bad = 0.0;
        // Injectivity: distinct base points stay distinct at equal heights.
        if x != y && gx == gyt {
            bad = f64::INFINITY;
        }
        let expected = if on_boundary { Membership::Boundary } else { params.classify_plane(&x) };
        if params.classify_ambient(&gx) != expected {
            bad = f64::INFINITY;
        }
        let d1: f64 = x.x_prime.iter().zip(&y.x_prime).map(|(a, b)| (a - b).abs()).sum::<f64>()
            + (x.x_n - y.x_n).abs()
            + (t - u).abs();
        let excess = gx.distance(&gy) - lip * d1;
        errors.push(f64::max(bad, excess / (1.0 + lip * d1)));
    }
    Ok(SuiteResult::from_errors("foliation", 1e-12, &errors))
}

const FD_STEP: f64 = 1e-6;

/// Partials from the flow coefficients against centered differences of `Φ[f]`.
pub fn flow_partials_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(4);
    let mut errors = Vec::with_capacity(config.point_samples);
    while errors.len() < config.point_samples {
        let n = 2 + errors.len() % 4;
        let params = ConeParams::new(n, config.lambda)?;
        let f = random_trial(&mut rng, n, config.lambda)?;
        let Some(x) = random_support_point(&mut rng, &params, &f, 1e-2) else { continue };
        let t = rng.gen_range(-1.0..1.0);
        let partials = partials_from_coefficients(&flow_coefficients(&params, &f, &x, t)?);
        let mut worst: f64 = 0.0;
        for (i, v) in partials.iter().enumerate() {
            let shifted = |h: f64| {
                let mut c = x.coords();
                c[i] += h;
                flow_map(&params, &f, &PlanePoint::from_coords(&c), t).map(|p| p.coords())
            };
            let (plus, minus) = (shifted(FD_STEP)?, shifted(-FD_STEP)?);
            for k in 0..=n {
                let fd = (plus[k] - minus[k]) / (2.0 * FD_STEP);
                worst = worst.max((fd - v[k]).abs() / (1.0 + v[k].abs()));
            }
        }
        errors.push(worst);
    }
    Ok(SuiteResult::from_errors("flow_partials", 1e-5, &errors))
}

/// Exact gradients of trial fields against centered differences.
pub fn trial_gradient_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(5);
    let mut errors = Vec::with_capacity(config.point_samples);
    while errors.len() < config.point_samples {
        let n = 2 + errors.len() % 4;
        let params = ConeParams::new(n, config.lambda)?;
        let f = random_trial(&mut rng, n, config.lambda)?;
        let Some(x) = random_support_point(&mut rng, &params, &f, 1e-2) else { continue };
        let grad = f.gradient(&x);
        let mut worst: f64 = 0.0;
        for (i, g) in grad.iter().enumerate() {
            let at = |h: f64| {
                let mut c = x.coords();
                c[i] += h;
                f.value(&PlanePoint::from_coords(&c))
            };
            let fd = (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP);
            worst = worst.max((fd - g).abs() / (1.0 + f.lipschitz_bound()));
        }
        errors.push(worst);
    }
    Ok(SuiteResult::from_errors("trial_gradients", 1e-5, &errors))
}

/// Deepest dyadic level used by the remainder suite.
pub const REMAINDER_LEVELS: i32 = 20;

/// Remainder over `t²` on `t_k = 2^{−k}`, `k ≤ 20`: uniformly below
/// `C(λ, n, Lip f)`, and below `10⁻³·C` at the last level.
pub fn remainder_bound_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let mut rng = config.rng(6);
    let mut errors = Vec::with_capacity(config.point_samples);
    while errors.len() < config.point_samples {
        let n = 2 + errors.len() % 4;
        let params = ConeParams::new(n, config.lambda)?;
        let f = random_trial(&mut rng, n, config.lambda)?;
        let Some(x) = random_support_point(&mut rng, &params, &f, 1e-6) else { continue };
        let bound = remainder_bound(config.lambda, n, f.lipschitz_bound());
        let value = f.value(&x);
        let grad = f.gradient(&x);
        let mut c = FlowCoefficients::zeros(n);
        let mut worst: f64 = 0.0;
        for k in 0..=REMAINDER_LEVELS {
            let t = 0.5f64.powi(k);
            coefficients_into(config.lambda, &x.x_prime, value, &grad, t, &mut c.alpha, &mut c.beta);
            let ratio = remainder(&c).abs() / (t * t);
            worst = worst.max(ratio / bound);
            if k == REMAINDER_LEVELS && ratio > 1e-3 * bound {
                worst = f64::INFINITY;
            }
        }
        errors.push(worst);
    }
    Ok(SuiteResult::from_errors("remainder_bound", 1.0, &errors))
}

/// Residuals of `λ*(1+λ*)² = K_n` and monotonicity in `n` over `3..=12`.
pub fn threshold_suite(_config: &VerifyConfig) -> Result<SuiteResult> {
    let rows = (3..=12).map(lambda_star).collect::<Result<Vec<_>>>()?;
    let mut errors: Vec<f64> = rows.iter().map(|r| r.residual.abs() / r.k_n).collect();
    for w in rows.windows(2) {
        errors.push(if w[1].k_n > w[0].k_n && w[1].lambda_star > w[0].lambda_star { 0.0 } else { f64::INFINITY });
    }
    Ok(SuiteResult::from_errors("thresholds", 1e-12, &errors))
}

/// Kato margins and the two shear inequalities for a small battery in `n = 3`
/// at `λ ∈ {0, λ*/2, λ*}`. Errors are the amounts by which a margin falls below zero.
pub fn kato_margin_suite(config: &VerifyConfig) -> Result<SuiteResult> {
    let n = 3;
    let k = kato_constant(n)?;
    let ls = lambda_star(n)?.lambda_star;
    let battery = boundary_battery(n, 4)?;
    let mut errors = Vec::new();
    for lambda in [0.0, 0.5 * ls, ls] {
        let params = ConeParams::new(n, lambda)?;
        for f in &battery {
            let margin = kato_margin(&params, f, &config.quadrature)?;
            let shear = shear_transform_check(&params, f, &config.quadrature)?;
            for m in [margin, shear.energy_slack(lambda), shear.kato_slack(k)] {
                errors.push((-m).max(0.0));
            }
        }
    }
    Ok(SuiteResult::from_errors("kato_margins", MARGIN_SLACK, &errors))
}
