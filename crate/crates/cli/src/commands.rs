//! The five subcommands. Each returns a [`Report`] and an exit status.

use conestab::domain::aperture_of;
use conestab::quadrature::LiminfEstimate;
use conestab::stability::{instability_witness_n2, lambda_star, n2_witness, stability_sweep, Regime};
use conestab::trial::{boundary_battery, TrialFamily, TrialFunction};
use conestab::variation::{default_t0, variation_report, VariationReport, DIVERGENCE_EPSILONS};
use conestab::verify::run_all;
use conestab::{ConeParams, Error};
use serde_json::Value;

use crate::config::{ConfigError, RunConfig};
use crate::report::{object, opt_real, real, real_string, reals, stringify_floats, Report, Table};

/// Relative discrepancy allowed between the quotient limit and the closed form.
pub const DISCREPANCY_TOL: f64 = 0.01;
pub const MAX_THRESHOLD_N: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    InvalidConfig = 2,
    QuadratureFailure = 3,
    InvariantFailure = 4,
    UnstableWitness = 5,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self.status {
            Status::InvalidConfig => "invalid_config",
            Status::QuadratureFailure => "quadrature_failure",
            Status::InvariantFailure => "invariant_failure",
            Status::Success | Status::UnstableWitness => "error",
        }
    }

    pub fn to_json(&self) -> String {
        let doc = object([(
            "error",
            object([
                ("kind", Value::from(self.kind())),
                ("message", Value::from(self.message.clone())),
                ("exit_code", Value::from(self.status.code())),
            ]),
        )]);
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError { status: Status::InvalidConfig, message: e.0 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::UnsupportedDimension { .. } => Status::InvalidConfig,
            Error::InvariantViolation(_) => Status::InvariantFailure,
            _ => Status::QuadratureFailure,
        };
        CliError { status, message: e.to_string() }
    }
}

pub struct Outcome {
    pub report: Report,
    pub status: Status,
}

fn config_value(cfg: &RunConfig) -> Value {
    stringify_floats(serde_json::to_value(cfg).expect("config serializes"))
}

fn family_value(f: &TrialFunction) -> Value {
    stringify_floats(serde_json::to_value(f).expect("trial function serializes"))
}

fn estimate_value(e: &LiminfEstimate) -> Value {
    object([
        ("parameters", reals(&e.parameters)),
        ("quotients", reals(&e.quotients)),
        ("extrapolated", real(e.extrapolated)),
        ("liminf_proxy", real(e.liminf_proxy)),
        ("converged", Value::from(e.converged)),
    ])
}

pub fn threshold(from: usize, to: usize, cfg: &RunConfig) -> Result<Outcome, CliError> {
    // A reversed range is an empty table, not an error.
    for n in if from <= to { vec![from, to] } else { Vec::new() } {
        if !(3..=MAX_THRESHOLD_N).contains(&n) {
            return Err(ConfigError(format!("n = {n} must lie in [3, {MAX_THRESHOLD_N}]")).into());
        }
    }
    let mut table = Table::new(&["n", "k_n", "lambda_star", "aperture", "residual"]);
    let mut results = Vec::new();
    for n in from..=to {
        let t = lambda_star(n)?;
        let aperture = aperture_of(t.lambda_star);
        table.push(vec![
            n.to_string(),
            real_string(t.k_n),
            real_string(t.lambda_star),
            real_string(aperture),
            real_string(t.residual),
        ]);
        results.push(object([
            ("n", Value::from(n)),
            ("k_n", real(t.k_n)),
            ("lambda_star", real(t.lambda_star)),
            ("aperture", real(aperture)),
            ("residual", real(t.residual)),
        ]));
    }
    let mut config = config_value(cfg);
    if let Value::Object(m) = &mut config {
        m.insert("n_from".into(), Value::from(from));
        m.insert("n_to".into(), Value::from(to));
    }
    Ok(Outcome { report: Report { config, results, table }, status: Status::Success })
}

/// Field used when a run configures no trial functions: `(1 − |x − h e_n|²/ρ²)²₊`
/// normalized to `f(0) = 1`, with `ρ = 1`, `h = 0.35`.
pub fn default_trial(n: usize) -> Result<TrialFunction, Error> {
    TrialFunction::new(n, TrialFamily::BoundaryConcentrated { radius: 1.0, exponent: 2.0, height: 0.35 })
}

fn variation_status(r: &VariationReport) -> Status {
    if r.is_divergent() {
        return Status::UnstableWitness;
    }
    let within = r.relative_discrepancy().is_some_and(|d| d <= DISCREPANCY_TOL);
    if r.conclusive && within {
        Status::Success
    } else {
        Status::InvariantFailure
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Success => "ok",
        Status::UnstableWitness => "divergent",
        _ => "failed",
    }
}

pub fn variation(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.require_n(2)?;
    let lambda = cfg.require_lambda()?;
    let params = ConeParams::new(n, lambda)?;
    let mut trials = cfg.trial_functions(n)?;
    if trials.is_empty() {
        trials.push(default_trial(n)?);
    }
    let spec = cfg.quadrature();
    let levels = cfg.levels();
    let mut table = Table::new(&[
        "n",
        "lambda",
        "trial_id",
        "label",
        "closed_form",
        "dirichlet_term",
        "boundary_term",
        "first_variation",
        "second_variation_fd",
        "discrepancy",
        "conclusive",
        "status",
    ]);
    let mut results = Vec::new();
    let mut statuses = Vec::new();
    for (id, f) in trials.iter().enumerate() {
        let t0 = cfg.t0.unwrap_or_else(|| default_t0(f));
        let r = variation_report(&params, f, t0, levels, &spec)?;
        let status = variation_status(&r);
        statuses.push(status);
        let first = r.first_variation.as_ref().expect("full report");
        let second = r.second_variation_fd.as_ref().expect("full report");
        let divergence = r.divergence.as_ref().map_or(Value::Null, |d| {
            object([
                ("epsilons", reals(&d.epsilons)),
                ("regularized_values", reals(&d.regularized_values)),
                ("log_slope", real(d.log_slope)),
            ])
        });
        results.push(object([
            ("trial_id", Value::from(id)),
            ("label", Value::from(f.label())),
            ("trial", family_value(f)),
            ("n", Value::from(n)),
            ("lambda", real(lambda)),
            ("t0", real(t0)),
            ("levels", Value::from(levels)),
            ("closed_form", real(r.closed_form)),
            ("dirichlet_term", real(r.dirichlet_term)),
            ("boundary_term", real(r.boundary_term)),
            ("discrepancy", opt_real(r.discrepancy)),
            ("relative_discrepancy", opt_real(r.relative_discrepancy())),
            ("conclusive", Value::from(r.conclusive)),
            ("first_variation", estimate_value(first)),
            ("second_variation_fd", estimate_value(second)),
            ("divergence", divergence),
            ("status", Value::from(status_name(status))),
        ]));
        table.push(vec![
            n.to_string(),
            real_string(lambda),
            id.to_string(),
            f.label(),
            real_string(r.closed_form),
            real_string(r.dirichlet_term),
            real_string(r.boundary_term),
            real_string(first.extrapolated),
            real_string(second.extrapolated),
            r.discrepancy.map_or_else(String::new, real_string),
            r.conclusive.to_string(),
            status_name(status).to_string(),
        ]);
    }
    let status = if statuses.contains(&Status::InvariantFailure) {
        Status::InvariantFailure
    } else if statuses.contains(&Status::UnstableWitness) {
        Status::UnstableWitness
    } else {
        Status::Success
    };
    Ok(Outcome { report: Report { config: config_value(cfg), results, table }, status })
}

pub fn sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let n = cfg.require_n(3)?;
    let lambda = cfg.require_lambda()?;
    let params = ConeParams::new(n, lambda)?;
    let battery = if cfg.trials.is_empty() {
        boundary_battery(n, cfg.battery_size.unwrap_or(20))?
    } else {
        cfg.trial_functions(n)?
    };
    let threshold = lambda_star(n)?;
    let verdict = stability_sweep(&params, &battery, &cfg.quadrature())?;
    let witness_id = verdict.witness.as_ref().and_then(|w| battery.iter().position(|f| f == w));
    let mut table = Table::new(&["n", "lambda", "trial_id", "label", "margin", "regime"]);
    for (id, (f, m)) in battery.iter().zip(&verdict.margins).enumerate() {
        table.push(vec![
            n.to_string(),
            real_string(lambda),
            id.to_string(),
            f.label(),
            real_string(*m),
            verdict.regime.as_str().to_string(),
        ]);
    }
    let result = object([
        ("n", Value::from(n)),
        ("lambda", real(lambda)),
        ("k_n", real(threshold.k_n)),
        ("lambda_star", real(threshold.lambda_star)),
        ("regime", Value::from(verdict.regime.as_str())),
        ("margin", opt_real(verdict.margin)),
        ("margins", reals(&verdict.margins)),
        ("witness_id", witness_id.map_or(Value::Null, Value::from)),
        ("witness", verdict.witness.as_ref().map_or(Value::Null, family_value)),
    ]);
    let status = if verdict.regime == Regime::Unstable { Status::UnstableWitness } else { Status::Success };
    Ok(Outcome { report: Report { config: config_value(cfg), results: vec![result], table }, status })
}

pub fn witness_n2(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(n) = cfg.n {
        if n != 2 {
            return Err(ConfigError(format!("witness-n2 needs n = 2, got n = {n}")).into());
        }
    }
    let lambda = cfg.require_lambda()?;
    let params = ConeParams::new(2, lambda)?;
    let epsilons = cfg.epsilons.clone().unwrap_or_else(|| DIVERGENCE_EPSILONS.to_vec());
    let verdict = instability_witness_n2(&params, &epsilons, &cfg.quadrature())?;
    let mut table = Table::new(&["n", "lambda", "epsilon", "regularized_value", "regime"]);
    for (e, v) in epsilons.iter().zip(&verdict.margins) {
        table.push(vec![
            "2".into(),
            real_string(lambda),
            real_string(*e),
            real_string(*v),
            verdict.regime.as_str().to_string(),
        ]);
    }
    let result = object([
        ("n", Value::from(2)),
        ("lambda", real(lambda)),
        ("regime", Value::from(verdict.regime.as_str())),
        ("epsilons", reals(&epsilons)),
        ("regularized_values", reals(&verdict.margins)),
        ("log_slope", opt_real(verdict.log_slope)),
        ("witness", family_value(&n2_witness())),
    ]);
    let status = if verdict.regime == Regime::Unstable { Status::UnstableWitness } else { Status::Success };
    Ok(Outcome { report: Report { config: config_value(cfg), results: vec![result], table }, status })
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut vc = cfg.verify.clone().unwrap_or_default();
    if let Some(seed) = cfg.seed {
        vc.seed = seed;
    }
    if let Some(lambda) = cfg.lambda {
        vc.lambda = lambda;
    }
    vc.validate()?;
    let suites = run_all(&vc)?;
    let mut table = Table::new(&["suite", "passed", "worst_error", "tolerance", "samples", "violations"]);
    let mut results = Vec::new();
    for s in &suites {
        table.push(vec![
            s.name.clone(),
            s.passed.to_string(),
            real_string(s.worst_error),
            real_string(s.tolerance),
            s.samples.to_string(),
            s.violations.to_string(),
        ]);
        results.push(object([
            ("suite", Value::from(s.name.clone())),
            ("passed", Value::from(s.passed)),
            ("worst_error", real(s.worst_error)),
            ("tolerance", real(s.tolerance)),
            ("samples", Value::from(s.samples)),
            ("violations", Value::from(s.violations)),
        ]));
    }
    let status = if suites.iter().all(|s| s.passed) { Status::Success } else { Status::InvariantFailure };
    let resolved = RunConfig { verify: Some(vc), ..cfg.clone() };
    Ok(Outcome { report: Report { config: config_value(&resolved), results, table }, status })
}

/// Names of failing suites in a verify report, for the error stream.
pub fn failing_suites(report: &Report) -> Vec<String> {
    report
        .results
        .iter()
        .filter(|r| r["passed"] == Value::Bool(false))
        .filter_map(|r| r["suite"].as_str().map(String::from))
        .collect()
}
