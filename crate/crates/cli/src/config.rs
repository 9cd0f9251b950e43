//! Run configuration: one TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use conestab::quadrature::QuadratureSpec;
use conestab::trial::{TrialFamily, TrialFunction};
use conestab::verify::VerifyConfig;
use serde::{Deserialize, Serialize};

pub const DEFAULT_LEVELS: usize = 8;
pub const MAX_LEVELS: usize = 30;
pub const MAX_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

/// One configured trial field; `amplitude` defaults to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialEntry {
    pub family: TrialFamily,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub t0: Option<f64>,
    pub levels: Option<usize>,
    pub seed: Option<u64>,
    pub epsilons: Option<Vec<f64>>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    /// Size of the default boundary-concentrated battery for `sweep`.
    pub battery_size: Option<usize>,
    pub quadrature: Option<QuadratureSpec>,
    pub trials: Vec<TrialEntry>,
    pub verify: Option<VerifyConfig>,
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub t0: Option<f64>,
    pub levels: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub epsilon_cutoff: Option<f64>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<conestab::Error> for ConfigError {
    fn from(e: conestab::Error) -> Self {
        ConfigError(e.to_string())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! over {
            ($($field:ident),*) => {$( if o.$field.is_some() { self.$field = o.$field.clone(); } )*};
        }
        over!(n, lambda, t0, levels, seed, format, out);
        if let Some(eps) = o.epsilon_cutoff {
            self.quadrature = Some(self.quadrature().with_epsilon_cutoff(eps));
        }
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        self.quadrature.unwrap_or_default()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }

    pub fn levels(&self) -> usize {
        self.levels.unwrap_or(DEFAULT_LEVELS)
    }

    pub fn require_n(&self, min: usize) -> Result<usize, ConfigError> {
        let n = self.n.ok_or_else(|| ConfigError("missing `n`".into()))?;
        if !(min..=MAX_N).contains(&n) {
            return Err(ConfigError(format!("n = {n} must lie in [{min}, {MAX_N}]")));
        }
        Ok(n)
    }

    pub fn require_lambda(&self) -> Result<f64, ConfigError> {
        let l = self.lambda.ok_or_else(|| ConfigError("missing `lambda`".into()))?;
        if !(l.is_finite() && l >= 0.0) {
            return Err(ConfigError(format!("lambda = {l} must be finite and nonnegative")));
        }
        Ok(l)
    }

    /// Checks the ranges shared by every command.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.quadrature().validate()?;
        if let Some(levels) = self.levels {
            if !(3..=MAX_LEVELS).contains(&levels) {
                return Err(ConfigError(format!("levels = {levels} must lie in [3, {MAX_LEVELS}]")));
            }
        }
        if let Some(t0) = self.t0 {
            if !(t0.is_finite() && t0 > 0.0) {
                return Err(ConfigError(format!("t0 = {t0} must be positive")));
            }
        }
        if let Some(eps) = &self.epsilons {
            if eps.len() < 2
                || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0))
                || eps.windows(2).any(|w| w[1] >= w[0])
            {
                return Err(ConfigError("epsilons must be a decreasing list of at least two values in (0, 1)".into()));
            }
        }
        if self.battery_size == Some(0) {
            return Err(ConfigError("battery_size must be positive".into()));
        }
        if let Some(v) = &self.verify {
            v.validate()?;
        }
        Ok(())
    }

    pub fn trial_functions(&self, n: usize) -> Result<Vec<TrialFunction>, ConfigError> {
        self.trials
            .iter()
            .map(|t| TrialFunction::with_amplitude(n, t.family.clone(), t.amplitude).map_err(ConfigError::from))
            .collect()
    }
}
