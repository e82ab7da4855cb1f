//! Experiment configuration, read from TOML.
//!
//! ```toml
//! horizon = 10000
//! runs = 50
//! seed = 42
//! output = "savage10-rex3.csv"
//!
//! [policy]
//! kind = "rex3"
//! gamma = "adaptive"   # a number, "optimal" or "adaptive"
//! gmax = "half"        # half | quarter | tenth
//!
//! [environment]
//! kind = "savage"
//! k = 10
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::baselines::{exp3_default_gamma, RandomPolicy, Sparring};
use crate::environments::{AdversarialEnv, Environment, MatrixEnv, NonstationaryEnv, UtilityEnv};
use crate::policy::DuelingPolicy;
use crate::prefmat::PreferenceMatrix;
use crate::rex3::{GammaSchedule, GmaxRule, Rex3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMode {
    /// `γ*` from the known horizon.
    Optimal,
    /// `γ*` recomputed every step.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Fixed(f64),
    Mode(GammaMode),
}

impl Default for GammaSpec {
    fn default() -> Self {
        GammaSpec::Mode(GammaMode::Adaptive)
    }
}

impl GammaSpec {
    pub fn schedule(self, horizon: u64, gmax: GmaxRule) -> GammaSchedule {
        match self {
            GammaSpec::Fixed(g) => GammaSchedule::Fixed(g),
            GammaSpec::Mode(GammaMode::Optimal) => {
                GammaSchedule::OptimalFixedHorizon { horizon, gmax }
            }
            GammaSpec::Mode(GammaMode::Adaptive) => GammaSchedule::AdaptiveAnytime { gmax },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PolicySpec {
    Rex3 {
        #[serde(default)]
        gamma: GammaSpec,
        #[serde(default)]
        gmax: GmaxRule,
    },
    /// Sparring over two EXP3 learners; `gamma` defaults to the EXP3 tuning
    /// for the horizon.
    Sparring {
        #[serde(default)]
        gamma: Option<f64>,
    },
    Random,
}

impl PolicySpec {
    pub fn rex3(gamma: GammaSpec, gmax: GmaxRule) -> Self {
        PolicySpec::Rex3 { gamma, gmax }
    }

    pub fn build(&self, k: usize, horizon: u64) -> Result<Box<dyn DuelingPolicy>, HarnessError> {
        Ok(match *self {
            PolicySpec::Rex3 { gamma, gmax } => {
                Box::new(Rex3::new(k, gamma.schedule(horizon, gmax))?)
            }
            PolicySpec::Sparring { gamma } => {
                let g = gamma.unwrap_or_else(|| exp3_default_gamma(k, horizon));
                Box::new(Sparring::new(k, g)?)
            }
            PolicySpec::Random => Box::new(RandomPolicy::new(k)?),
        })
    }

    pub fn id(&self) -> String {
        match self {
            PolicySpec::Rex3 {
                gamma: GammaSpec::Fixed(g),
                ..
            } => format!("rex3-fixed-{g}"),
            PolicySpec::Rex3 {
                gamma: GammaSpec::Mode(m),
                gmax,
            } => format!("rex3-{m:?}-{gmax:?}").to_lowercase(),
            PolicySpec::Sparring { .. } => "sparring-exp3".into(),
            PolicySpec::Random => "random".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Preference matrix from a headerless CSV file.
    Matrix {
        path: PathBuf,
    },
    Savage {
        k: usize,
    },
    Bvs,
    /// Bernoulli utilities with the given means.
    Utilities {
        means: Vec<f64>,
    },
    Nonstationary {
        k: usize,
    },
    /// Adversarial reward sequence from a CSV file, one row per step.
    Adversarial {
        path: PathBuf,
    },
}

impl EnvSpec {
    pub fn build(&self) -> Result<Box<dyn Environment>, HarnessError> {
        Ok(match self {
            EnvSpec::Matrix { path } => Box::new(MatrixEnv::new(PreferenceMatrix::load(path)?)),
            EnvSpec::Savage { k } => Box::new(MatrixEnv::new(PreferenceMatrix::savage(*k)?)),
            EnvSpec::Bvs => Box::new(MatrixEnv::new(PreferenceMatrix::bvs())),
            EnvSpec::Utilities { means } => Box::new(UtilityEnv::new(means.clone())?),
            EnvSpec::Nonstationary { k } => Box::new(NonstationaryEnv::new(*k)?),
            EnvSpec::Adversarial { path } => Box::new(AdversarialEnv::load(path)?),
        })
    }

    pub fn id(&self) -> String {
        match self {
            EnvSpec::Matrix { path } => format!(
                "matrix-{}",
                path.file_stem()
                    .map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned())
            ),
            EnvSpec::Savage { k } => format!("savage{k}"),
            EnvSpec::Bvs => "bvs20".into(),
            EnvSpec::Utilities { means } => format!("utilities{}", means.len()),
            EnvSpec::Nonstationary { k } => format!("nonstationary{k}"),
            EnvSpec::Adversarial { path } => format!(
                "adversarial-{}",
                path.file_stem()
                    .map_or_else(|| "file".into(), |s| s.to_string_lossy().into_owned())
            ),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        match self {
            EnvSpec::Matrix { path } | EnvSpec::Adversarial { path } if path.is_relative() => {
                *path = base.join(&*path);
            }
            _ => {}
        }
    }
}

fn default_runs() -> usize {
    1
}

fn default_per_decade() -> u32 {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointSpec {
    /// Log-spaced checkpoints per power of ten (capped at 200).
    #[serde(default = "default_per_decade")]
    pub per_decade: u32,
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        Self {
            per_decade: default_per_decade(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicySpec,
    pub environment: EnvSpec,
    pub horizon: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    /// Arm count the policy expects; must match the environment when set.
    #[serde(default)]
    pub arms: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(
        policy: PolicySpec,
        environment: EnvSpec,
        horizon: u64,
        runs: usize,
        seed: u64,
    ) -> Self {
        Self {
            policy,
            environment,
            horizon,
            runs,
            seed,
            checkpoints: CheckpointSpec::default(),
            arms: None,
            output: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))
    }

    /// Loads a config file. Relative file paths inside it are taken relative
    /// to the file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.environment.resolve_paths(base);
        if let Some(out) = cfg.output.as_mut() {
            if out.is_relative() {
                *out = base.join(&*out);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon < 1 {
            return Err(HarnessError::ConfigInvalid(
                "horizon must be at least 1".into(),
            ));
        }
        if self.runs < 1 {
            return Err(HarnessError::ConfigInvalid(
                "runs must be at least 1".into(),
            ));
        }
        if let PolicySpec::Rex3 {
            gamma: GammaSpec::Fixed(g),
            ..
        }
        | PolicySpec::Sparring { gamma: Some(g) } = self.policy
        {
            if !(g > 0.0 && g <= 1.0) {
                return Err(HarnessError::ConfigInvalid(format!(
                    "gamma {g} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}
