use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::queries::QueryPolicy;
use crate::sampler::SamplerConfig;
use crate::slider::SliderGrid;

/// Environment variable that overrides [`ExperimentConfig::seed`].
pub const SEED_ENV: &str = "SCALEFB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// Slider answers on the configured step.
    Scale,
    /// Three-way answers, i.e. a slider with step 1.
    SoftChoice,
}

impl FeedbackKind {
    pub fn label(self) -> &'static str {
        match self {
            FeedbackKind::Scale => "scale",
            FeedbackKind::SoftChoice => "soft_choice",
        }
    }

    /// Slider step used for elicitation and for the belief.
    pub fn epsilon(self, configured: f64) -> f64 {
        match self {
            FeedbackKind::Scale => configured,
            FeedbackKind::SoftChoice => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Alignment,
    RelativeReward,
    LogLikelihood,
    WorstCaseError,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::Alignment,
        Metric::RelativeReward,
        Metric::LogLikelihood,
        Metric::WorstCaseError,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Alignment => "alignment",
            Metric::RelativeReward => "relative_reward",
            Metric::LogLikelihood => "log_likelihood",
            Metric::WorstCaseError => "worst_case_error",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// One arm of a campaign: a feedback kind paired with a query policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSpec {
    pub feedback: FeedbackKind,
    pub policy: QueryPolicy,
}

impl ArmSpec {
    pub fn new(feedback: FeedbackKind, policy: QueryPolicy) -> Self {
        ArmSpec { feedback, policy }
    }

    /// `feedback/policy`, e.g. `scale/info_gain`.
    pub fn label(&self) -> String {
        format!("{}/{}", self.feedback.label(), self.policy.kind.label())
    }
}

/// Metric values at one iteration; unrequested metrics stay `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricValues([Option<f64>; 4]);

impl MetricValues {
    pub fn get(&self, m: Metric) -> Option<f64> {
        self.0[m.slot()]
    }

    pub fn set(&mut self, m: Metric, v: f64) {
        self.0[m.slot()] = Some(v);
    }
}

/// A simulation campaign, read from TOML.
///
/// ```toml
/// seed = 1
/// n_users = 30
/// alpha_grid = [0.25, 0.5, 0.75, 1.0]
/// sigma_true = 0.1
/// sigma_assumed = 0.1
/// epsilon = 0.1
/// K = 20
/// M = 100
/// metrics = ["alignment", "relative_reward"]
/// output_dir = "results"
///
/// [environment]
/// kind = "synthetic"
/// dimension = 10
/// n_trajectories = 200
/// seed = 7
///
/// [[policies]]
/// feedback = "scale"
/// policy = { kind = "info_gain" }
///
/// [[policies]]
/// feedback = "soft_choice"
/// policy = { kind = "info_gain" }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSpec,
    pub n_users: usize,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    pub sigma_true: f64,
    /// Noise level the belief assumes; defaults to `sigma_true`.
    #[serde(default)]
    pub sigma_assumed: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub policies: Vec<ArmSpec>,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    /// Random scale queries per session held out for the log-likelihood metric.
    #[serde(default = "default_validation")]
    pub validation_queries: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: Option<SamplerConfig>,
    /// Worker threads; 0 means one per available core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_alpha_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

fn default_m() -> usize {
    100
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Alignment, Metric::RelativeReward]
}

fn default_validation() -> usize {
    10
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, resolving a relative `output_dir` against the
    /// file's directory and applying the seed override from the environment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = toml::from_str::<ExperimentConfig>(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        if let (Some(dir), Some(parent)) = (&cfg.output_dir, path.parent()) {
            if dir.is_relative() {
                cfg.output_dir = Some(parent.join(dir));
            }
        }
        cfg.apply_seed_override()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_seed_override(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sigma_assumed(&self) -> f64 {
        self.sigma_assumed.unwrap_or(self.sigma_true)
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        self.sampler.clone().unwrap_or_default().with_samples(self.m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("K must be at least 1"));
        }
        if self.n_users == 0 {
            return Err(Error::invalid("n_users must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::invalid("M must be at least 1"));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::invalid("alpha_grid is empty"));
        }
        if let Some(a) = self.alpha_grid.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::invalid(format!("alpha grid values must lie in (0, 1], got {a}")));
        }
        if !(self.sigma_true >= 0.0 && self.sigma_true.is_finite()) {
            return Err(Error::invalid("sigma_true must be non-negative"));
        }
        if !(self.sigma_assumed() > 0.0 && self.sigma_assumed().is_finite()) {
            return Err(Error::invalid("sigma_assumed must be positive"));
        }
        SliderGrid::new(self.epsilon)?;
        if self.policies.is_empty() {
            return Err(Error::invalid("at least one policy arm is required"));
        }
        for arm in &self.policies {
            arm.policy.validate()?;
        }
        if self.metrics.contains(&Metric::LogLikelihood) && self.validation_queries == 0 {
            return Err(Error::invalid("log_likelihood needs validation_queries ≥ 1"));
        }
        Ok(())
    }
}
