//! Sample-based belief over `(w, α)` and the quantities read off it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{CompiledData, ALPHA_MIN, LIKELIHOOD_FLOOR};
use crate::trajectory::{alignment, relative_reward, TrajectorySet, WeightVector};
use crate::user::FeedbackRecord;

/// One hypothesis about the user: unit weights plus saturation.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub w: WeightVector,
    pub alpha: f64,
}

/// Point estimate read off a belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorEstimate {
    pub w_hat: WeightVector,
    pub alpha_hat: f64,
}

/// Weighted samples approximating the posterior given `dataset`.
#[derive(Debug, Clone)]
pub struct Belief {
    samples: Vec<Hypothesis>,
    weights: Vec<f64>,
    dataset: Vec<FeedbackRecord>,
    sigma: f64,
    set: Arc<TrajectorySet>,
}

/// Serializable form of a belief without its dataset or trajectory set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefSnapshot {
    /// Each row is the weight vector followed by `alpha`.
    pub samples: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub sigma: f64,
}

/// Performance measure used by [`Belief::worst_case_error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Alignment,
    RelativeReward,
}

impl Belief {
    pub fn new(
        samples: Vec<Hypothesis>,
        weights: Vec<f64>,
        dataset: Vec<FeedbackRecord>,
        sigma: f64,
        set: Arc<TrajectorySet>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("a belief needs at least one sample"));
        }
        if samples.len() != weights.len() {
            return Err(Error::invalid("samples and weights differ in length"));
        }
        if weights.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid("sample weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("sample weights sum to {total}, not 1")));
        }
        for s in &samples {
            set.check_dim(s.w.as_slice())?;
            if !(ALPHA_MIN - 1e-12..=1.0).contains(&s.alpha) {
                return Err(Error::invalid(format!("sample alpha {} out of range", s.alpha)));
            }
        }
        if !(sigma > 0.0) {
            return Err(Error::invalid("belief sigma must be positive"));
        }
        Ok(Belief {
            samples,
            weights,
            dataset,
            sigma,
            set,
        })
    }

    /// Equal-weight belief over `samples`.
    pub fn uniform(
        samples: Vec<Hypothesis>,
        dataset: Vec<FeedbackRecord>,
        sigma: f64,
        set: Arc<TrajectorySet>,
    ) -> Result<Self> {
        let m = samples.len().max(1);
        let weights = vec![1.0 / m as f64; samples.len()];
        Belief::new(samples, weights, dataset, sigma, set)
    }

    pub fn samples(&self) -> &[Hypothesis] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dataset(&self) -> &[FeedbackRecord] {
        &self.dataset
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set(&self) -> &Arc<TrajectorySet> {
        &self.set
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Posterior mean of `w` (renormalized) and of `α`.
    pub fn mean_weight(&self) -> Result<PosteriorEstimate> {
        let d = self.set.dimension();
        let mut mean = vec![0.0; d];
        let mut alpha = 0.0;
        for (s, &p) in self.samples.iter().zip(&self.weights) {
            for (m, x) in mean.iter_mut().zip(s.w.as_slice()) {
                *m += p * x;
            }
            alpha += p * s.alpha;
        }
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegeneratePosterior);
        }
        mean.iter_mut().for_each(|x| *x /= norm);
        Ok(PosteriorEstimate {
            w_hat: WeightVector::from_unit_unchecked(mean),
            alpha_hat: alpha,
        })
    }

    /// `log E[P(validation | w, α)]` under this belief, evaluated in log space.
    /// Each record uses its own slider step.
    pub fn validation_log_likelihood(&self, validation: &[FeedbackRecord]) -> Result<f64> {
        if validation.is_empty() {
            return Err(Error::invalid("validation set is empty"));
        }
        let data = CompiledData::new(validation, self.sigma, &self.set)?;
        let mut rewards = Vec::new();
        let terms: Vec<f64> = self
            .samples
            .iter()
            .zip(&self.weights)
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, &p)| p.ln() + data.log_likelihood(s.w.as_slice(), s.alpha, &mut rewards))
            .collect();
        let floor = validation.len() as f64 * LIKELIHOOD_FLOOR.ln();
        Ok(log_sum_exp(&terms).max(floor))
    }

    /// Largest posterior-discounted error `weight · (1 − ξ(w, w_true))` over
    /// the belief's samples.
    pub fn worst_case_error(&self, w_true: &WeightVector, measure: Measure) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for (s, &p) in self.samples.iter().zip(&self.weights) {
            let xi = match measure {
                Measure::Alignment => alignment(&s.w, w_true)?,
                Measure::RelativeReward => relative_reward(&s.w, w_true, &self.set)?,
            };
            worst = worst.max(p * (1.0 - xi));
        }
        Ok(worst)
    }

    pub fn snapshot(&self) -> BeliefSnapshot {
        BeliefSnapshot {
            samples: self
                .samples
                .iter()
                .map(|s| {
                    let mut row = s.w.as_slice().to_vec();
                    row.push(s.alpha);
                    row
                })
                .collect(),
            weights: self.weights.clone(),
            sigma: self.sigma,
        }
    }

    /// Rebuilds a belief from a snapshot, attaching its dataset and set.
    pub fn from_snapshot(
        snapshot: &BeliefSnapshot,
        dataset: Vec<FeedbackRecord>,
        set: Arc<TrajectorySet>,
    ) -> Result<Self> {
        let d = set.dimension();
        let samples = snapshot
            .samples
            .iter()
            .map(|row| {
                if row.len() != d + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: d + 1,
                        actual: row.len(),
                    });
                }
                Ok(Hypothesis {
                    w: WeightVector::new(row[..d].to_vec())?,
                    alpha: row[d],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Belief::new(samples, snapshot.weights.clone(), dataset, snapshot.sigma, set)
    }
}

/// Posterior mean estimate of a belief.
pub fn mean_weight(belief: &Belief) -> Result<PosteriorEstimate> {
    belief.mean_weight()
}

pub fn validation_log_likelihood(validation: &[FeedbackRecord], belief: &Belief) -> Result<f64> {
    belief.validation_log_likelihood(validation)
}

pub fn worst_case_error(belief: &Belief, w_true: &WeightVector, measure: Measure) -> Result<f64> {
    belief.worst_case_error(w_true, measure)
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
