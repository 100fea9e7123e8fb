//! Observation model for slider answers.
//!
//! For a fixed hypothesis `(w, α)` the user's noiseless answer is pinned to
//! `ψ(w, α) = clamp((φ^P − φ^Q)·w / (α·δ(w)), −1, 1)`, where `δ(w)` is the
//! largest reward gap in the set. Integrating the indicator belief against
//! the slider noise then leaves the probability that a Gaussian centred at
//! `ψ(w, α)` rounds onto the observed grid point `μ`. Everything here
//! evaluates that probability.

use crate::error::{Error, Result};
use crate::slider::SliderGrid;
use crate::trajectory::{TrajectorySet, WeightVector};
use crate::user::{FeedbackRecord, GAP_EPS};

/// Per-record likelihoods are floored here before taking logs.
pub const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Lower end of the saturation prior `α ~ U[α_min, 1]`.
pub const ALPHA_MIN: f64 = 0.05;

/// Probability of observing slider value `mu` when the noiseless answer is `psi`.
pub fn feedback_likelihood(mu: f64, psi: f64, sigma: f64, epsilon: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let grid = SliderGrid::new(epsilon)?;
    let idx = grid
        .index_of(mu)
        .ok_or_else(|| Error::invalid(format!("mu = {mu} is not on the grid of step {epsilon}")))?;
    Ok(grid.bucket_probability(idx, psi.clamp(-1.0, 1.0), sigma))
}

/// Model answer `ψ` for a reward difference under a hypothesis with
/// saturation `alpha` and reward gap `gap`; zero when the gap vanishes.
#[inline]
pub fn model_psi(reward_diff: f64, alpha: f64, gap: f64) -> f64 {
    if gap <= GAP_EPS {
        0.0
    } else {
        (reward_diff / (alpha * gap)).clamp(-1.0, 1.0)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(ALPHA_MIN..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must lie in [{ALPHA_MIN}, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Likelihood of one answered query under hypothesis `(w, alpha)`.
pub fn query_likelihood(
    record: &FeedbackRecord,
    w: &WeightVector,
    alpha: f64,
    sigma: f64,
    set: &TrajectorySet,
) -> Result<f64> {
    check_alpha(alpha)?;
    let data = CompiledData::new(std::slice::from_ref(record), sigma, set)?;
    let mut rewards = Vec::new();
    let gap = data.evaluate(w.as_slice(), &mut rewards);
    Ok(data.record_likelihood(0, &rewards, gap, alpha))
}

/// Unnormalized log posterior of `(w, alpha)`. The prior is uniform on the
/// sphere times uniform on `[α_min, 1]`, so only the likelihood terms remain.
pub fn log_posterior(
    w: &WeightVector,
    alpha: f64,
    dataset: &[FeedbackRecord],
    sigma: f64,
    set: &TrajectorySet,
) -> Result<f64> {
    check_alpha(alpha)?;
    let data = CompiledData::new(dataset, sigma, set)?;
    let mut scratch = Vec::new();
    Ok(data.log_likelihood(w.as_slice(), alpha, &mut scratch))
}

/// A dataset resolved against a trajectory set for fast repeated evaluation.
#[derive(Debug, Clone)]
pub(crate) struct CompiledData<'a> {
    set: &'a TrajectorySet,
    sigma: f64,
    grids: Vec<SliderGrid>,
    // (p, q, grid slot, bucket index)
    records: Vec<(usize, usize, usize, usize)>,
}

impl<'a> CompiledData<'a> {
    pub fn new(dataset: &[FeedbackRecord], sigma: f64, set: &'a TrajectorySet) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let mut grids: Vec<SliderGrid> = Vec::new();
        let mut records = Vec::with_capacity(dataset.len());
        for r in dataset {
            let (p, q) = set.resolve(&r.query)?;
            let slot = match grids.iter().position(|g| g.epsilon() == r.epsilon) {
                Some(s) => s,
                None => {
                    grids.push(SliderGrid::new(r.epsilon)?);
                    grids.len() - 1
                }
            };
            let idx = grids[slot].index_of(r.mu).ok_or_else(|| {
                Error::invalid(format!(
                    "mu = {} is not on the grid of step {}",
                    r.mu, r.epsilon
                ))
            })?;
            records.push((p, q, slot, idx));
        }
        Ok(CompiledData {
            set,
            sigma,
            grids,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn set(&self) -> &'a TrajectorySet {
        self.set
    }

    /// Fills `rewards` for `w` and returns the reward gap `δ(w)`.
    pub fn evaluate(&self, w: &[f64], rewards: &mut Vec<f64>) -> f64 {
        self.set.rewards_into(w, rewards);
        TrajectorySet::spread(rewards)
    }

    pub fn record_likelihood(&self, k: usize, rewards: &[f64], gap: f64, alpha: f64) -> f64 {
        let (p, q, slot, idx) = self.records[k];
        let psi = model_psi(rewards[p] - rewards[q], alpha, gap);
        self.grids[slot].bucket_probability(idx, psi, self.sigma)
    }

    /// Sum of floored log-likelihoods given precomputed rewards and gap.
    pub fn log_likelihood_with(&self, rewards: &[f64], gap: f64, alpha: f64) -> f64 {
        (0..self.records.len())
            .map(|k| {
                self.record_likelihood(k, rewards, gap, alpha)
                    .max(LIKELIHOOD_FLOOR)
                    .ln()
            })
            .sum()
    }

    pub fn log_likelihood(&self, w: &[f64], alpha: f64, rewards: &mut Vec<f64>) -> f64 {
        let gap = self.evaluate(w, rewards);
        self.log_likelihood_with(rewards, gap, alpha)
    }
}

/// Whether `(w, alpha)` is consistent with noiseless answers.
///
/// Each record's `mu` is read as the exact noiseless answer `ψ`. Saturated
/// answers impose `(φ^P − φ^Q)·w ≥ α·δ(w)` (or `≤ −α·δ(w)`); interior answers
/// impose `|(φ^P − φ^Q)·w − ψ·α·δ(w)| ≤ tolerance`.
pub fn noiseless_feasible(
    w: &WeightVector,
    alpha: f64,
    dataset: &[FeedbackRecord],
    set: &TrajectorySet,
    tolerance: f64,
) -> Result<bool> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    set.check_dim(w.as_slice())?;
    let rewards = set.rewards(w.as_slice());
    let scaled_gap = alpha * TrajectorySet::spread(&rewards);
    for r in dataset {
        let (p, q) = set.resolve(&r.query)?;
        let diff = rewards[p] - rewards[q];
        let psi = r.mu;
        let ok = if psi >= 1.0 {
            diff >= scaled_gap - tolerance
        } else if psi <= -1.0 {
            diff <= -scaled_gap + tolerance
        } else {
            (diff - psi * scaled_gap).abs() <= tolerance
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `w` is consistent with the choices implied by the answers: the
/// reward difference has the sign of `ψ` for every non-neutral record.
pub fn choice_feasible(w: &WeightVector, dataset: &[FeedbackRecord], set: &TrajectorySet) -> Result<bool> {
    set.check_dim(w.as_slice())?;
    let rewards = set.rewards(w.as_slice());
    for r in dataset {
        let (p, q) = set.resolve(&r.query)?;
        let diff = rewards[p] - rewards[q];
        if (r.mu > 0.0 && diff < 0.0) || (r.mu < 0.0 && diff > 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
