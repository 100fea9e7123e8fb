use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::sampler::{sample_posterior_with, SamplerConfig};
use crate::trajectory::TrajectorySet;
use crate::user::{FeedbackRecord, SimulatedUser};

use super::session::validation_records;

/// `0.05, 0.10, …, 1.00`.
pub fn default_sigma_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub sigma: f64,
    /// `(σ, summed validation log-likelihood)` for each grid value, in grid order.
    pub scores: Vec<(f64, f64)>,
}

/// Picks the noise level whose posteriors best predict held-out answers.
///
/// `training[i]` and `validation[i]` belong to the same user. For each `σ`
/// the posterior is fitted on each user's training records under `σ` and the
/// validation log-likelihoods under the same `σ` are summed. All grid values
/// reuse one sampler seed per user. Ties go to the smaller `σ`.
pub fn calibrate_sigma(
    training: &[Vec<FeedbackRecord>],
    validation: &[Vec<FeedbackRecord>],
    grid: &[f64],
    set: Arc<TrajectorySet>,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<CalibrationResult> {
    if grid.is_empty() {
        return Err(Error::invalid("sigma grid is empty"));
    }
    if training.is_empty() || training.len() != validation.len() {
        return Err(Error::invalid(
            "need one training and one validation dataset per user",
        ));
    }
    if validation.iter().any(Vec::is_empty) {
        return Err(Error::invalid("every user needs validation records"));
    }
    if let Some(s) = grid.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::invalid(format!("sigma grid values must be positive, got {s}")));
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &sigma in grid {
        let mut total = 0.0;
        for (u, (train, val)) in training.iter().zip(validation).enumerate() {
            let mut rng = rng_for(seed, &[u as u64]);
            let belief = sample_posterior_with(train, sigma, Arc::clone(&set), sampler, &mut rng)?;
            total += belief.validation_log_likelihood(val)?;
        }
        scores.push((sigma, total));
    }
    let mut best = scores[0];
    for &(s, v) in &scores[1..] {
        if v > best.1 || (v == best.1 && s < best.0) {
            best = (s, v);
        }
    }
    Ok(CalibrationResult {
        sigma: best.0,
        scores,
    })
}

/// Simulated pilot data for one user: random training queries on the scale
/// and on the soft-choice slider, plus held-out random scale queries.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotUser {
    pub user: SimulatedUser,
    pub training: Vec<FeedbackRecord>,
    pub validation: Vec<FeedbackRecord>,
}

/// Draws `n_users` pilot users with `α* ~ U[0.25, 1]` and answers
/// `n_scale + n_choice` training and `n_val` validation queries each.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pilot<R: Rng + ?Sized>(
    set: &TrajectorySet,
    n_users: usize,
    sigma_true: f64,
    epsilon: f64,
    n_scale: usize,
    n_choice: usize,
    n_val: usize,
    rng: &mut R,
) -> Result<Vec<PilotUser>> {
    (0..n_users)
        .map(|_| {
            let alpha = 0.25 + 0.75 * rng.random::<f64>();
            let user = SimulatedUser::random(set.dimension(), alpha, sigma_true, epsilon, rng)?;
            let chooser = SimulatedUser {
                epsilon: 1.0,
                ..user.clone()
            };
            let mut training = validation_records(&user, set, n_scale, rng)?;
            training.extend(validation_records(&chooser, set, n_choice, rng)?);
            let validation = validation_records(&user, set, n_val, rng)?;
            Ok(PilotUser {
                user,
                training,
                validation,
            })
        })
        .collect()
}
