//! Simulated users answering queries on a slider.
//!
//! A noiseless user maps the reward difference of a query linearly onto
//! `[-1, 1]`, saturating once the difference reaches `α*` times the largest
//! reward gap in the set. The probabilistic user adds Gaussian noise and
//! snaps the result to the slider grid.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::slider::SliderGrid;
use crate::trajectory::{Query, TrajectorySet, WeightVector};

/// Reward gaps at or below this are treated as zero.
pub(crate) const GAP_EPS: f64 = 1e-12;

/// One answered query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    #[serde(flatten)]
    pub query: Query,
    pub mu: f64,
    /// Slider step the answer was given on.
    pub epsilon: f64,
}

impl FeedbackRecord {
    pub fn new(query: Query, mu: f64, epsilon: f64) -> Self {
        FeedbackRecord { query, mu, epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedUser {
    pub w_star: WeightVector,
    pub alpha_star: f64,
    /// Standard deviation of the slider noise.
    pub sigma: f64,
    pub epsilon: f64,
}

impl SimulatedUser {
    pub fn new(w_star: WeightVector, alpha_star: f64, sigma: f64, epsilon: f64) -> Result<Self> {
        if !(alpha_star > 0.0 && alpha_star <= 1.0) {
            return Err(Error::invalid(format!("alpha* must lie in (0, 1], got {alpha_star}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma must be non-negative, got {sigma}")));
        }
        SliderGrid::new(epsilon)?;
        let w_star = WeightVector::unit(w_star.into_inner())
            .map_err(|_| Error::invalid("user weights must be non-zero"))?;
        Ok(SimulatedUser {
            w_star,
            alpha_star,
            sigma,
            epsilon,
        })
    }

    /// Draws a user with weights uniform on the unit sphere.
    pub fn random<R: Rng + ?Sized>(
        dimension: usize,
        alpha_star: f64,
        sigma: f64,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Self> {
        SimulatedUser::new(random_unit(dimension, rng), alpha_star, sigma, epsilon)
    }

    /// Caches the user's rewards over `set` for repeated answering.
    pub fn prepare<'a>(&'a self, set: &'a TrajectorySet) -> Result<PreparedUser<'a>> {
        set.check_dim(self.w_star.as_slice())?;
        let rewards = set.rewards(self.w_star.as_slice());
        let gap = TrajectorySet::spread(&rewards);
        if gap <= GAP_EPS {
            return Err(Error::DegenerateEnvironment);
        }
        Ok(PreparedUser {
            user: self,
            rewards,
            gap,
            grid: SliderGrid::new(self.epsilon)?,
        })
    }
}

/// A user bound to one trajectory set.
#[derive(Debug, Clone)]
pub struct PreparedUser<'a> {
    user: &'a SimulatedUser,
    rewards: Vec<f64>,
    gap: f64,
    grid: SliderGrid,
}

impl PreparedUser<'_> {
    pub fn max_reward_gap(&self) -> f64 {
        self.gap
    }

    pub fn noiseless_at(&self, p: usize, q: usize) -> f64 {
        let diff = self.rewards[p] - self.rewards[q];
        (diff / (self.user.alpha_star * self.gap)).clamp(-1.0, 1.0)
    }

    pub fn noisy_at<R: Rng + ?Sized>(&self, p: usize, q: usize, rng: &mut R) -> f64 {
        let psi = self.noiseless_at(p, q);
        let nu = if self.user.sigma > 0.0 {
            self.user.sigma * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        self.grid.round(psi + nu)
    }

    /// Answers `query` and packages the result as a record.
    pub fn answer<R: Rng + ?Sized>(
        &self,
        set: &TrajectorySet,
        query: &Query,
        rng: &mut R,
    ) -> Result<FeedbackRecord> {
        let (p, q) = set.resolve(query)?;
        Ok(FeedbackRecord::new(
            query.clone(),
            self.noisy_at(p, q, rng),
            self.user.epsilon,
        ))
    }
}

/// The noiseless slider position `ψ` for `query`.
pub fn noiseless_response(user: &SimulatedUser, query: &Query, set: &TrajectorySet) -> Result<f64> {
    let prepared = user.prepare(set)?;
    let (p, q) = set.resolve(query)?;
    Ok(prepared.noiseless_at(p, q))
}

/// A noisy slider answer `μ = round(ψ + ν, ε)` with `ν ~ N(0, σ²)`.
pub fn noisy_response<R: Rng + ?Sized>(
    user: &SimulatedUser,
    query: &Query,
    set: &TrajectorySet,
    rng: &mut R,
) -> Result<f64> {
    let prepared = user.prepare(set)?;
    let (p, q) = set.resolve(query)?;
    Ok(prepared.noisy_at(p, q, rng))
}

/// Uniform draw from the unit sphere in `d` dimensions.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> WeightVector {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return WeightVector::from_unit_unchecked(v.into_iter().map(|x| x / n).collect());
        }
    }
}
