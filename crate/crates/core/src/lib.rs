//! Active reward learning from slider feedback.
//!
//! A user compares two trajectories and answers on a slider in `[-1, 1]`
//! instead of making a hard choice. This crate models such answers, keeps a
//! sampled posterior over linear reward weights and the user's saturation
//! level, picks informative queries, and runs simulated campaigns comparing
//! slider answers against three-way soft choices. A small HTTP service
//! exposes the same loop to people.
//!
//! Module map:
//!
//! - [`trajectory`]: trajectories, reward, regret, and performance measures
//! - [`slider`]: slider grids, rounding, bucket probabilities
//! - [`user`]: simulated noiseless and noisy users
//! - [`likelihood`]: observation model and feasibility checks
//! - [`belief`], [`sampler`]: sampled posterior and its MCMC sampler
//! - [`queries`]: random, information-gain, and max-regret query selection
//! - [`env`]: synthetic and drink-serving trajectory sets
//! - [`experiment`]: simulation campaigns, σ calibration, CSV output
//! - [`service`]: session store and HTTP API for live elicitation

pub mod belief;
pub mod dataset;
pub mod env;
pub mod error;
pub mod experiment;
pub mod likelihood;
pub mod queries;
pub mod rng;
pub mod sampler;
pub mod service;
pub mod slider;
pub mod trajectory;
pub mod user;

pub use belief::{Belief, BeliefSnapshot, Hypothesis, Measure, PosteriorEstimate};
pub use error::{Error, Result};
pub use queries::{PolicyKind, QueryPolicy};
pub use sampler::{sample_posterior, sample_posterior_with, SamplerConfig};
pub use slider::{round_to_grid, SliderGrid};
pub use trajectory::{
    alignment, best_trajectory, regret, relative_reward, reward, reward_gap, Query, Trajectory,
    TrajectorySet, WeightVector,
};
pub use user::{noiseless_response, noisy_response, FeedbackRecord, SimulatedUser};
