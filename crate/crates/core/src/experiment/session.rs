use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ArmSpec, Metric, MetricValues};
use crate::belief::{Belief, Measure, PosteriorEstimate};
use crate::error::{Error, Result};
use crate::queries::random_query;
use crate::sampler::{sample_posterior_with, SamplerConfig};
use crate::trajectory::{alignment, relative_reward, TrajectorySet};
use crate::user::{FeedbackRecord, SimulatedUser};

/// Everything a session needs besides the user, arm, set, and randomness.
#[derive(Debug, Clone)]
pub struct SessionOptions {
    /// Queries asked, `K`.
    pub k: usize,
    pub sigma_assumed: f64,
    pub sampler: SamplerConfig,
    pub metrics: Vec<Metric>,
    /// Held-out answers scored by [`Metric::LogLikelihood`].
    pub validation: Vec<FeedbackRecord>,
}

impl SessionOptions {
    pub fn new(k: usize, sigma_assumed: f64, m: usize) -> Self {
        SessionOptions {
            k,
            sigma_assumed,
            sampler: SamplerConfig::default().with_samples(m),
            metrics: vec![Metric::Alignment],
            validation: Vec::new(),
        }
    }

    pub fn with_metrics(mut self, metrics: &[Metric]) -> Self {
        self.metrics = metrics.to_vec();
        self
    }

    pub fn with_validation(mut self, validation: Vec<FeedbackRecord>) -> Self {
        self.validation = validation;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 for the prior, then one per answered query.
    pub iteration: usize,
    pub record: Option<FeedbackRecord>,
    pub estimate: PosteriorEstimate,
    pub metrics: MetricValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHistory {
    pub arm: String,
    pub iterations: Vec<IterationRecord>,
}

impl SessionHistory {
    pub fn records(&self) -> impl Iterator<Item = &FeedbackRecord> {
        self.iterations.iter().filter_map(|it| it.record.as_ref())
    }

    /// Values of `metric` for iterations `0..=K`, if it was recorded.
    pub fn curve(&self, metric: Metric) -> Option<Vec<f64>> {
        self.iterations.iter().map(|it| it.metrics.get(metric)).collect()
    }

    pub fn final_estimate(&self) -> &PosteriorEstimate {
        &self.iterations.last().expect("history holds the prior").estimate
    }
}

/// Runs `K` rounds of query, answer, and posterior rebuild.
///
/// Soft-choice arms answer on, and model, a slider of step 1 regardless of
/// the user's configured step. `rng` seeds three independent streams (query
/// selection, sampling, answer noise) so arms fed the same seed see the same
/// randomness wherever their choices coincide.
pub fn run_session<R: Rng + ?Sized>(
    user: &SimulatedUser,
    arm: &ArmSpec,
    set: Arc<TrajectorySet>,
    options: &SessionOptions,
    rng: &mut R,
) -> Result<SessionHistory> {
    arm.policy.validate()?;
    let epsilon = arm.feedback.epsilon(user.epsilon);
    let user = SimulatedUser {
        epsilon,
        ..user.clone()
    };
    let answers = user.prepare(&set)?;
    if options.metrics.contains(&Metric::LogLikelihood) && options.validation.is_empty() {
        return Err(Error::invalid("log_likelihood metric needs validation records"));
    }

    let mut policy_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut sampler_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut answer_rng = ChaCha8Rng::seed_from_u64(rng.random());

    let mut dataset: Vec<FeedbackRecord> = Vec::with_capacity(options.k);
    let mut belief = sample_posterior_with(
        &dataset,
        options.sigma_assumed,
        Arc::clone(&set),
        &options.sampler,
        &mut sampler_rng,
    )?;
    let mut iterations = Vec::with_capacity(options.k + 1);
    iterations.push(measure(0, None, &belief, &user, options)?);

    for k in 1..=options.k {
        let query = arm.policy.select(&belief, epsilon, &mut policy_rng)?;
        let record = answers.answer(&set, &query, &mut answer_rng)?;
        dataset.push(record.clone());
        belief = sample_posterior_with(
            &dataset,
            options.sigma_assumed,
            Arc::clone(&set),
            &options.sampler,
            &mut sampler_rng,
        )?;
        iterations.push(measure(k, Some(record), &belief, &user, options)?);
    }
    Ok(SessionHistory {
        arm: arm.label(),
        iterations,
    })
}

fn measure(
    iteration: usize,
    record: Option<FeedbackRecord>,
    belief: &Belief,
    user: &SimulatedUser,
    options: &SessionOptions,
) -> Result<IterationRecord> {
    let estimate = belief.mean_weight()?;
    let mut metrics = MetricValues::default();
    for &m in &options.metrics {
        let v = match m {
            Metric::Alignment => alignment(&estimate.w_hat, &user.w_star)?,
            Metric::RelativeReward => relative_reward(&estimate.w_hat, &user.w_star, belief.set())?,
            Metric::LogLikelihood => belief.validation_log_likelihood(&options.validation)?,
            Metric::WorstCaseError => belief.worst_case_error(&user.w_star, Measure::Alignment)?,
        };
        metrics.set(m, v);
    }
    Ok(IterationRecord {
        iteration,
        record,
        estimate,
        metrics,
    })
}

/// `n` random queries on `set` answered by `user`, for held-out scoring.
pub fn validation_records<R: Rng + ?Sized>(
    user: &SimulatedUser,
    set: &TrajectorySet,
    n: usize,
    rng: &mut R,
) -> Result<Vec<FeedbackRecord>> {
    let answers = user.prepare(set)?;
    (0..n)
        .map(|_| {
            let q = random_query(set, rng)?;
            answers.answer(set, &q, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fetch_env;
    use crate::experiment::config::FeedbackKind;
    use crate::queries::{PolicyKind, QueryPolicy};

    fn setup() -> (Arc<TrajectorySet>, SimulatedUser) {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let set = Arc::new(fetch_env(30, &mut rng).unwrap());
        let user = SimulatedUser::random(8, 0.5, 0.1, 0.1, &mut rng).unwrap();
        (set, user)
    }

    #[test]
    fn zero_rounds_hold_only_the_prior() {
        let (set, user) = setup();
        let arm = ArmSpec::new(FeedbackKind::Scale, QueryPolicy::new(PolicyKind::Random));
        let h = run_session(&user, &arm, set, &SessionOptions::new(0, 0.1, 20), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(h.iterations.len(), 1);
        assert!(h.iterations[0].record.is_none());
    }

    #[test]
    fn same_seed_same_history() {
        let (set, user) = setup();
        let arm = ArmSpec::new(
            FeedbackKind::Scale,
            QueryPolicy::new(PolicyKind::InfoGain).with_budget(40),
        );
        let opts = SessionOptions::new(3, 0.1, 20).with_metrics(&Metric::ALL).with_validation(
            validation_records(&user, &set, 5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap(),
        );
        let a = run_session(&user, &arm, Arc::clone(&set), &opts, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = run_session(&user, &arm, set, &opts, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations.len(), 4);
        assert_eq!(a.records().count(), 3);
        assert!(a.curve(Metric::LogLikelihood).is_some());
    }

    #[test]
    fn soft_choice_answers_on_unit_step() {
        let (set, user) = setup();
        let arm = ArmSpec::new(FeedbackKind::SoftChoice, QueryPolicy::new(PolicyKind::Random));
        let h = run_session(&user, &arm, set, &SessionOptions::new(5, 0.1, 10), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for r in h.records() {
            assert_eq!(r.epsilon, 1.0);
            assert!([-1.0, 0.0, 1.0].contains(&r.mu));
        }
    }
}
