use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Metric};
use super::output::{emit_plot_data, write_raw_csv};
use super::session::{run_session, validation_records, SessionHistory, SessionOptions};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::trajectory::TrajectorySet;
use crate::user::{random_unit, SimulatedUser};

// stream tags for derived seeds
const USER_STREAM: u64 = 0;
const VALIDATION_STREAM: u64 = 1;
const SESSION_STREAM: u64 = 2;

/// Per-iteration mean and sample standard deviation of one metric over the
/// runs of one arm. Index 0 is the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCurve {
    pub policy: String,
    pub metric: Metric,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub n: usize,
}

impl MetricCurve {
    /// Aggregates equally long per-run curves.
    pub fn from_runs(policy: impl Into<String>, metric: Metric, runs: &[Vec<f64>]) -> Result<Self> {
        let len = runs
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("no runs to aggregate"))?;
        if runs.iter().any(|r| r.len() != len) {
            return Err(Error::invalid("runs differ in length"));
        }
        let (mut mean, mut sd) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for k in 0..len {
            let column: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            let (m, s) = mean_sd(&column);
            mean.push(m);
            sd.push(s);
        }
        Ok(MetricCurve {
            policy: policy.into(),
            metric,
            mean,
            sd,
            n: runs.len(),
        })
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Count, mean, and sample standard deviation of paired differences `a − b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

pub fn paired_differences(a: &[f64], b: &[f64]) -> Result<PairedSummary> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::invalid("paired samples must be non-empty and equally long"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean, sd) = mean_sd(&diffs);
    Ok(PairedSummary {
        n: diffs.len(),
        mean,
        sd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub user: usize,
    pub alpha: f64,
    pub arm: usize,
    pub history: SessionHistory,
}

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub curves: Vec<MetricCurve>,
    /// Ordered by user, then α, then arm.
    pub runs: Vec<RunRecord>,
    pub arms: Vec<String>,
    pub metrics: Vec<Metric>,
}

impl BenchmarkResult {
    pub fn curve(&self, arm: &str, metric: Metric) -> Option<&MetricCurve> {
        self.curves.iter().find(|c| c.policy == arm && c.metric == metric)
    }

    /// Per-run values of `metric` at `iteration` for one arm, in (user, α)
    /// order so that two arms line up pairwise.
    pub fn values_at(&self, arm: &str, metric: Metric, iteration: usize) -> Vec<f64> {
        let idx = self.arms.iter().position(|a| a == arm);
        self.runs
            .iter()
            .filter(|r| Some(r.arm) == idx)
            .filter_map(|r| r.history.iterations.get(iteration)?.metrics.get(metric))
            .collect()
    }

    pub fn final_values(&self, arm: &str, metric: Metric) -> Vec<f64> {
        let k = self.runs.first().map_or(0, |r| r.history.iterations.len() - 1);
        self.values_at(arm, metric, k)
    }
}

/// Users for a campaign: weights drawn on the unit sphere from per-user seeds.
pub fn campaign_users(config: &ExperimentConfig, dimension: usize) -> Vec<Vec<SimulatedUser>> {
    (0..config.n_users)
        .map(|u| {
            let w = random_unit(dimension, &mut rng_for(config.seed, &[USER_STREAM, u as u64]));
            config
                .alpha_grid
                .iter()
                .map(|&a| {
                    SimulatedUser::new(w.clone(), a, config.sigma_true, config.epsilon)
                        .expect("validated config")
                })
                .collect()
        })
        .collect()
}

/// Runs every (user, α, arm) session of `config`, aggregates metric curves,
/// and writes CSV files when `output_dir` is set.
///
/// Every arm sees the same users, validation queries, and session seed for a
/// given (user, α), so arms can be compared pairwise.
pub fn run_benchmark(config: &ExperimentConfig) -> Result<BenchmarkResult> {
    config.validate()?;
    let set = Arc::new(config.environment.build()?);
    run_benchmark_on(config, set)
}

/// As [`run_benchmark`] with a prebuilt trajectory set.
pub fn run_benchmark_on(config: &ExperimentConfig, set: Arc<TrajectorySet>) -> Result<BenchmarkResult> {
    config.validate()?;
    let users = campaign_users(config, set.dimension());
    let n_alpha = config.alpha_grid.len();
    let n_arms = config.policies.len();
    let sampler = config.sampler_config();

    let mut validation = Vec::with_capacity(config.n_users * n_alpha);
    for (u, per_alpha) in users.iter().enumerate() {
        for (a, user) in per_alpha.iter().enumerate() {
            let v = if config.metrics.contains(&Metric::LogLikelihood) {
                let mut rng = rng_for(config.seed, &[VALIDATION_STREAM, u as u64, a as u64]);
                validation_records(user, &set, config.validation_queries, &mut rng)?
            } else {
                Vec::new()
            };
            validation.push(v);
        }
    }

    let jobs = config.n_users * n_alpha * n_arms;
    let run_job = |j: usize| -> Result<RunRecord> {
        let arm = j % n_arms;
        let a = (j / n_arms) % n_alpha;
        let u = j / (n_arms * n_alpha);
        let spec = &config.policies[arm];
        let options = SessionOptions {
            k: config.k,
            sigma_assumed: config.sigma_assumed(),
            sampler: sampler.clone(),
            metrics: config.metrics.clone(),
            validation: validation[u * n_alpha + a].clone(),
        };
        let mut rng = rng_for(
            config.seed,
            &[SESSION_STREAM, u as u64, a as u64, spec.policy.seed],
        );
        let history = run_session(&users[u][a], spec, Arc::clone(&set), &options, &mut rng)?;
        Ok(RunRecord {
            user: u,
            alpha: config.alpha_grid[a],
            arm,
            history,
        })
    };
    let runs = run_parallel(jobs, config.threads, run_job)?;

    let arms: Vec<String> = config.policies.iter().map(|p| p.label()).collect();
    let mut metrics = config.metrics.clone();
    metrics.sort();
    metrics.dedup();
    let mut curves = Vec::new();
    for &metric in &metrics {
        for (i, label) in arms.iter().enumerate() {
            let per_run: Vec<Vec<f64>> = runs
                .iter()
                .filter(|r| r.arm == i)
                .map(|r| r.history.curve(metric).expect("metric recorded"))
                .collect();
            curves.push(MetricCurve::from_runs(label.clone(), metric, &per_run)?);
        }
    }
    let result = BenchmarkResult {
        curves,
        runs,
        arms,
        metrics,
    };
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        emit_plot_data(&result.curves, dir)?;
        write_raw_csv(&result, dir.join("raw.csv"))?;
    }
    Ok(result)
}

/// Runs `jobs` independent jobs on up to `threads` workers (0 = one per
/// core) and returns their results in job order.
fn run_parallel<T: Send>(
    jobs: usize,
    threads: usize,
    job: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let threads = if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
    .min(jobs.max(1));
    if threads <= 1 {
        return (0..jobs).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                if j >= jobs {
                    break;
                }
                let out = job(j);
                slots.lock().expect("no worker panicked")[j] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|s| s.expect("every job ran"))
        .collect()
}
