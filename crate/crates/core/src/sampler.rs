//! Random-walk Metropolis sampling of the joint posterior over `(w, α)`.
//!
//! `w` moves by a Gaussian step in the tangent plane followed by
//! renormalization onto the unit sphere; `α` takes a Gaussian step reflected
//! into `[α_min, 1]`. Both proposals are symmetric, so acceptance uses the
//! plain likelihood ratio under the flat prior. The step scale adapts during
//! burn-in and is frozen afterwards.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Hypothesis};
use crate::error::{Error, Result};
use crate::likelihood::{CompiledData, ALPHA_MIN};
use crate::trajectory::{dot, TrajectorySet, WeightVector};
use crate::user::{random_unit, FeedbackRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Number of samples `M` in the returned belief.
    pub samples: usize,
    /// Independent chains; samples are split evenly between them.
    pub chains: usize,
    /// Total burn-in proposals as a multiple of `samples`.
    pub burn_in_factor: usize,
    /// Proposals between retained samples.
    pub thin: usize,
    pub w_step: f64,
    pub alpha_step: f64,
    /// Prior draws scored to pick each chain's starting point.
    pub init_draws: usize,
    /// Tune the step scale towards `target_acceptance` during burn-in.
    pub adapt: bool,
    pub target_acceptance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 100,
            chains: 4,
            burn_in_factor: 20,
            thin: 10,
            w_step: 0.15,
            alpha_step: 0.1,
            init_draws: 64,
            adapt: true,
            target_acceptance: 0.3,
        }
    }
}

impl SamplerConfig {
    pub fn with_samples(mut self, m: usize) -> Self {
        self.samples = m;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("sample count M must be at least 1"));
        }
        if self.chains == 0 || self.thin == 0 {
            return Err(Error::invalid("chains and thinning must be at least 1"));
        }
        if !(self.w_step > 0.0 && self.alpha_step > 0.0) {
            return Err(Error::invalid("proposal steps must be positive"));
        }
        Ok(())
    }
}

/// Draws `(w, α)` from the prior: uniform sphere times uniform `[α_min, 1]`.
pub fn prior_draw<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Hypothesis {
    Hypothesis {
        w: random_unit(d, rng),
        alpha: ALPHA_MIN + (1.0 - ALPHA_MIN) * rng.random::<f64>(),
    }
}

/// Samples the posterior with `m` samples and otherwise default settings.
pub fn sample_posterior<R: Rng + ?Sized>(
    dataset: &[FeedbackRecord],
    sigma: f64,
    set: Arc<TrajectorySet>,
    m: usize,
    rng: &mut R,
) -> Result<Belief> {
    sample_posterior_with(
        dataset,
        sigma,
        set,
        &SamplerConfig::default().with_samples(m),
        rng,
    )
}

/// Samples the posterior given `dataset`. With no data this returns prior
/// draws. Convergence is not diagnosed.
pub fn sample_posterior_with<R: Rng + ?Sized>(
    dataset: &[FeedbackRecord],
    sigma: f64,
    set: Arc<TrajectorySet>,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<Belief> {
    config.validate()?;
    let d = set.dimension();
    let data = CompiledData::new(dataset, sigma, &set)?;
    if data.len() == 0 {
        let samples = (0..config.samples).map(|_| prior_draw(d, rng)).collect();
        return Belief::uniform(samples, dataset.to_vec(), sigma, set);
    }

    let chains = config.chains.min(config.samples);
    let burn_in = (config.burn_in_factor * config.samples).div_ceil(chains);
    let mut samples = Vec::with_capacity(config.samples);
    for c in 0..chains {
        // spread the remainder over the first chains
        let keep = config.samples / chains + usize::from(c < config.samples % chains);
        run_chain(&data, config, burn_in, keep, rng, &mut samples);
    }
    Belief::uniform(samples, dataset.to_vec(), sigma, set)
}

fn run_chain<R: Rng + ?Sized>(
    data: &CompiledData<'_>,
    config: &SamplerConfig,
    burn_in: usize,
    keep: usize,
    rng: &mut R,
    out: &mut Vec<Hypothesis>,
) {
    let d = data.set().dimension();
    let mut rewards = Vec::with_capacity(data.set().len());

    let mut w = Vec::new();
    let mut alpha = 0.0;
    let mut ll = f64::NEG_INFINITY;
    for _ in 0..config.init_draws.max(1) {
        let h = prior_draw(d, rng);
        let l = data.log_likelihood(h.w.as_slice(), h.alpha, &mut rewards);
        if l > ll || w.is_empty() {
            ll = l;
            w = h.w.into_inner();
            alpha = h.alpha;
        }
    }

    let mut scale = 1.0f64;
    let mut proposal = vec![0.0; d];
    let mut noise = vec![0.0; d];
    let total = burn_in + keep * config.thin;
    for t in 0..total {
        let step = scale * config.w_step;
        noise.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
        let along = dot(&noise, &w);
        for i in 0..d {
            proposal[i] = w[i] + step * (noise[i] - along * w[i]);
        }
        let norm = dot(&proposal, &proposal).sqrt();
        proposal.iter_mut().for_each(|x| *x /= norm);
        let z: f64 = rng.sample(StandardNormal);
        let alpha_new = reflect(alpha + scale * config.alpha_step * z, ALPHA_MIN, 1.0);

        let ll_new = data.log_likelihood(&proposal, alpha_new, &mut rewards);
        let log_ratio = ll_new - ll;
        let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
        if accept {
            std::mem::swap(&mut w, &mut proposal);
            alpha = alpha_new;
            ll = ll_new;
        }
        if t < burn_in {
            if config.adapt {
                let rate = 0.05;
                let hit = if accept { 1.0 } else { 0.0 };
                scale = (scale * (rate * (hit - config.target_acceptance)).exp()).clamp(1e-3, 20.0);
            }
        } else if (t - burn_in + 1) % config.thin == 0 {
            out.push(Hypothesis {
                w: WeightVector::from_unit_unchecked(w.clone()),
                alpha,
            });
        }
    }
}

/// Folds `x` back into `[lo, hi]` by mirroring at the bounds.
fn reflect(x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let mut y = (x - lo).rem_euclid(2.0 * width);
    if y > width {
        y = 2.0 * width - y;
    }
    lo + y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reflection_stays_in_range() {
        assert!((reflect(1.1, 0.05, 1.0) - 0.9).abs() < 1e-12);
        assert!((reflect(0.0, 0.05, 1.0) - 0.1).abs() < 1e-12);
        assert!((reflect(0.5, 0.05, 1.0) - 0.5).abs() < 1e-12);
        for x in [-5.0, -0.3, 2.7, 13.0] {
            let y = reflect(x, 0.05, 1.0);
            assert!((0.05..=1.0).contains(&y));
        }
    }

    #[test]
    fn zero_samples_is_rejected() {
        let set = Arc::new(crate::env::fetch_env(10, &mut ChaCha8Rng::seed_from_u64(0)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_posterior(&[], 0.3, set, 0, &mut rng).is_err());
    }
}
