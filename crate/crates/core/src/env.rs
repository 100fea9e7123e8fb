//! Trajectory-set construction: synthetic feature environments, the
//! drink-serving robot lattice, and sets loaded from disk.

use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, TrajectorySet};

/// Dimension of the drink-serving features.
pub const FETCH_DIMENSION: usize = 8;

pub const FETCH_FEATURES: [&str; FETCH_DIMENSION] = [
    "speed",
    "max_height",
    "drink_orange_juice",
    "drink_water",
    "drink_milk",
    "pan_orientation",
    "over_pan",
    "hits_pan",
];

const FETCH_RULE: &str = "fetch lattice: speed,height in {0,1/3,2/3,1}; drink one-hot \
(orange juice, water, milk); pan orientation in {0,1}; over_pan 0=behind 1=over; \
hits_pan may be 1 only when over_pan is 1";

/// Default ratio between the smallest and largest synthetic feature scale.
pub const DEFAULT_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Synthetic,
    Fetch,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    pub kind: EnvironmentKind,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default = "default_n")]
    pub n_trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    /// Smallest over largest feature scale (synthetic only).
    #[serde(default)]
    pub spread: Option<f64>,
    #[serde(default)]
    pub path: Option<String>,
}

fn default_dimension() -> usize {
    10
}

fn default_n() -> usize {
    200
}

impl EnvironmentSpec {
    pub fn synthetic(dimension: usize, n: usize, seed: u64) -> Self {
        EnvironmentSpec {
            kind: EnvironmentKind::Synthetic,
            dimension,
            n_trajectories: n,
            seed,
            spread: None,
            path: None,
        }
    }

    pub fn fetch(n: usize, seed: u64) -> Self {
        EnvironmentSpec {
            kind: EnvironmentKind::Fetch,
            dimension: FETCH_DIMENSION,
            n_trajectories: n,
            seed,
            spread: None,
            path: None,
        }
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.spread = Some(spread);
        self
    }

    pub fn build(&self) -> Result<TrajectorySet> {
        if self.n_trajectories < 2 && self.kind != EnvironmentKind::File {
            return Err(Error::invalid("an environment needs at least 2 trajectories"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        match self.kind {
            EnvironmentKind::Synthetic => synthetic_env_with(
                self.dimension,
                self.n_trajectories,
                self.spread.unwrap_or(DEFAULT_SPREAD),
                &mut rng,
            ),
            EnvironmentKind::Fetch => fetch_env(self.n_trajectories, &mut rng),
            EnvironmentKind::File => {
                let path = self
                    .path
                    .as_deref()
                    .ok_or_else(|| Error::invalid("file environment needs a path"))?;
                load_trajset(path)
            }
        }
    }
}

/// `n` trajectories with independent Gaussian features whose scales fall
/// geometrically from 1 to [`DEFAULT_SPREAD`], rescaled so the largest
/// feature vector has unit norm.
pub fn synthetic_env<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<TrajectorySet> {
    synthetic_env_with(d, n, DEFAULT_SPREAD, rng)
}

/// As [`synthetic_env`] with feature `j` scaled by `spread^(j/(d-1))`.
/// Weights on the small-scale features barely move rewards, so they are
/// hard to learn; `spread = 1` gives an isotropic set.
pub fn synthetic_env_with<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    spread: f64,
    rng: &mut R,
) -> Result<TrajectorySet> {
    if d < 2 {
        return Err(Error::invalid("synthetic environments need dimension ≥ 2"));
    }
    if n < 2 {
        return Err(Error::invalid("an environment needs at least 2 trajectories"));
    }
    if !(spread > 0.0 && spread <= 1.0) {
        return Err(Error::invalid(format!("spread must lie in (0, 1], got {spread}")));
    }
    let scales: Vec<f64> = (0..d)
        .map(|j| spread.powf(j as f64 / (d - 1) as f64))
        .collect();
    let width = digits(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            scales
                .iter()
                .map(|s| s * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let largest = rows
        .iter()
        .map(|f| f.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let items = rows
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            let f = f.into_iter().map(|x| x / largest).collect();
            Trajectory::new(format!("s{i:0width$}"), f)
        })
        .collect();
    Ok(TrajectorySet::new(d, items)?.with_note(format!(
        "synthetic: {n} Gaussian feature vectors in {d} dimensions, scales 1 down to {spread}, largest norm 1"
    )))
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

/// Every valid drink-serving combination, in lattice order.
pub fn fetch_lattice() -> Vec<Trajectory> {
    let levels = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    let drinks = ["orange juice", "water", "milk"];
    let mut out = Vec::new();
    for (si, &speed) in levels.iter().enumerate() {
        for (hi, &height) in levels.iter().enumerate() {
            for (di, drink) in drinks.iter().enumerate() {
                for orient in [0.0, 1.0] {
                    for (over, hit) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)] {
                        let mut f = vec![speed, height, 0.0, 0.0, 0.0, orient, over, hit];
                        f[2 + di] = 1.0;
                        let label = format!(
                            "{drink}, speed {si}/3, height {hi}/3, pan {}, {} the pan{}",
                            if orient == 0.0 { "handle left" } else { "handle right" },
                            if over == 0.0 { "behind" } else { "over" },
                            if hit == 1.0 { ", hits the pan" } else { "" },
                        );
                        let id = format!("f{:03}", out.len());
                        out.push(Trajectory::new(id, f).with_label(label));
                    }
                }
            }
        }
    }
    out
}

/// `n` distinct drink-serving trajectories drawn without replacement.
pub fn fetch_env<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TrajectorySet> {
    let lattice = fetch_lattice();
    if n > lattice.len() {
        return Err(Error::invalid(format!(
            "requested {n} trajectories but only {} valid combinations exist",
            lattice.len()
        )));
    }
    if n < 2 {
        return Err(Error::invalid("an environment needs at least 2 trajectories"));
    }
    let mut picks = index::sample(rng, lattice.len(), n).into_vec();
    picks.sort_unstable();
    let items = picks.into_iter().map(|i| lattice[i].clone()).collect();
    Ok(TrajectorySet::new(FETCH_DIMENSION, items)?.with_note(FETCH_RULE))
}

pub fn load_trajset(path: impl AsRef<Path>) -> Result<TrajectorySet> {
    TrajectorySet::load(path)
}

pub fn save_trajset(set: &TrajectorySet, path: impl AsRef<Path>) -> Result<()> {
    set.save(path)
}
