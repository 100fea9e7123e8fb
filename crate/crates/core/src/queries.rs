//! Query selection: random pairs, greedy information gain, and max regret.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Hypothesis};
use crate::error::{Error, Result};
use crate::likelihood::model_psi;
use crate::slider::SliderGrid;
use crate::trajectory::{Query, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Random,
    InfoGain,
    MaxRegret,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::InfoGain => "info_gain",
            PolicyKind::MaxRegret => "max_regret",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "info_gain" => Ok(PolicyKind::InfoGain),
            "max_regret" => Ok(PolicyKind::MaxRegret),
            other => Err(Error::invalid(format!("unknown policy kind {other}"))),
        }
    }
}

pub const DEFAULT_CANDIDATE_BUDGET: usize = 2000;

/// How the next query is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryPolicy {
    pub kind: PolicyKind,
    /// Candidate pairs scored per round.
    #[serde(default = "default_budget")]
    pub candidate_budget: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> usize {
    DEFAULT_CANDIDATE_BUDGET
}

impl QueryPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        QueryPolicy {
            kind,
            candidate_budget: DEFAULT_CANDIDATE_BUDGET,
            seed: 0,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.candidate_budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.candidate_budget == 0 {
            return Err(Error::invalid("candidate_budget must be at least 1"));
        }
        Ok(())
    }

    /// Picks the next query for `belief` on a slider of step `epsilon`.
    pub fn select<R: Rng + ?Sized>(&self, belief: &Belief, epsilon: f64, rng: &mut R) -> Result<Query> {
        self.validate()?;
        match self.kind {
            PolicyKind::Random => random_query(belief.set(), rng),
            PolicyKind::InfoGain => select_info_gain(belief, self.candidate_budget, epsilon, rng),
            PolicyKind::MaxRegret => select_max_regret(belief, self.candidate_budget, rng),
        }
    }
}

/// A uniformly random ordered pair of distinct trajectories.
pub fn random_query<R: Rng + ?Sized>(set: &TrajectorySet, rng: &mut R) -> Result<Query> {
    let (p, q) = random_pair(set.len(), rng)?;
    Ok(set.query(p, q))
}

fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::invalid("need at least two items to form a pair"));
    }
    let p = rng.random_range(0..n);
    let mut q = rng.random_range(0..n - 1);
    if q >= p {
        q += 1;
    }
    Ok((p, q))
}

/// Ordered pairs `(i, j)`, `i ≠ j`, over `n` items: all of them when they fit
/// in `budget`, otherwise `budget` distinct pairs drawn at random.
fn candidate_pairs<R: Rng + ?Sized>(n: usize, budget: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let total = n.saturating_mul(n.saturating_sub(1));
    if total == 0 {
        return Err(Error::invalid("need at least two items to form a pair"));
    }
    if total <= budget {
        return Ok((0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect());
    }
    let mut seen = HashSet::with_capacity(budget);
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget {
        let pair = random_pair(n, rng)?;
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

/// Per-sample rewards over the whole set, cached for one selection round.
struct SampleTable<'a> {
    samples: &'a [Hypothesis],
    weights: &'a [f64],
    n: usize,
    rewards: Vec<f64>,
    gaps: Vec<f64>,
}

impl<'a> SampleTable<'a> {
    fn new(belief: &'a Belief) -> Self {
        let set = belief.set();
        let n = set.len();
        let mut rewards = Vec::with_capacity(n * belief.len());
        let mut gaps = Vec::with_capacity(belief.len());
        let mut row = Vec::with_capacity(n);
        for s in belief.samples() {
            set.rewards_into(s.w.as_slice(), &mut row);
            gaps.push(TrajectorySet::spread(&row));
            rewards.extend_from_slice(&row);
        }
        SampleTable {
            samples: belief.samples(),
            weights: belief.weights(),
            n,
            rewards,
            gaps,
        }
    }

    fn row(&self, s: usize) -> &[f64] {
        &self.rewards[s * self.n..(s + 1) * self.n]
    }

    fn psi(&self, s: usize, p: usize, q: usize) -> f64 {
        let r = self.row(s);
        model_psi(r[p] - r[q], self.samples[s].alpha, self.gaps[s])
    }
}

/// Scratch buffers for information-gain scoring.
struct GainScratch {
    probs: Vec<f64>,
    marginal: Vec<f64>,
}

fn gain_for_pair(
    table: &SampleTable<'_>,
    grid: &SliderGrid,
    sigma: f64,
    p: usize,
    q: usize,
    scratch: &mut GainScratch,
) -> f64 {
    let g = grid.len();
    let m = table.samples.len();
    scratch.probs.resize(m * g, 0.0);
    scratch.marginal.clear();
    scratch.marginal.resize(g, 0.0);
    for s in 0..m {
        let row = &mut scratch.probs[s * g..(s + 1) * g];
        grid.bucket_probabilities(table.psi(s, p, q), sigma, row);
        let ws = table.weights[s];
        for (acc, &x) in scratch.marginal.iter_mut().zip(row.iter()) {
            *acc += ws * x;
        }
    }
    let mut gain = 0.0;
    for s in 0..m {
        let ws = table.weights[s];
        if ws == 0.0 {
            continue;
        }
        let row = &scratch.probs[s * g..(s + 1) * g];
        for (&x, &mg) in row.iter().zip(&scratch.marginal) {
            if x > 0.0 && mg > 0.0 {
                gain += ws * x * (x / mg).log2();
            }
        }
    }
    gain
}

/// Expected information (bits) the answer to `query` carries about `(w, α)`
/// under `belief`, with answers on the slider grid of step `epsilon`.
pub fn info_gain_score(query: &Query, belief: &Belief, epsilon: f64) -> Result<f64> {
    let grid = SliderGrid::new(epsilon)?;
    let (p, q) = belief.set().resolve(query)?;
    let table = SampleTable::new(belief);
    let mut scratch = GainScratch {
        probs: Vec::new(),
        marginal: Vec::new(),
    };
    Ok(gain_for_pair(&table, &grid, belief.sigma(), p, q, &mut scratch))
}

/// The candidate query with the highest information gain; the first one
/// encountered wins ties.
pub fn select_info_gain<R: Rng + ?Sized>(
    belief: &Belief,
    budget: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<Query> {
    let set = belief.set();
    let grid = SliderGrid::new(epsilon)?;
    let candidates = candidate_pairs(set.len(), budget, rng)?;
    let table = SampleTable::new(belief);
    let mut scratch = GainScratch {
        probs: Vec::new(),
        marginal: Vec::new(),
    };
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for &(p, q) in &candidates {
        let score = gain_for_pair(&table, &grid, belief.sigma(), p, q, &mut scratch);
        if score > best.0 {
            best = (score, (p, q));
        }
    }
    Ok(set.query(best.1 .0, best.1 .1))
}

/// Summed mutual regret of two hypotheses and the query formed by their
/// optimal trajectories.
pub fn max_regret_score(user_p: &Hypothesis, user_q: &Hypothesis, set: &TrajectorySet) -> Result<(f64, Query)> {
    set.check_dim(user_p.w.as_slice())?;
    set.check_dim(user_q.w.as_slice())?;
    let rp = set.rewards(user_p.w.as_slice());
    let rq = set.rewards(user_q.w.as_slice());
    let (bp, bq) = (set.argmax(&rp), set.argmax(&rq));
    let score = (rq[bq] - rq[bp]) + (rp[bp] - rp[bq]);
    Ok((score, set.query(bp, bq)))
}

/// Query from the pair of belief samples with the largest weighted mutual
/// regret. Pairs whose optimal trajectories coincide are skipped unless no
/// other pair exists.
pub fn select_max_regret<R: Rng + ?Sized>(belief: &Belief, budget: usize, rng: &mut R) -> Result<Query> {
    let set = belief.set();
    let table = SampleTable::new(belief);
    let m = belief.len();
    let best_idx: Vec<usize> = (0..m).map(|s| set.argmax(table.row(s))).collect();
    if m < 2 {
        return Ok(set.query(best_idx[0], best_idx[0]));
    }
    let candidates = candidate_pairs(m, budget, rng)?;
    let mut best: Option<(f64, usize, usize)> = None;
    for &(i, j) in &candidates {
        let (bi, bj) = (best_idx[i], best_idx[j]);
        if bi == bj {
            continue;
        }
        let (ri, rj) = (table.row(i), table.row(j));
        let regret = (rj[bj] - rj[bi]) + (ri[bi] - ri[bj]);
        let score = table.weights[i] * table.weights[j] * regret;
        if best.is_none_or(|b| score > b.0) {
            best = Some((score, bi, bj));
        }
    }
    Ok(match best {
        Some((_, p, q)) => set.query(p, q),
        None => {
            let (i, _) = candidates[0];
            set.query(best_idx[i], best_idx[i])
        }
    })
}
