//! Trajectories, linear reward, and the reward-based performance measures.
//!
//! A trajectory is represented only by its feature vector. The planner is an
//! argmax over a finite [`TrajectorySet`]; ties are broken towards the
//! lexicographically lowest trajectory id so every run is deterministic.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single trajectory, identified by id and described by its features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub id: String,
    pub features: Vec<f64>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub media_ref: Option<String>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, features: Vec<f64>) -> Self {
        Trajectory {
            id: id.into(),
            features,
            label: None,
            media_ref: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// Reward weights over trajectory features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("weight vector has non-finite entries"));
        }
        Ok(WeightVector(w))
    }

    /// Builds the unit vector pointing along `w`.
    pub fn unit(w: Vec<f64>) -> Result<Self> {
        let mut v = WeightVector::new(w)?;
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        v.0.iter_mut().for_each(|x| *x /= n);
        Ok(v)
    }

    pub(crate) fn from_unit_unchecked(w: Vec<f64>) -> Self {
        WeightVector(w)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn scaled(&self, c: f64) -> WeightVector {
        WeightVector(self.0.iter().map(|x| x * c).collect())
    }
}

/// An ordered pair of trajectory ids shown to the user, `P` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub p_id: String,
    pub q_id: String,
}

impl Query {
    pub fn new(p_id: impl Into<String>, q_id: impl Into<String>) -> Self {
        Query {
            p_id: p_id.into(),
            q_id: q_id.into(),
        }
    }

    pub fn reversed(&self) -> Query {
        Query::new(self.q_id.clone(), self.p_id.clone())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// An immutable collection of trajectories sharing one feature dimension.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    dimension: usize,
    items: Vec<Trajectory>,
    // row-major copy of the features for the hot reward loops
    features: Vec<f64>,
    // position of each item when sorted by id, used for argmax tie-breaks
    id_rank: Vec<u32>,
    index: HashMap<String, usize>,
    note: Option<String>,
}

impl PartialEq for TrajectorySet {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.items == other.items && self.note == other.note
    }
}

impl TrajectorySet {
    pub fn new(dimension: usize, items: Vec<Trajectory>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if items.len() < 2 {
            return Err(Error::invalid(format!(
                "a trajectory set needs at least 2 items, got {}",
                items.len()
            )));
        }
        let mut index = HashMap::with_capacity(items.len());
        let mut features = Vec::with_capacity(items.len() * dimension);
        for (i, t) in items.iter().enumerate() {
            if t.features.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    actual: t.features.len(),
                });
            }
            if t.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!(
                    "trajectory {} has non-finite features",
                    t.id
                )));
            }
            if index.insert(t.id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate trajectory id {}", t.id)));
            }
            features.extend_from_slice(&t.features);
        }
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.sort_by(|&a, &b| items[a].id.cmp(&items[b].id));
        let mut id_rank = vec![0u32; items.len()];
        for (rank, &i) in order.iter().enumerate() {
            id_rank[i] = rank as u32;
        }
        Ok(TrajectorySet {
            dimension,
            items,
            features,
            id_rank,
            index,
            note: None,
        })
    }

    /// Attaches a free-form description that is written into the file header.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Trajectory] {
        &self.items
    }

    pub fn get(&self, i: usize) -> &Trajectory {
        &self.items[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn by_id(&self, id: &str) -> Option<&Trajectory> {
        self.index_of(id).map(|i| &self.items[i])
    }

    /// Resolves both ids of a query to item indices.
    pub fn resolve(&self, query: &Query) -> Result<(usize, usize)> {
        let p = self
            .index_of(&query.p_id)
            .ok_or_else(|| Error::invalid(format!("unknown trajectory id {}", query.p_id)))?;
        let q = self
            .index_of(&query.q_id)
            .ok_or_else(|| Error::invalid(format!("unknown trajectory id {}", query.q_id)))?;
        Ok((p, q))
    }

    pub fn query(&self, p: usize, q: usize) -> Query {
        Query::new(self.items[p].id.clone(), self.items[q].id.clone())
    }

    pub(crate) fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: w.len(),
            });
        }
        Ok(())
    }

    /// Rewards of every item under `w`, in item order.
    pub(crate) fn rewards_into(&self, w: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.features.chunks_exact(self.dimension).map(|r| dot(r, w)));
    }

    pub(crate) fn rewards(&self, w: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.rewards_into(w, &mut out);
        out
    }

    /// Index of the highest reward, lowest id on ties.
    pub(crate) fn argmax(&self, rewards: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..rewards.len() {
            if rewards[i] > rewards[best]
                || (rewards[i] == rewards[best] && self.id_rank[i] < self.id_rank[best])
            {
                best = i;
            }
        }
        best
    }

    /// Maximum minus minimum of `rewards`.
    pub(crate) fn spread(rewards: &[f64]) -> f64 {
        let (lo, hi) = rewards
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
                (lo.min(r), hi.max(r))
            });
        hi - lo
    }

    /// Reads a set from the JSON-lines format: a `{"dimension": d}` header
    /// followed by one trajectory object per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), &path.display().to_string())
    }

    pub fn read(reader: impl BufRead, source: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: source.to_string(),
            line,
            message,
        };
        let mut header: Option<SetHeader> = None;
        let mut items = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let lineno = n + 1;
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match &header {
                None => {
                    let h: SetHeader = serde_json::from_str(&line)
                        .map_err(|e| parse_err(lineno, format!("bad header: {e}")))?;
                    if h.dimension == 0 {
                        return Err(parse_err(lineno, "dimension must be positive".into()));
                    }
                    header = Some(h);
                }
                Some(h) => {
                    let t: Trajectory = serde_json::from_str(&line)
                        .map_err(|e| parse_err(lineno, format!("bad trajectory: {e}")))?;
                    if t.features.len() != h.dimension {
                        return Err(parse_err(
                            lineno,
                            format!(
                                "trajectory {} has {} features, header declares {}",
                                t.id,
                                t.features.len(),
                                h.dimension
                            ),
                        ));
                    }
                    if items.iter().any(|o: &Trajectory| o.id == t.id) {
                        return Err(parse_err(lineno, format!("duplicate trajectory id {}", t.id)));
                    }
                    items.push(t);
                }
            }
        }
        let header = header.ok_or_else(|| parse_err(0, "missing header line".into()))?;
        let set = TrajectorySet::new(header.dimension, items)?;
        Ok(match header.note {
            Some(n) => set.with_note(n),
            None => set,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(&mut file).map_err(|e| Error::io(path, e))
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        let header = SetHeader {
            dimension: self.dimension,
            note: self.note.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&header)?)?;
        for t in &self.items {
            writeln!(out, "{}", serde_json::to_string(t)?)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetHeader {
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

/// Linear reward `φ·w` of a trajectory.
pub fn reward(traj: &Trajectory, w: &WeightVector) -> Result<f64> {
    if traj.features.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: traj.features.len(),
            actual: w.dim(),
        });
    }
    Ok(dot(&traj.features, w.as_slice()))
}

/// The planner: the trajectory in `set` with the highest reward under `w`.
pub fn best_trajectory<'a>(w: &WeightVector, set: &'a TrajectorySet) -> Result<&'a Trajectory> {
    set.check_dim(w.as_slice())?;
    let r = set.rewards(w.as_slice());
    Ok(set.get(set.argmax(&r)))
}

/// Loss in true reward from optimizing for `w` instead of `w_true`.
pub fn regret(w: &WeightVector, w_true: &WeightVector, set: &TrajectorySet) -> Result<f64> {
    set.check_dim(w.as_slice())?;
    set.check_dim(w_true.as_slice())?;
    let r_true = set.rewards(w_true.as_slice());
    let own = set.argmax(&r_true);
    let chosen = set.argmax(&set.rewards(w.as_slice()));
    Ok(r_true[own] - r_true[chosen])
}

/// Largest reward difference between any two trajectories under `w`.
pub fn reward_gap(w: &WeightVector, set: &TrajectorySet) -> Result<f64> {
    set.check_dim(w.as_slice())?;
    Ok(TrajectorySet::spread(&set.rewards(w.as_slice())))
}

/// Cosine similarity between the estimate and the true weights.
pub fn alignment(w_hat: &WeightVector, w_true: &WeightVector) -> Result<f64> {
    if w_hat.dim() != w_true.dim() {
        return Err(Error::DimensionMismatch {
            expected: w_true.dim(),
            actual: w_hat.dim(),
        });
    }
    let (a, b) = (w_hat.norm(), w_true.norm());
    if a == 0.0 || b == 0.0 {
        return Err(Error::invalid("alignment of a zero vector is undefined"));
    }
    Ok((dot(w_hat.as_slice(), w_true.as_slice()) / (a * b)).clamp(-1.0, 1.0))
}

/// True reward of the trajectory planned for `w_hat`, relative to the true
/// optimum. The raw ratio is returned; a zero optimum is an error.
pub fn relative_reward(
    w_hat: &WeightVector,
    w_true: &WeightVector,
    set: &TrajectorySet,
) -> Result<f64> {
    set.check_dim(w_hat.as_slice())?;
    set.check_dim(w_true.as_slice())?;
    let r_true = set.rewards(w_true.as_slice());
    let denom = r_true[set.argmax(&r_true)];
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateMeasure(
            "optimal reward under the true weights is zero".into(),
        ));
    }
    let chosen = set.argmax(&set.rewards(w_hat.as_slice()));
    Ok(r_true[chosen] / denom)
}
