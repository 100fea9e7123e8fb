use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{fetch_lattice, synthetic_env, FETCH_DIMENSION};
use crate::error::{Error, Result};
use crate::trajectory::TrajectorySet;

/// Trajectory sets sessions can be created against, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct SetRegistry {
    sets: BTreeMap<String, Arc<TrajectorySet>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetInfo {
    pub id: String,
    pub dimension: usize,
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `fetch`: every drink-serving combination; `synthetic10`: the default
    /// 10-D synthetic set with 200 items and seed 0.
    pub fn with_builtin() -> Self {
        let mut r = Self::new();
        let fetch = TrajectorySet::new(FETCH_DIMENSION, fetch_lattice())
            .expect("lattice is a valid set")
            .with_note("drink-serving robot: every valid combination");
        r.insert("fetch", fetch);
        let synthetic = synthetic_env(10, 200, &mut ChaCha8Rng::seed_from_u64(0))
            .expect("valid synthetic parameters");
        r.insert("synthetic10", synthetic);
        r
    }

    pub fn insert(&mut self, id: impl Into<String>, set: TrajectorySet) {
        self.sets.insert(id.into(), Arc::new(set));
    }

    /// Registers every `*.jsonl` file in `dir` under its file stem.
    pub fn load_dir(&mut self, dir: impl AsRef<Path>) -> Result<usize> {
        let dir = dir.as_ref();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for p in &paths {
            let id = p
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::invalid(format!("bad set file name {}", p.display())))?;
            self.insert(id.to_string(), TrajectorySet::load(p)?);
        }
        Ok(paths.len())
    }

    pub fn get(&self, id: &str) -> Option<&Arc<TrajectorySet>> {
        self.sets.get(id)
    }

    pub fn infos(&self) -> Vec<SetInfo> {
        self.sets
            .iter()
            .map(|(id, s)| SetInfo {
                id: id.clone(),
                dimension: s.dimension(),
                size: s.len(),
                note: s.note().map(str::to_string),
            })
            .collect()
    }
}
