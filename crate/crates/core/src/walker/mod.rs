//! Similarity walks through an embedding set.
//!
//! At each step the walker asks for the `top_n` tokens most similar to its
//! query and moves to one of them, chosen uniformly by a per-walk [`SimRng`].
//! A free walk queries with the current token's vector. A guided walk
//! queries with the mean of the unit vectors of the start token, the guide
//! tokens and the current token, and never steps onto a start or guide
//! token. Revisiting tokens is allowed.

mod absorption;
mod io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingSet, TokenRef};
use crate::error::{Error, Result};
use crate::msd::{Provenance, Trajectory};
use crate::rng::SimRng;
use crate::similarity::{composite_vector, top_k, CompositeQuery, Neighbor};

pub use absorption::{detect_absorption, detect_absorption_in, AbsorptionReport};
pub use io::{read_walk_json, write_path_csv, write_walk_json, WalkRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub start: TokenRef,
    pub top_n: usize,
    pub steps: usize,
    pub guides: Vec<TokenRef>,
    pub seed: u64,
    pub self_exclusion: bool,
}

impl WalkParams {
    /// Free-walk parameters with self-exclusion on.
    pub fn new(start: TokenRef, top_n: usize, steps: usize, seed: u64) -> Self {
        WalkParams {
            start,
            top_n,
            steps,
            guides: Vec::new(),
            seed,
            self_exclusion: true,
        }
    }

    pub fn with_guides(mut self, guides: Vec<TokenRef>) -> Self {
        self.guides = guides;
        self
    }

    pub fn with_self_exclusion(mut self, on: bool) -> Self {
        self.self_exclusion = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, set: &EmbeddingSet) -> Result<()> {
        if self.top_n == 0 {
            return Err(Error::InvalidParam("top_n must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParam("steps must be at least 1".into()));
        }
        for r in std::iter::once(&self.start).chain(&self.guides) {
            if !set.owns(r) {
                return Err(Error::UnknownToken(r.token.clone()));
            }
        }
        if self.guides.iter().any(|g| g.index == self.start.index) {
            return Err(Error::InvalidParam(format!(
                "start token {:?} is also a guide",
                self.start.token
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Walk {
    pub params: WalkParams,
    /// `steps + 1` tokens, beginning with `params.start`.
    pub path: Vec<TokenRef>,
    /// Candidates offered at each step.
    pub candidate_log: Vec<Vec<Neighbor>>,
}

impl Walk {
    pub fn path_indices(&self) -> Vec<usize> {
        self.path.iter().map(|r| r.index).collect()
    }

    /// The embedding vectors visited, in order.
    pub fn trajectory(&self, set: &EmbeddingSet) -> Result<Trajectory> {
        let data = self
            .path
            .iter()
            .flat_map(|r| set.row(r.index).iter().copied())
            .collect();
        Trajectory::from_flat(data, set.dim(), Provenance::Walk)
    }
}

fn run(set: &EmbeddingSet, params: &WalkParams) -> Result<Walk> {
    params.validate(set)?;
    let anchors: Vec<TokenRef> = std::iter::once(params.start.clone())
        .chain(params.guides.iter().cloned())
        .collect();
    let guided = !params.guides.is_empty();

    let mut rng = SimRng::new(params.seed);
    let mut path = Vec::with_capacity(params.steps + 1);
    let mut candidate_log = Vec::with_capacity(params.steps);
    path.push(params.start.clone());
    let mut exclude: Vec<usize> = Vec::with_capacity(anchors.len() + 1);

    for _ in 0..params.steps {
        let current = path.last().expect("path starts non-empty").clone();
        exclude.clear();
        if guided {
            exclude.extend(anchors.iter().map(|a| a.index));
        }
        if params.self_exclusion && !exclude.contains(&current.index) {
            exclude.push(current.index);
        }
        let candidates = if guided {
            let query = CompositeQuery::new(anchors.iter().cloned().chain([current]))?;
            top_k(set, &composite_vector(set, &query)?, params.top_n, &exclude)?
        } else {
            top_k(set, set.row(current.index), params.top_n, &exclude)?
        };
        let pick = rng.uniform_index(candidates.len());
        path.push(candidates[pick].token.clone());
        candidate_log.push(candidates);
    }
    Ok(Walk {
        params: params.clone(),
        path,
        candidate_log,
    })
}

/// Walk that queries with the current token's own vector.
pub fn free_walk(set: &EmbeddingSet, params: &WalkParams) -> Result<Walk> {
    if !params.guides.is_empty() {
        return Err(Error::InvalidParam("free walk given guide tokens".into()));
    }
    run(set, params)
}

/// Walk tethered to the start token and `params.guides`.
pub fn guided_walk(set: &EmbeddingSet, params: &WalkParams) -> Result<Walk> {
    if params.guides.is_empty() {
        return Err(Error::InvalidParam("guided walk needs at least one guide".into()));
    }
    run(set, params)
}

/// Free or guided depending on whether `params.guides` is empty.
pub fn walk(set: &EmbeddingSet, params: &WalkParams) -> Result<Walk> {
    run(set, params)
}

/// Runs `count` walks seeded `base.seed, base.seed + 1, ...` on a pool of
/// `jobs` threads. Output order follows the seed order and does not depend
/// on scheduling.
pub fn run_ensemble(
    set: &EmbeddingSet,
    base: &WalkParams,
    count: usize,
    jobs: usize,
) -> Result<Vec<Walk>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(|i| walk(set, &base.clone().with_seed(base.seed.wrapping_add(i))))
            .collect()
    })
}
