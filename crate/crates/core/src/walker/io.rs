use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Walk, WalkParams};
use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::similarity::Neighbor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub start: String,
    pub top_n: usize,
    pub steps: usize,
    #[serde(default)]
    pub guides: Vec<String>,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub self_exclusion: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub token: String,
    pub score: f64,
}

/// On-disk form of a walk: tokens as strings, candidate log optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub params: ParamsRecord,
    pub path: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_log: Option<Vec<Vec<CandidateRecord>>>,
}

impl WalkRecord {
    pub fn from_walk(walk: &Walk, with_candidates: bool) -> Self {
        let p = &walk.params;
        WalkRecord {
            params: ParamsRecord {
                start: p.start.token.clone(),
                top_n: p.top_n,
                steps: p.steps,
                guides: p.guides.iter().map(|g| g.token.clone()).collect(),
                seed: p.seed,
                self_exclusion: p.self_exclusion,
            },
            path: walk.path.iter().map(|r| r.token.clone()).collect(),
            candidate_log: with_candidates.then(|| {
                walk.candidate_log
                    .iter()
                    .map(|step| {
                        step.iter()
                            .map(|n| CandidateRecord {
                                token: n.token.token.clone(),
                                score: n.score,
                            })
                            .collect()
                    })
                    .collect()
            }),
        }
    }

    /// Resolves tokens against `set`. A missing candidate log comes back empty.
    pub fn into_walk(self, set: &EmbeddingSet) -> Result<Walk> {
        let p = self.params;
        let params = WalkParams {
            start: set.lookup(&p.start)?,
            top_n: p.top_n,
            steps: p.steps,
            guides: p.guides.iter().map(|g| set.lookup(g)).collect::<Result<_>>()?,
            seed: p.seed,
            self_exclusion: p.self_exclusion,
        };
        if self.path.len() != params.steps + 1 {
            return Err(Error::format(
                None,
                format!("path has {} tokens for {} steps", self.path.len(), params.steps),
            ));
        }
        let path = self.path.iter().map(|t| set.lookup(t)).collect::<Result<Vec<_>>>()?;
        let candidate_log = match self.candidate_log {
            None => Vec::new(),
            Some(log) => log
                .into_iter()
                .map(|step| {
                    step.into_iter()
                        .map(|c| {
                            Ok(Neighbor {
                                token: set.lookup(&c.token)?,
                                score: c.score,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?,
        };
        Ok(Walk {
            params,
            path,
            candidate_log,
        })
    }
}

pub fn write_walk_json<W: Write>(walk: &Walk, with_candidates: bool, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &WalkRecord::from_walk(walk, with_candidates))?;
    Ok(())
}

pub fn read_walk_json<R: Read>(r: R) -> Result<WalkRecord> {
    Ok(serde_json::from_reader(r)?)
}

/// CSV with header `step,token`.
pub fn write_path_csv<W: Write>(walk: &Walk, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "token"])?;
    for (i, r) in walk.path.iter().enumerate() {
        out.write_record([i.to_string().as_str(), r.token.as_str()])?;
    }
    out.flush()?;
    Ok(())
}
