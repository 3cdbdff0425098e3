use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Walk;
use crate::embedding::TokenRef;
use crate::error::{Error, Result};

/// Whether a walk settled into a small set of tokens it keeps revisiting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionReport {
    pub absorbed: bool,
    pub onset_step: Option<usize>,
    /// Distinct tokens visited from the onset on, by index.
    pub cluster: Vec<TokenRef>,
    pub window: usize,
    pub distinct_threshold: usize,
}

/// Onset of absorption over raw path indices: the smallest `t` such that
/// every `window`-long slice starting at `t` or later holds at most
/// `distinct_threshold` distinct entries, and absorbed only if
/// `t + window <= steps`. Returns `(onset, distinct tokens from onset)`.
pub fn detect_absorption_in(
    path: &[usize],
    window: usize,
    distinct_threshold: usize,
) -> Result<Option<(usize, Vec<usize>)>> {
    let steps = path.len().saturating_sub(1);
    if window == 0 || window > steps {
        return Err(Error::InvalidParam(format!(
            "window {window} must be in [1, {steps}]"
        )));
    }
    if distinct_threshold == 0 {
        return Err(Error::InvalidParam("distinct_threshold must be at least 1".into()));
    }
    let n_slices = path.len() - window + 1;
    let mut ok = Vec::with_capacity(n_slices);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &tok in &path[..window] {
        *counts.entry(tok).or_default() += 1;
    }
    ok.push(counts.len() <= distinct_threshold);
    for s in 1..n_slices {
        let gone = path[s - 1];
        let c = counts.get_mut(&gone).expect("token in window");
        *c -= 1;
        if *c == 0 {
            counts.remove(&gone);
        }
        *counts.entry(path[s + window - 1]).or_default() += 1;
        ok.push(counts.len() <= distinct_threshold);
    }

    let trailing = ok.iter().rev().take_while(|&&b| b).count();
    if trailing == 0 {
        return Ok(None);
    }
    let onset = n_slices - trailing;
    if onset + window > steps {
        return Ok(None);
    }
    let mut cluster: Vec<usize> = path[onset..].to_vec();
    cluster.sort_unstable();
    cluster.dedup();
    Ok(Some((onset, cluster)))
}

pub fn detect_absorption(
    walk: &Walk,
    window: usize,
    distinct_threshold: usize,
) -> Result<AbsorptionReport> {
    let found = detect_absorption_in(&walk.path_indices(), window, distinct_threshold)?;
    let (absorbed, onset_step, cluster) = match found {
        Some((onset, idx)) => {
            let cluster = idx
                .into_iter()
                .map(|i| {
                    walk.path
                        .iter()
                        .find(|r| r.index == i)
                        .expect("cluster token is on the path")
                        .clone()
                })
                .collect();
            (true, Some(onset), cluster)
        }
        None => (false, None, Vec::new()),
    };
    Ok(AbsorptionReport {
        absorbed,
        onset_step,
        cluster,
        window,
        distinct_threshold,
    })
}
