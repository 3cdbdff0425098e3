//! Exact cosine-similarity search.
//!
//! Every query is a full scan over the vocabulary. Results are ordered by
//! score descending, ties broken by ascending token index, so the same query
//! always yields the same sequence.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, norm, EmbeddingSet, TokenRef};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub token: TokenRef,
    pub score: f64,
}

/// A deduplicated, non-empty list of tokens whose vectors are combined into
/// one query.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeQuery {
    members: Vec<TokenRef>,
}

impl CompositeQuery {
    /// Duplicates are dropped, keeping the first occurrence.
    pub fn new(refs: impl IntoIterator<Item = TokenRef>) -> Result<Self> {
        let mut members: Vec<TokenRef> = Vec::new();
        for r in refs {
            if !members.iter().any(|m| m.index == r.index) {
                members.push(r);
            }
        }
        if members.is_empty() {
            return Err(Error::InvalidParam("composite query has no members".into()));
        }
        Ok(CompositeQuery { members })
    }

    pub fn members(&self) -> &[TokenRef] {
        &self.members
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParam(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector("zero vector in cosine".into()));
    }
    Ok(dot(a, b) / (na * nb))
}

fn by_rank(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// The `k` tokens most cosine-similar to `query`, skipping indices in
/// `exclude` and rows of zero norm. Returns fewer than `k` when the pool is
/// smaller.
pub fn top_k(
    set: &EmbeddingSet,
    query: &[f64],
    k: usize,
    exclude: &[usize],
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be at least 1".into()));
    }
    if query.len() != set.dim() {
        return Err(Error::InvalidParam(format!(
            "query has dimension {}, set has {}",
            query.len(),
            set.dim()
        )));
    }
    let qn = norm(query);
    if qn == 0.0 {
        return Err(Error::DegenerateVector("zero query vector".into()));
    }

    let mut scored: Vec<(f64, usize)> = set
        .rows()
        .enumerate()
        .filter(|(i, _)| set.row_norm(*i) > 0.0 && !exclude.contains(i))
        .map(|(i, row)| (dot(query, row) / (qn * set.row_norm(i)), i))
        .collect();
    if scored.is_empty() {
        return Err(Error::EmptyPool);
    }
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, by_rank);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_rank);

    Ok(scored
        .into_iter()
        .map(|(score, index)| Neighbor {
            token: TokenRef {
                index,
                token: set.token(index).to_owned(),
            },
            score,
        })
        .collect())
}

/// Mean of the unit-normalized member vectors.
pub fn composite_vector(set: &EmbeddingSet, q: &CompositeQuery) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; set.dim()];
    for m in &q.members {
        if !set.owns(m) {
            return Err(Error::OutOfRange(format!(
                "token ref {:?}@{} not in this set",
                m.token, m.index
            )));
        }
        let n = set.row_norm(m.index);
        if n == 0.0 {
            return Err(Error::DegenerateVector(m.token.clone()));
        }
        for (a, x) in acc.iter_mut().zip(set.row(m.index)) {
            *a += x / n;
        }
    }
    let count = q.members.len() as f64;
    acc.iter_mut().for_each(|a| *a /= count);
    Ok(acc)
}
