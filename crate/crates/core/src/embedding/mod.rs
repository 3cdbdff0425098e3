//! Vocabularies of tokens paired with dense embedding vectors.
//!
//! An [`EmbeddingSet`] is immutable once built. Coordinates are held at
//! 64-bit precision; the canonical binary format stores them as 32-bit
//! floats, as most published embedding dumps do.

mod canonical;
mod text;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use canonical::{load_canonical, read_canonical_file, save_canonical, write_canonical_file};
pub use text::{load_glove_text, load_word2vec_text, write_glove_text, write_word2vec_text};

/// Maximum deviation of a row norm from 1 for a set flagged as normalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// A token together with its row index in the owning set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenRef {
    pub index: usize,
    pub token: String,
}

#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    tokens: Vec<String>,
    lookup: HashMap<String, usize>,
    matrix: Vec<f64>,
    dim: usize,
    norms: Vec<f64>,
    normalized: bool,
}

/// Bitwise equality: `-0.0` and `0.0` coordinates compare unequal.
impl PartialEq for EmbeddingSet {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && self.dim == other.dim
            && self.normalized == other.normalized
            && self.matrix.len() == other.matrix.len()
            && self
                .matrix
                .iter()
                .zip(&other.matrix)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl EmbeddingSet {
    /// Builds a set from tokens and a row-major `tokens.len() × dim` matrix.
    pub fn new(tokens: Vec<String>, matrix: Vec<f64>, dim: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Invariant("embedding set has no tokens".into()));
        }
        if dim == 0 {
            return Err(Error::Invariant("embedding dimension is zero".into()));
        }
        if matrix.len() != tokens.len() * dim {
            return Err(Error::Invariant(format!(
                "matrix has {} values, expected {} x {}",
                matrix.len(),
                tokens.len(),
                dim
            )));
        }
        let mut lookup = HashMap::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if token.is_empty() {
                return Err(Error::Invariant(format!("empty token at row {i}")));
            }
            if lookup.insert(token.clone(), i).is_some() {
                return Err(Error::DuplicateToken(token.clone()));
            }
        }
        if let Some(pos) = matrix.iter().position(|x| !x.is_finite()) {
            return Err(Error::Invariant(format!(
                "non-finite coordinate in row {} ({:?})",
                pos / dim,
                tokens[pos / dim]
            )));
        }
        let norms = matrix.chunks_exact(dim).map(norm).collect();
        Ok(EmbeddingSet {
            tokens,
            lookup,
            matrix,
            dim,
            norms,
            normalized: false,
        })
    }

    pub fn from_rows(tokens: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Invariant(format!(
                "row {bad} has {} coordinates, expected {dim}",
                rows[bad].len()
            )));
        }
        if rows.len() != tokens.len() {
            return Err(Error::Invariant(format!(
                "{} tokens but {} rows",
                tokens.len(),
                rows.len()
            )));
        }
        Self::new(tokens, rows.concat(), dim)
    }

    /// Marks the set as unit-normalized, checking every row norm.
    pub fn with_normalized_flag(mut self, normalized: bool) -> Result<Self> {
        if normalized {
            if let Some(k) = self
                .norms
                .iter()
                .position(|n| (n - 1.0).abs() > NORM_TOLERANCE)
            {
                return Err(Error::Invariant(format!(
                    "row {:?} has norm {}, set cannot be flagged normalized",
                    self.tokens[k], self.norms[k]
                )));
            }
        }
        self.normalized = normalized;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.matrix[index * self.dim..(index + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks_exact(self.dim)
    }

    pub(crate) fn row_norm(&self, index: usize) -> f64 {
        self.norms[index]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.lookup.get(token).copied()
    }

    pub fn token_ref(&self, index: usize) -> Result<TokenRef> {
        if index >= self.len() {
            return Err(Error::OutOfRange(format!(
                "token index {index} in a vocabulary of {}",
                self.len()
            )));
        }
        Ok(TokenRef {
            index,
            token: self.tokens[index].clone(),
        })
    }

    /// Exact, case-sensitive lookup.
    pub fn lookup(&self, token: &str) -> Result<TokenRef> {
        self.index_of(token)
            .map(|index| TokenRef {
                index,
                token: token.to_owned(),
            })
            .ok_or_else(|| Error::UnknownToken(token.to_owned()))
    }

    /// True when `r` names a row of this set under the same token.
    pub fn owns(&self, r: &TokenRef) -> bool {
        r.index < self.len() && self.tokens[r.index] == r.token
    }
}

/// Scales every row to unit L2 norm. Token order is preserved.
pub fn l2_normalize(set: &EmbeddingSet) -> Result<EmbeddingSet> {
    let mut matrix = Vec::with_capacity(set.matrix.len());
    for (k, row) in set.rows().enumerate() {
        let n = set.norms[k];
        if n == 0.0 {
            return Err(Error::DegenerateVector(set.tokens[k].clone()));
        }
        matrix.extend(row.iter().map(|x| x / n));
    }
    EmbeddingSet::new(set.tokens.clone(), matrix, set.dim)?.with_normalized_flag(true)
}
