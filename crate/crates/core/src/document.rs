//! From plain text to a sentence-embedding trajectory.
//!
//! Sentences come either from the text itself ([`split_sentences`] plus
//! word-vector averaging) or from a canonical file whose tokens are the
//! sentence ordinals `"0"`, `"1"`, ... produced by an external encoder.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{load_canonical, EmbeddingSet};
use crate::error::{Error, Result};
use crate::msd::{analyze, AnalysisOptions, DiffusionReport, MsdCurve, Provenance, Trajectory};

/// Fewest points a document trajectory may have before analysis.
pub const MIN_DOCUMENT_POINTS: usize = 10;

/// Abbreviations whose trailing period never ends a sentence.
const HONORIFICS: [&str; 5] = ["Mr", "Mrs", "Ms", "Dr", "St"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Lines,
    NaivePunct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceSequence {
    pub sentences: Vec<String>,
    pub source: String,
}

impl SentenceSequence {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// In `Lines` mode every non-blank line is a sentence. In `NaivePunct` mode
/// text is cut after `.`, `!` or `?` when whitespace and then an uppercase
/// letter follow, except after the honorifics Mr, Mrs, Ms, Dr and St. Other
/// abbreviations are split like any sentence end.
pub fn split_sentences(text: &str, mode: SplitMode, source: &str) -> Result<SentenceSequence> {
    let sentences: Vec<String> = match mode {
        SplitMode::Lines => text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect(),
        SplitMode::NaivePunct => split_punct(text),
    };
    if sentences.is_empty() {
        return Err(Error::EmptyDocument(format!("{source}: no sentences")));
    }
    Ok(SentenceSequence {
        sentences,
        source: source.to_string(),
    })
}

fn split_punct(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let end = i + c.len_utf8();
        let rest = &text[end..];
        let after_ws = rest.trim_start();
        let breaks = after_ws.len() < rest.len()
            && after_ws.chars().next().is_some_and(char::is_uppercase);
        if !breaks || (c == '.' && ends_with_honorific(&text[start..i])) {
            continue;
        }
        push_trimmed(&mut out, &text[start..end]);
        start = end;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn ends_with_honorific(before: &str) -> bool {
    let word_start = before
        .char_indices()
        .rev()
        .find(|(_, c)| !c.is_alphabetic())
        .map_or(0, |(i, c)| i + c.len_utf8());
    HONORIFICS.contains(&&before[word_start..])
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// A trajectory of averaged word vectors plus which sentences it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDocument {
    pub trajectory: Trajectory,
    /// Sentence indices that contributed a point, in order.
    pub used: Vec<usize>,
    /// Sentences with no in-vocabulary token.
    pub dropped: Vec<usize>,
}

pub fn embed_sentences_avg(seq: &SentenceSequence, words: &EmbeddingSet) -> Result<EmbeddedDocument> {
    let dim = words.dim();
    let means: Vec<Option<Vec<f64>>> = seq
        .sentences
        .par_iter()
        .map(|s| {
            let mut acc = vec![0.0; dim];
            let mut hits = 0usize;
            for tok in tokenize(s) {
                if let Some(i) = words.index_of(&tok) {
                    for (a, x) in acc.iter_mut().zip(words.row(i)) {
                        *a += x;
                    }
                    hits += 1;
                }
            }
            (hits > 0).then(|| {
                let n = hits as f64;
                acc.iter_mut().for_each(|a| *a /= n);
                acc
            })
        })
        .collect();

    let mut used = Vec::new();
    let mut dropped = Vec::new();
    let mut data = Vec::new();
    for (i, m) in means.into_iter().enumerate() {
        match m {
            Some(v) => {
                used.push(i);
                data.extend(v);
            }
            None => dropped.push(i),
        }
    }
    if used.is_empty() {
        return Err(Error::EmptyDocument(format!(
            "{}: no sentence has an in-vocabulary token",
            seq.source
        )));
    }
    Ok(EmbeddedDocument {
        trajectory: Trajectory::from_flat(data, dim, Provenance::Document)?,
        used,
        dropped,
    })
}

/// Orders the rows of a set whose tokens are the ordinals `0..N` into a
/// trajectory. Any gap, repeat or non-numeric token is a format error.
pub fn sentence_trajectory(set: &EmbeddingSet) -> Result<Trajectory> {
    let n = set.len();
    let mut order = vec![usize::MAX; n];
    for (row, tok) in set.tokens().iter().enumerate() {
        let ordinal = parse_ordinal(tok)
            .filter(|&k| k < n)
            .ok_or_else(|| Error::format(None, format!("token {tok:?} is not a sentence ordinal below {n}")))?;
        order[ordinal] = row;
    }
    let mut data = Vec::with_capacity(n * set.dim());
    for row in order {
        data.extend_from_slice(set.row(row));
    }
    Trajectory::from_flat(data, set.dim(), Provenance::Document)
}

fn parse_ordinal(tok: &str) -> Option<usize> {
    let canonical = tok == "0" || (!tok.starts_with('0') && tok.bytes().all(|b| b.is_ascii_digit()));
    if canonical {
        tok.parse().ok()
    } else {
        None
    }
}

/// Reads a canonical sentence-embedding file into a trajectory.
pub fn load_sentence_embeddings<R: Read>(r: R) -> Result<Trajectory> {
    sentence_trajectory(&load_canonical(r)?)
}

/// MSD, phase segmentation and regime for a document trajectory.
pub fn analyze_document(
    traj: &Trajectory,
    opts: &AnalysisOptions,
) -> Result<(DiffusionReport, MsdCurve)> {
    if traj.len() < MIN_DOCUMENT_POINTS {
        return Err(Error::TooShort {
            have: traj.len(),
            need: MIN_DOCUMENT_POINTS,
        });
    }
    analyze(traj, opts)
}
