//! word2vec text (`<N> <D>` header) and GloVe (headerless) formats.
//!
//! Rows are `<token> <x1> ... <xD>` separated by spaces; `\n` and `\r\n`
//! line endings are both accepted. Blank lines are skipped.

use std::io::{BufRead, Write};

use super::EmbeddingSet;
use crate::error::{Error, Result};

struct Rows {
    tokens: Vec<String>,
    matrix: Vec<f64>,
}

fn read_line(line: std::io::Result<String>, lineno: usize) -> Result<String> {
    line.map_err(|e| Error::format(Some(lineno), format!("unreadable line: {e}")))
}

fn parse_row(line: &str, lineno: usize, dims: usize, rows: &mut Rows) -> Result<()> {
    let mut fields = line.split(' ').filter(|f| !f.is_empty());
    let token = fields
        .next()
        .ok_or_else(|| Error::format(Some(lineno), "missing token"))?;
    let start = rows.matrix.len();
    for field in fields {
        let value: f64 = field.parse().map_err(|_| {
            Error::format(Some(lineno), format!("non-numeric coordinate {field:?}"))
        })?;
        if !value.is_finite() {
            return Err(Error::format(
                Some(lineno),
                format!("non-finite coordinate {field:?}"),
            ));
        }
        rows.matrix.push(value);
    }
    let found = rows.matrix.len() - start;
    if found != dims {
        return Err(Error::format(
            Some(lineno),
            format!("token {token:?} has {found} coordinates, expected {dims}"),
        ));
    }
    rows.tokens.push(token.to_owned());
    Ok(())
}

fn finish(rows: Rows, dims: usize) -> Result<EmbeddingSet> {
    EmbeddingSet::new(rows.tokens, rows.matrix, dims).map_err(|e| match e {
        Error::DuplicateToken(_) => e,
        other => Error::format(None, other.to_string()),
    })
}

pub fn load_word2vec_text<R: BufRead>(reader: R) -> Result<EmbeddingSet> {
    let mut lines = reader.lines().enumerate();
    let (n_vocab, dims) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::format(None, "empty stream, missing header"));
        };
        let line = read_line(line, i + 1)?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parsed = match parts.as_slice() {
            [n, d] => n.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
            _ => None,
        };
        break parsed.ok_or_else(|| {
            Error::format(Some(i + 1), format!("bad header {line:?}, expected \"<N> <D>\""))
        })?;
    };
    if dims == 0 {
        return Err(Error::format(Some(1), "header declares zero dimensions"));
    }
    let mut rows = Rows {
        tokens: Vec::with_capacity(n_vocab.min(1 << 20)),
        matrix: Vec::new(),
    };
    for (i, line) in lines {
        let line = read_line(line, i + 1)?;
        if line.trim().is_empty() {
            continue;
        }
        if rows.tokens.len() == n_vocab {
            return Err(Error::format(
                Some(i + 1),
                format!("more rows than the {n_vocab} declared in the header"),
            ));
        }
        parse_row(&line, i + 1, dims, &mut rows)?;
    }
    if rows.tokens.len() != n_vocab {
        return Err(Error::format(
            None,
            format!(
                "header declares {n_vocab} rows, found {}",
                rows.tokens.len()
            ),
        ));
    }
    finish(rows, dims)
}

pub fn load_glove_text<R: BufRead>(reader: R, dims: usize) -> Result<EmbeddingSet> {
    if dims == 0 {
        return Err(Error::InvalidParam("dims must be at least 1".into()));
    }
    let mut rows = Rows {
        tokens: Vec::new(),
        matrix: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = read_line(line, i + 1)?;
        if line.trim().is_empty() {
            continue;
        }
        parse_row(&line, i + 1, dims, &mut rows)?;
    }
    if rows.tokens.is_empty() {
        return Err(Error::format(None, "no embedding rows in stream"));
    }
    finish(rows, dims)
}

fn write_rows<W: Write>(set: &EmbeddingSet, w: &mut W) -> Result<()> {
    for (token, row) in set.tokens().iter().zip(set.rows()) {
        w.write_all(token.as_bytes())?;
        for x in row {
            write!(w, " {x:.8e}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes word2vec text with coordinates at 9 significant digits.
pub fn write_word2vec_text<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", set.len(), set.dim())?;
    write_rows(set, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Writes GloVe text with coordinates at 9 significant digits.
pub fn write_glove_text<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    write_rows(set, &mut w)?;
    w.flush()?;
    Ok(())
}
