//! Canonical binary container.
//!
//! ```text
//! "SEMB"              4 bytes magic
//! version  u32 LE     = 1
//! flags    u32 LE     bit 0 = normalized, other bits zero
//! n_vocab  u64 LE
//! dim      u32 LE
//! n_vocab × (u32 LE byte length, UTF-8 token bytes)
//! n_vocab·dim × f32 LE, row-major
//! ```
//!
//! Coordinates are narrowed to f32 on save, so a set round-trips bit-exactly
//! whenever its values are f32-representable (in particular, any set that
//! was itself loaded from this format).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::EmbeddingSet;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SEMB";
const VERSION: u32 = 1;
const FLAG_NORMALIZED: u32 = 1;

pub fn save_canonical<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Invariant("cannot save an empty vocabulary".into()));
    }
    let dim = u32::try_from(set.dim())
        .map_err(|_| Error::Invariant(format!("dimension {} exceeds u32", set.dim())))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let flags = if set.is_normalized() { FLAG_NORMALIZED } else { 0 };
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(set.len() as u64).to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    for token in set.tokens() {
        let len = u32::try_from(token.len())
            .map_err(|_| Error::Invariant(format!("token of {} bytes", token.len())))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(token.as_bytes())?;
    }
    for (k, &x) in set.matrix().iter().enumerate() {
        let narrow = x as f32;
        if !narrow.is_finite() {
            return Err(Error::Invariant(format!(
                "coordinate {x} of {:?} overflows f32",
                set.token(k / set.dim())
            )));
        }
        w.write_all(&narrow.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(
                None,
                format!("truncated stream while reading {what}"),
            ));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub fn load_canonical<R: Read>(mut r: R) -> Result<EmbeddingSet> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut cur = Cursor { buf: &buf, pos: 0 };

    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::format(None, "bad magic, not a canonical embedding file"));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::format(None, format!("unsupported version {version}")));
    }
    let flags = cur.u32("flags")?;
    if flags & !FLAG_NORMALIZED != 0 {
        return Err(Error::format(None, format!("unknown flag bits {flags:#x}")));
    }
    let n_vocab = cur.u64("vocabulary size")?;
    let dim = cur.u32("dimension")? as usize;
    // every token costs at least its 4-byte length prefix
    let n_vocab = usize::try_from(n_vocab)
        .ok()
        .filter(|&n| n <= cur.remaining() / 4)
        .ok_or_else(|| Error::format(None, format!("vocabulary size {n_vocab} exceeds stream")))?;

    let mut tokens = Vec::with_capacity(n_vocab);
    for i in 0..n_vocab {
        let len = cur.u32("token length")? as usize;
        let bytes = cur.take(len, "token bytes")?;
        let token = std::str::from_utf8(bytes)
            .map_err(|_| Error::format(None, format!("token {i} is not valid UTF-8")))?;
        tokens.push(token.to_owned());
    }

    let n_values = n_vocab
        .checked_mul(dim)
        .filter(|n| n.checked_mul(4).is_some())
        .ok_or_else(|| Error::format(None, "matrix size overflows"))?;
    let payload = cur.take(n_values * 4, "matrix")?;
    if cur.remaining() != 0 {
        return Err(Error::format(
            None,
            format!("{} trailing bytes after matrix", cur.remaining()),
        ));
    }
    let matrix = payload
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes(b.try_into().unwrap())))
        .collect();

    EmbeddingSet::new(tokens, matrix, dim)
        .and_then(|s| s.with_normalized_flag(flags & FLAG_NORMALIZED != 0))
        .map_err(|e| match e {
            Error::DuplicateToken(_) => e,
            other => Error::format(None, other.to_string()),
        })
}

pub fn read_canonical_file(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    load_canonical(BufReader::new(File::open(path)?))
}

pub fn write_canonical_file(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    save_canonical(set, BufWriter::new(File::create(path)?))
}
