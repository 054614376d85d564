//! Plain-text sparse tensor format (`.sten`).
//!
//! ```text
//! shape 2 3
//! 0 1 5e-1
//! 1 2 -3.25e0
//! ```
//!
//! The first line is `shape` followed by the extents. Every further line is
//! one entry: the coordinates, then the value in decimal scientific
//! notation. Input rows may be in any order and may repeat (repeats are
//! summed on canonicalization). Output is always canonical, LF terminated,
//! with values printed in the shortest form that round-trips.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use crate::canonical::ensure_canonical;
use crate::error::{Error, Result};
use crate::tensor::{IndexMatrix, SparseTensor};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a tensor from text. The result keeps input order (non-canonical).
pub fn parse_sparse(text: &str) -> Result<SparseTensor> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "missing shape line"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("shape") {
        return Err(parse_err(n, "first line must start with `shape`"));
    }
    let shape = fields
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| parse_err(n, format!("bad extent {f:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let rank = shape.len();
    let mut indices = IndexMatrix::empty(rank);
    let mut data = Vec::new();
    let mut coord = Vec::with_capacity(rank);
    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != rank + 1 {
            return Err(parse_err(
                n,
                format!("expected {} fields, found {}", rank + 1, fields.len()),
            ));
        }
        coord.clear();
        for f in &fields[..rank] {
            coord.push(
                f.parse::<usize>()
                    .map_err(|_| parse_err(n, format!("bad index {f:?}")))?,
            );
        }
        let v = fields[rank];
        data.push(v.parse::<f64>().map_err(|_| parse_err(n, format!("bad value {v:?}")))?);
        indices.push_row(&coord);
    }
    SparseTensor::new(shape, indices, data)
}

pub fn read_sparse<R: Read>(mut reader: R) -> Result<SparseTensor, ReadError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    Ok(parse_sparse(&text)?)
}

/// Canonical text rendering.
pub fn format_sparse(t: &SparseTensor) -> String {
    let t = ensure_canonical(t);
    let mut out = String::from("shape");
    for k in t.shape() {
        write!(out, " {k}").unwrap();
    }
    out.push('\n');
    for (r, v) in t.indices().rows().zip(t.data()) {
        for i in r {
            write!(out, "{i} ").unwrap();
        }
        writeln!(out, "{v:e}").unwrap();
    }
    out
}

pub fn write_sparse<W: Write>(mut writer: W, t: &SparseTensor) -> io::Result<()> {
    writer.write_all(format_sparse(t).as_bytes())
}

/// Failure while reading a tensor from a stream.
#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Format(#[from] Error),
}
