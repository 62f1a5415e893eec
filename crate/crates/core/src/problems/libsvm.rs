//! LIBSVM / SVMlight sparse text format.
//!
//! ```text
//! +1 3:1 11:1 14:1
//! -1 5:0.5 7:2   # trailing comments are ignored
//! ```
//!
//! Indices are 1-based and strictly ascending within a line. Internally
//! they are stored 0-based.

use std::fmt::Write as _;
use std::io::BufRead;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: f64,
    /// `(index, value)` pairs, 0-based, ascending.
    pub features: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Row>,
    /// One past the largest index seen.
    pub n_features: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.features.len()).sum()
    }
}

pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut ds = Dataset::default();
    for (i, line) in text.lines().enumerate() {
        parse_line(line, i + 1, &mut ds)?;
    }
    Ok(ds)
}

pub fn read_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut ds = Dataset::default();
    for (i, line) in reader.lines().enumerate() {
        parse_line(&line?, i + 1, &mut ds)?;
    }
    Ok(ds)
}

fn parse_line(line: &str, lineno: usize, ds: &mut Dataset) -> Result<()> {
    let err = |reason: String| Error::Parse { line: lineno, reason };
    let content = line.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(());
    }
    let mut tokens = content.split_whitespace();
    let label_tok = tokens.next().unwrap();
    let label: f64 = label_tok.parse().map_err(|_| err(format!("bad label `{label_tok}`")))?;
    if !label.is_finite() {
        return Err(err(format!("non-finite label `{label_tok}`")));
    }

    let mut features = Vec::new();
    let mut prev: Option<usize> = None;
    for tok in tokens {
        let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| err(format!("missing `:` in `{tok}`")))?;
        let idx: usize = idx_s.parse().map_err(|_| err(format!("bad index `{idx_s}`")))?;
        if idx == 0 {
            return Err(err("indices are 1-based".into()));
        }
        let val: f64 = val_s.parse().map_err(|_| err(format!("bad value `{val_s}`")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite value `{val_s}`")));
        }
        let idx = idx - 1;
        if let Some(p) = prev {
            if idx == p {
                return Err(err(format!("duplicate index {}", idx + 1)));
            }
            if idx < p {
                return Err(err(format!("index {} after {} is not ascending", idx + 1, p + 1)));
            }
        }
        prev = Some(idx);
        features.push((idx, val));
    }
    if let Some(p) = prev {
        ds.n_features = ds.n_features.max(p + 1);
    }
    ds.rows.push(Row { label, features });
    Ok(())
}

/// Writes a dataset back out; `parse_libsvm` of the result reproduces it.
pub fn to_libsvm_string(ds: &Dataset) -> String {
    let mut out = String::new();
    for row in &ds.rows {
        if row.label == 1.0 {
            out.push_str("+1");
        } else if row.label == -1.0 {
            out.push_str("-1");
        } else {
            write!(out, "{}", row.label).unwrap();
        }
        for (i, v) in &row.features {
            write!(out, " {}:{}", i + 1, v).unwrap();
        }
        out.push('\n');
    }
    out
}
