//! Plain-text matrix CSV: one row per line, comma-separated values,
//! `#` comment and blank lines skipped.
//!
//! Values are written with the shortest round-trip `f64` formatting, so
//! parse(write(m)) reproduces `m` exactly.

use std::io::{self, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("no matrix rows found")]
    Empty,

    #[error("line {line}: invalid number {token:?}")]
    BadNumber { line: usize, token: String },

    #[error("line {line}: non-finite value {token:?}")]
    NonFinite { line: usize, token: String },

    #[error("line {line}: expected {expected} values per row, found {found}")]
    Ragged { line: usize, expected: usize, found: usize },
}

/// Parses comma-separated rows of finite `f64` values. All rows must have
/// the same length.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for token in content.split(',') {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| CsvError::BadNumber {
                line,
                token: token.to_owned(),
            })?;
            if !value.is_finite() {
                return Err(CsvError::NonFinite { line, token: token.to_owned() });
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CsvError::Ragged { line, expected: first.len(), found: row.len() });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(rows)
}

/// Writes rows as comma-separated values, one row per line.
pub fn write_matrix<W: Write>(mut w: W, rows: &[Vec<f64>]) -> io::Result<()> {
    for row in rows {
        let mut first = true;
        for v in row {
            if first {
                first = false;
            } else {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
