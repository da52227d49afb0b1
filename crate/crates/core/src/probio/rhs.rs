use std::fs;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Reads right-hand sides, one `[b; c]` vector of length `m + n` per line.
/// Values are separated by whitespace or commas; `%` and `#` start comments.
pub fn read_rhs_file(path: impl AsRef<Path>, m: usize, n: usize) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    parse_rhs_text(&fs::read_to_string(path)?, &path.display().to_string(), m, n)
}

pub fn parse_rhs_text(text: &str, name: &str, m: usize, n: usize) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| Error::parse(name, i + 1, format!("bad value '{s}'"))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != m + n {
            return Err(Error::parse(
                name,
                i + 1,
                format!("expected {} values, found {}", m + n, vals.len()),
            ));
        }
        out.push((
            DVector::from_column_slice(&vals[..m]),
            DVector::from_column_slice(&vals[m..]),
        ));
    }
    if out.is_empty() {
        return Err(Error::parse(name, 1, "no right-hand sides"));
    }
    Ok(out)
}
