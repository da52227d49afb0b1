use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::opcore::SparseMatrix;

/// Reads a real coordinate MatrixMarket file; symmetric files are expanded.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path)?;
    parse_matrix_market(&text, &path.display().to_string())
}

/// Parses MatrixMarket text; `name` labels error messages.
pub fn parse_matrix_market(text: &str, name: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(name, 1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(name, 1, "expected '%%MatrixMarket matrix ...' header"));
    }
    if fields[2] != "coordinate" {
        return Err(Error::parse(name, 1, format!("unsupported format '{}'", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::parse(name, 1, format!("unsupported field '{}'", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::parse(name, 1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut entries = 0usize;
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some((rows, cols, nnz)) = size else {
            if toks.len() != 3 {
                return Err(Error::parse(name, lineno, "expected 'rows cols nnz' size line"));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::parse(name, lineno, format!("bad integer '{s}'")))
            };
            let dims = (parse(toks[0])?, parse(toks[1])?, parse(toks[2])?);
            if dims.0 == 0 || dims.1 == 0 {
                return Err(Error::parse(name, lineno, "matrix dimensions must be positive"));
            }
            if symmetric && dims.0 != dims.1 {
                return Err(Error::parse(name, lineno, "symmetric matrix must be square"));
            }
            size = Some(dims);
            triplets.reserve(if symmetric { 2 * dims.2 } else { dims.2 });
            continue;
        };
        if toks.len() != 3 {
            return Err(Error::parse(name, lineno, "expected 'row col value'"));
        }
        let r: usize = toks[0]
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad row index '{}'", toks[0])))?;
        let c: usize = toks[1]
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad column index '{}'", toks[1])))?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad value '{}'", toks[2])))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(Error::parse(name, lineno, format!("index ({r}, {c}) outside {rows}x{cols}")));
        }
        entries += 1;
        if entries > nnz {
            return Err(Error::parse(name, lineno, format!("more entries than the declared {nnz}")));
        }
        triplets.push((r - 1, c - 1, v));
        if symmetric && r != c {
            triplets.push((c - 1, r - 1, v));
        }
    }
    let Some((rows, cols, nnz)) = size else {
        return Err(Error::parse(name, text.lines().count(), "missing size line"));
    };
    if entries != nnz {
        return Err(Error::parse(
            name,
            text.lines().count(),
            format!("header declares {nnz} entries, found {entries}"),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}

/// Writes `a` in general coordinate format with round-trip precision.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for (r, c, v) in a.triplets() {
        let _ = writeln!(out, "{} {} {:e}", r + 1, c + 1, v);
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_file() {
        let a = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 2.0\n",
            "t",
        )
        .unwrap();
        assert_eq!(a.diagonal(), vec![1.0, 2.0]);
    }

    #[test]
    fn symmetric_expanded() {
        let a = parse_matrix_market(
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4.0\n2 1 1.5\n",
            "t",
        )
        .unwrap();
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.to_dense()[(0, 1)], 1.5);
    }

    #[test]
    fn errors_name_lines() {
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n", "f.mtx")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", "f.mtx")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n", "f.mtx").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n", "f.mtx").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
