//! Matrix Market I/O: coordinate files for matrices, array files or plain
//! text for vectors.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};
use crate::sparse::SparseMatrix;
use crate::vector::DenseVector;

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

fn parse_header(line: &str, lineno: usize) -> Result<(bool, Field, Symmetry)> {
    let mut tok = line.split_whitespace();
    if tok.next() != Some("%%MatrixMarket") {
        return Err(parse_err(lineno, "header must start with %%MatrixMarket"));
    }
    if tok.next() != Some("matrix") {
        return Err(parse_err(lineno, "object must be \"matrix\""));
    }
    let coordinate = match tok.next() {
        Some("coordinate") => true,
        Some("array") => false,
        other => {
            return Err(parse_err(
                lineno,
                format!("format must be \"coordinate\" or \"array\", got {other:?}"),
            ))
        }
    };
    let field = match tok.next() {
        Some("real") => Field::Real,
        Some("complex") => Field::Complex,
        other => {
            return Err(parse_err(
                lineno,
                format!("field must be \"real\" or \"complex\", got {other:?}"),
            ))
        }
    };
    let symmetry = match tok.next() {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some("hermitian") => Symmetry::Hermitian,
        other => {
            return Err(parse_err(
                lineno,
                format!(
                    "symmetry must be \"general\", \"symmetric\" or \"hermitian\", got {other:?}"
                ),
            ))
        }
    };
    Ok((coordinate, field, symmetry))
}

/// Load a square matrix from a Matrix Market coordinate file.
///
/// Symmetric and hermitian files are expanded to full storage. Duplicate
/// entries (including an explicit mirror of an expanded entry) are an error.
pub fn load_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<SparseMatrix<T>> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let (lineno, header) = match lines.next() {
        Some((idx, line)) => (idx + 1, line?),
        None => return Err(parse_err(1, "empty file")),
    };
    let (coordinate, field, symmetry) = parse_header(&header, lineno)?;
    if !coordinate {
        return Err(parse_err(lineno, "matrices must use coordinate format"));
    }

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, C<T>)> = Vec::new();
    let mut seen: std::collections::HashMap<(usize, usize), usize> = std::collections::HashMap::new();
    let mut parsed = 0usize;

    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if dims.is_none() {
            if toks.len() != 3 {
                return Err(parse_err(lineno, "size line must be \"rows cols nnz\""));
            }
            let m: usize = toks[0]
                .parse()
                .map_err(|_| parse_err(lineno, "cannot parse row count"))?;
            let n: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(lineno, "cannot parse column count"))?;
            let nnz: usize = toks[2]
                .parse()
                .map_err(|_| parse_err(lineno, "cannot parse entry count"))?;
            if m == 0 || n == 0 {
                return Err(parse_err(lineno, "dimensions must be positive"));
            }
            if m != n {
                return Err(parse_err(lineno, format!("matrix must be square, got {m}x{n}")));
            }
            dims = Some((m, n, nnz));
            continue;
        }

        let (n, _, nnz) = (dims.unwrap().0, dims.unwrap().1, dims.unwrap().2);
        if parsed == nnz {
            return Err(parse_err(lineno, "more entries than declared"));
        }
        let expected_toks = match field {
            Field::Real => 3,
            Field::Complex => 4,
        };
        if toks.len() != expected_toks {
            return Err(parse_err(
                lineno,
                format!("expected {expected_toks} tokens, got {}", toks.len()),
            ));
        }
        let i: usize = toks[0]
            .parse()
            .map_err(|_| parse_err(lineno, "cannot parse row index"))?;
        let j: usize = toks[1]
            .parse()
            .map_err(|_| parse_err(lineno, "cannot parse column index"))?;
        if i < 1 || i > n || j < 1 || j > n {
            return Err(parse_err(lineno, format!("index ({i}, {j}) out of range for dimension {n}")));
        }
        let re = parse_f64(toks[2], lineno, "real part")?;
        let im = match field {
            Field::Real => 0.0,
            Field::Complex => parse_f64(toks[3], lineno, "imaginary part")?,
        };
        let (i, j) = (i - 1, j - 1);
        let v = C::new(T::lit(re), T::lit(im));

        if let Some(prev) = seen.insert((i, j), lineno) {
            return Err(parse_err(
                lineno,
                format!("duplicate entry ({}, {}), first seen at line {prev}", i + 1, j + 1),
            ));
        }
        triplets.push((i, j, v));
        if symmetry != Symmetry::General && i != j {
            let mirror = match symmetry {
                Symmetry::Symmetric => v,
                Symmetry::Hermitian => v.conj(),
                Symmetry::General => unreachable!(),
            };
            if let Some(prev) = seen.insert((j, i), lineno) {
                return Err(parse_err(
                    lineno,
                    format!(
                        "entry ({}, {}) duplicates the expansion of line {prev}",
                        i + 1,
                        j + 1
                    ),
                ));
            }
            triplets.push((j, i, mirror));
        }
        parsed += 1;
    }

    let (n, _, nnz) = dims.ok_or_else(|| parse_err(0, "missing size line"))?;
    if parsed != nnz {
        return Err(parse_err(0, format!("declared {nnz} entries, found {parsed}")));
    }
    SparseMatrix::from_triplets(n, triplets)
}

/// Save a matrix as a Matrix Market coordinate file with full (general)
/// storage. Values are written in shortest round-trip decimal form, so a
/// load of the saved file reproduces the matrix exactly.
pub fn save_matrix_market<T: Scalar>(a: &SparseMatrix<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    let all_real = a.values().iter().all(|v| v.im == T::zero());
    let field = if all_real { "real" } else { "complex" };
    writeln!(out, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(out, "{} {} {}", a.dim(), a.dim(), a.nnz())?;
    for (i, j, v) in a.entries() {
        if all_real {
            writeln!(out, "{} {} {}", i + 1, j + 1, v.re.to_f64_lossy())?;
        } else {
            writeln!(
                out,
                "{} {} {} {}",
                i + 1,
                j + 1,
                v.re.to_f64_lossy(),
                v.im.to_f64_lossy()
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Save a vector as plain text, one entry per line ("re im").
pub fn save_vector_plain<T: Scalar>(v: &DenseVector<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    for e in v.entries() {
        writeln!(out, "{} {}", e.re.to_f64_lossy(), e.im.to_f64_lossy())?;
    }
    out.flush()?;
    Ok(())
}

/// Save a vector in Matrix Market array format.
pub fn save_vector_market<T: Scalar>(v: &DenseVector<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(out, "%%MatrixMarket matrix array complex general")?;
    writeln!(out, "{} 1", v.len())?;
    for e in v.entries() {
        writeln!(out, "{} {}", e.re.to_f64_lossy(), e.im.to_f64_lossy())?;
    }
    out.flush()?;
    Ok(())
}

/// Load a vector from either Matrix Market array format or plain text
/// ("re" or "re im" per line); the format is detected from the first line.
pub fn load_vector<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseVector<T>> {
    let file = File::open(path.as_ref())?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate().peekable();

    let is_market = match lines.peek() {
        Some((_, Ok(first))) => first.starts_with("%%MatrixMarket"),
        _ => false,
    };

    let mut expected: Option<usize> = None;
    if is_market {
        let (idx, line) = lines.next().unwrap();
        let (coordinate, _field, symmetry) = parse_header(&line?, idx + 1)?;
        if coordinate {
            return Err(parse_err(idx + 1, "vectors must use array format"));
        }
        if symmetry != Symmetry::General {
            return Err(parse_err(idx + 1, "vectors must use general symmetry"));
        }
        // Size line comes next (skipping comments).
        for (idx, line) in lines.by_ref() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('%') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(parse_err(lineno, "array size line must be \"rows cols\""));
            }
            let rows: usize = toks[0]
                .parse()
                .map_err(|_| parse_err(lineno, "cannot parse row count"))?;
            let cols: usize = toks[1]
                .parse()
                .map_err(|_| parse_err(lineno, "cannot parse column count"))?;
            if cols != 1 {
                return Err(parse_err(lineno, format!("vector must have one column, got {cols}")));
            }
            expected = Some(rows);
            break;
        }
        if expected.is_none() {
            return Err(parse_err(0, "missing array size line"));
        }
    }

    let mut entries: Vec<C<T>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let (re, im) = match toks.len() {
            1 => (parse_f64(toks[0], lineno, "value")?, 0.0),
            2 => (
                parse_f64(toks[0], lineno, "real part")?,
                parse_f64(toks[1], lineno, "imaginary part")?,
            ),
            k => return Err(parse_err(lineno, format!("expected 1 or 2 values, got {k}"))),
        };
        entries.push(C::new(T::lit(re), T::lit(im)));
    }
    if let Some(n) = expected {
        if entries.len() != n {
            return Err(parse_err(
                0,
                format!("declared {n} entries, found {}", entries.len()),
            ));
        }
    }
    if entries.is_empty() {
        return Err(parse_err(0, "vector file has no entries"));
    }
    Ok(DenseVector::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn identity_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("eye.mtx");
        let a = SparseMatrix::<f64>::identity(2);
        save_matrix_market(&a, &path).unwrap();
        let b: SparseMatrix<f64> = load_matrix_market(&path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_file_is_expanded() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sym.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1.0\n2 2 1.0\n2 1 5.0\n",
        )
        .unwrap();
        let a: SparseMatrix<f64> = load_matrix_market(&path).unwrap();
        assert_eq!(a.get(1, 0).re, 5.0);
        assert_eq!(a.get(0, 1).re, 5.0);
    }

    #[test]
    fn hermitian_file_conjugates_mirror() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("herm.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate complex hermitian\n2 2 3\n1 1 2.0 0.0\n2 2 3.0 0.0\n2 1 0.0 1.0\n",
        )
        .unwrap();
        let a: SparseMatrix<f64> = load_matrix_market(&path).unwrap();
        assert_eq!(a.get(1, 0), C::new(0.0, 1.0));
        assert_eq!(a.get(0, 1), C::new(0.0, -1.0));
        assert!(a.is_hermitian());
    }

    #[test]
    fn duplicate_entries_are_an_error_with_line() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("dup.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n1 1 2.0\n2 2 1.0\n",
        )
        .unwrap();
        match load_matrix_market::<f64>(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_is_an_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        std::fs::write(&path, "%%NotMatrixMarket nope\n1 1 1\n1 1 1.0\n").unwrap();
        assert!(matches!(
            load_matrix_market::<f64>(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("range.mtx");
        std::fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        )
        .unwrap();
        assert!(matches!(
            load_matrix_market::<f64>(&path),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn vector_round_trips_both_formats() {
        let dir = tempdir().unwrap();
        let v = DenseVector::new(vec![C::new(1.5f64, -2.0), C::new(0.25, 0.125)]);

        let plain = dir.path().join("v.txt");
        save_vector_plain(&v, &plain).unwrap();
        let w: DenseVector<f64> = load_vector(&plain).unwrap();
        assert_eq!(v, w);

        let market = dir.path().join("v.mtx");
        save_vector_market(&v, &market).unwrap();
        let w: DenseVector<f64> = load_vector(&market).unwrap();
        assert_eq!(v, w);
    }
}
