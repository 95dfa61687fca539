//! Flat-file exchange formats: dense text matrices (with MatrixMarket array
//! input support), vectors as single-column matrices, and the fixed-schema
//! trace CSV emitted by solver runs.
//!
//! Floats are written in shortest-roundtrip scientific notation, so writing
//! and re-reading a matrix is bit-exact and identical inputs produce
//! byte-identical files.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rqi::TraceRow;
use std::fmt::Write as _;
use std::path::Path;

/// Header line of every per-iteration trace CSV.
pub const TRACE_CSV_HEADER: &str = "k,sigma2,psi,rerrx,rerrs,inner1,inner2";

/// Serializes a matrix to the dense text format: `m n` on the first line,
/// then m rows of n space-separated values.
pub fn matrix_to_text(a: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", a.rows(), a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:e}", a[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Parses either the dense text format or a MatrixMarket dense array file
/// (sniffed via the `%%MatrixMarket` banner).
pub fn matrix_from_text(text: &str) -> Result<Matrix> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(text)
    } else {
        parse_dense_text(text)
    }
}

fn parse_value(tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Io(format!("unparseable {what} {tok:?}")))
}

fn parse_usize(tok: &str, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Io(format!("unparseable {what} {tok:?}")))
}

fn parse_dense_text(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Io("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    let m = parse_usize(parts.next().unwrap_or(""), "row count")?;
    let n = parse_usize(parts.next().unwrap_or(""), "column count")?;
    if parts.next().is_some() {
        return Err(Error::Io("matrix header must be exactly \"m n\"".into()));
    }
    let mut a = Matrix::zeros(m, n);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Io(format!("matrix file ends after {i} of {m} rows")))?;
        let mut toks = line.split_whitespace();
        for j in 0..n {
            let tok = toks
                .next()
                .ok_or_else(|| Error::Io(format!("row {i} has fewer than {n} values")))?;
            a[(i, j)] = parse_value(tok, "matrix entry")?;
        }
        if toks.next().is_some() {
            return Err(Error::Io(format!("row {i} has more than {n} values")));
        }
    }
    if lines.next().is_some() {
        return Err(Error::Io(format!("matrix file has more than {m} rows")));
    }
    Ok(a)
}

/// MatrixMarket `matrix array real general`: entries listed column by column.
fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines();
    let banner = lines.next().unwrap_or_default().to_ascii_lowercase();
    let fields: Vec<&str> = banner.split_whitespace().collect();
    if fields.len() < 4 || fields[1] != "matrix" || fields[2] != "array" {
        return Err(Error::Io(
            "only the MatrixMarket dense array format is supported".into(),
        ));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::Io(format!(
            "unsupported MatrixMarket field type {:?}",
            fields[3]
        )));
    }
    if let Some(sym) = fields.get(4) {
        if *sym != "general" {
            return Err(Error::Io(format!(
                "unsupported MatrixMarket symmetry {sym:?}"
            )));
        }
    }
    let mut rest = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let dims = rest
        .next()
        .ok_or_else(|| Error::Io("MatrixMarket file missing size line".into()))?;
    let mut parts = dims.split_whitespace();
    let m = parse_usize(parts.next().unwrap_or(""), "row count")?;
    let n = parse_usize(parts.next().unwrap_or(""), "column count")?;
    let mut values = Vec::with_capacity(m * n);
    for line in rest {
        for tok in line.split_whitespace() {
            values.push(parse_value(tok, "matrix entry")?);
        }
    }
    if values.len() != m * n {
        return Err(Error::Io(format!(
            "MatrixMarket file holds {} entries, expected {}",
            values.len(),
            m * n
        )));
    }
    // Column-major listing matches the internal layout directly.
    let mut a = Matrix::zeros(m, n);
    a.data_mut().copy_from_slice(&values);
    Ok(a)
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    std::fs::write(path, matrix_to_text(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    matrix_from_text(&text)
}

/// Vectors are stored as single-column matrices.
pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut a = Matrix::zeros(v.len(), 1);
    a.data_mut().copy_from_slice(v);
    write_matrix(path, &a)
}

/// Accepts either a single-column or single-row matrix file.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let a = read_matrix(path)?;
    if a.cols() == 1 || a.rows() == 1 {
        Ok(a.as_slice().to_vec())
    } else {
        Err(Error::Io(format!(
            "{}: expected a vector, found a {}x{} matrix",
            path.display(),
            a.rows(),
            a.cols()
        )))
    }
}

fn push_trace_row(out: &mut String, row: &TraceRow) {
    let _ = writeln!(
        out,
        "{},{:e},{:e},{:e},{:e},{},{}",
        row.k, row.sigma_sq, row.psi, row.rerrx, row.rerrs, row.inner1, row.inner2
    );
}

/// Renders the per-iteration trace with the fixed header.
pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for row in trace {
        push_trace_row(&mut out, row);
    }
    out
}

/// Long-format CSV for side-by-side runs: a leading `variant` column tags
/// each labeled trace.
pub fn compare_to_csv(labeled: &[(&str, &[TraceRow])]) -> String {
    let mut out = format!("variant,{TRACE_CSV_HEADER}\n");
    for (label, trace) in labeled {
        for row in *trace {
            let _ = write!(out, "{label},");
            push_trace_row(&mut out, row);
        }
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sample() -> Matrix {
        Matrix::from_rows(&[vec![1.0, -2.5, 3.0e-8], vec![0.1, 4.0, -5.0e120]]).unwrap()
    }

    #[test]
    fn dense_text_roundtrip_is_exact() {
        let a = sample();
        let text = matrix_to_text(&a);
        assert!(text.starts_with("2 3\n"));
        let b = matrix_from_text(&text).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        // Serializing again yields the identical bytes.
        assert_eq!(text, matrix_to_text(&b));
    }

    #[test]
    fn dense_text_rejects_malformed_input() {
        assert!(matrix_from_text("").is_err());
        assert!(matrix_from_text("2 2\n1 2\n").is_err());
        assert!(matrix_from_text("1 2\n1 2 3\n").is_err());
        assert!(matrix_from_text("1 2\n1 x\n").is_err());
        assert!(matrix_from_text("1 1\n1\n2\n").is_err());
    }

    #[test]
    fn matrix_market_array_is_read_column_major() {
        let text = "%%MatrixMarket matrix array real general\n\
                    % comment line\n\
                    3 2\n1\n2\n3\n4\n5\n6\n";
        let a = matrix_from_text(text).unwrap();
        assert_eq!(a.rows(), 3);
        assert_eq!(a.cols(), 2);
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(2, 0)], 3.0);
        assert_eq!(a[(0, 1)], 4.0);
        assert_eq!(a[(2, 1)], 6.0);
    }

    #[test]
    fn matrix_market_rejects_unsupported_variants() {
        assert!(matrix_from_text("%%MatrixMarket matrix coordinate real general\n1 1 1\n").is_err());
        assert!(matrix_from_text("%%MatrixMarket matrix array complex general\n1 1\n1 0\n").is_err());
        assert!(matrix_from_text("%%MatrixMarket matrix array real symmetric\n1 1\n1\n").is_err());
        assert!(matrix_from_text("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").is_err());
    }

    #[test]
    fn vector_files_roundtrip() {
        let dir = std::env::temp_dir().join("mptls_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("v.txt");
        let v = vec![1.5, -2.0, 3.25e-4];
        write_vector(&path, &v).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
        // A row vector is accepted too.
        std::fs::write(&path, "1 3\n1 2 3\n").unwrap();
        assert_eq!(read_vector(&path).unwrap(), vec![1.0, 2.0, 3.0]);
        // A full matrix is not.
        std::fs::write(&path, "2 2\n1 2\n3 4\n").unwrap();
        assert!(read_vector(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn trace_csv_has_fixed_schema() {
        let row = TraceRow {
            k: 2,
            sigma_sq: 0.25,
            psi: 1.0e-8,
            rerrx: 3.0e-12,
            rerrs: 4.0e-10,
            inner1: 3,
            inner2: 3,
            flops_by_format: BTreeMap::new(),
        };
        let csv = trace_to_csv(&[row.clone()]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "k,sigma2,psi,rerrx,rerrs,inner1,inner2");
        assert_eq!(lines.next().unwrap(), "2,2.5e-1,1e-8,3e-12,4e-10,3,3");
        assert!(lines.next().is_none());

        let long = compare_to_csv(&[("uniform", &[row.clone()][..]), ("mp", &[row][..])]);
        assert!(long.starts_with("variant,k,"));
        assert_eq!(long.lines().count(), 3);
        assert!(long.contains("\nuniform,2,"));
        assert!(long.contains("\nmp,2,"));
    }
}
