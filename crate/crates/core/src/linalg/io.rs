//! Plain-text matrix CSV: one row per line, comma-separated decimal literals,
//! an optional leading `#` header line. Values are written with 17
//! significant digits so `f64` round-trips exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::matrix::{DenseMatrix, SymMatrix};
use crate::scalar::Scalar;

/// How to treat a square matrix read from text that is not exactly symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryPolicy {
    Strict,
    Symmetrize,
}

pub fn read_dense_csv<T: Scalar, R: Read>(reader: R) -> Result<DenseMatrix<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::Parse(format!("row {} has {} fields, expected {c}", line + 1, rec.len())))
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|e| Error::Parse(format!("row {}: `{field}`: {e}", line + 1)))?;
            data.push(T::lit(v));
        }
        rows += 1;
    }
    DenseMatrix::new(rows, cols.unwrap_or(0), data)
}

pub fn write_dense_csv<T: Scalar, W: Write>(writer: W, m: &DenseMatrix<T>, header: Option<&str>) -> Result<()> {
    let mut w = BufWriter::new(writer);
    if let Some(h) = header {
        writeln!(w, "# {h}")?;
    }
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sym_csv<T: Scalar, R: Read>(reader: R, policy: SymmetryPolicy) -> Result<SymMatrix<T>> {
    let m = read_dense_csv::<T, _>(reader)?;
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
    }
    match policy {
        SymmetryPolicy::Strict => SymMatrix::new(m.rows(), m.as_slice().to_vec()),
        SymmetryPolicy::Symmetrize => SymMatrix::symmetrize(m.rows(), m.as_slice()),
    }
}

pub fn read_sym_csv_file<T: Scalar>(path: impl AsRef<Path>, policy: SymmetryPolicy) -> Result<SymMatrix<T>> {
    read_sym_csv(BufReader::new(File::open(path)?), policy)
}

pub fn write_sym_csv_file<T: Scalar>(path: impl AsRef<Path>, m: &SymMatrix<T>, header: Option<&str>) -> Result<()> {
    write_dense_csv(File::create(path)?, &DenseMatrix::from_sym(m), header)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_round_trip() {
        let m = SymMatrix::from_rows(&[vec![1.0 / 3.0, -0.1], vec![-0.1, 2.0e-300]]).unwrap();
        let mut buf = Vec::new();
        write_dense_csv(&mut buf, &DenseMatrix::from_sym(&m), Some("theta")).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# theta\n"));
        let back: SymMatrix<f64> = read_sym_csv(&buf[..], SymmetryPolicy::Strict).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn asymmetric_input_policy() {
        let text = "1,0.5\n0.4,1\n";
        assert!(matches!(
            read_sym_csv::<f64, _>(text.as_bytes(), SymmetryPolicy::Strict),
            Err(Error::NotSymmetric { .. })
        ));
        let m: SymMatrix<f64> = read_sym_csv(text.as_bytes(), SymmetryPolicy::Symmetrize).unwrap();
        assert!((m.get(0, 1) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(read_dense_csv::<f64, _>("1,2\n3\n".as_bytes()).is_err());
        assert!(read_dense_csv::<f64, _>("1,x\n".as_bytes()).is_err());
    }
}
