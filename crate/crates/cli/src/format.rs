//! File formats.
//!
//! Matrices are JSON objects `{ "dim": d, "entries": [[[re, im], ...], ...] }`
//! in row-major order. Observables are either such a matrix (Hermitian, to be
//! decomposed) or `{ "eigenvalues": [...], "projectors": [matrix, ...] }`.
//! Report floats are written with 17 significant digits so that parsing a
//! report recovers every value bit for bit.

use std::path::Path;

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;

use qnd_core::{spectral_decompose, Complex64, ComplexMatrix, DensityOperator, Observable};

use crate::error::CliError;

/// `f64` serialized as `{:.16e}`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

/// Serializable matrix in the documented file format.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<Vec<[Num; 2]>>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.dim(),
            entries: m
                .to_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|z| [Num(z.re), Num(z.im)]).collect())
                .collect(),
        }
    }
}

impl From<&DensityOperator> for MatrixFile {
    fn from(rho: &DensityOperator) -> Self {
        Self::from(rho.matrix())
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from(m)).expect("matrix serializes")
}

fn parse_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, format!("malformed JSON: {e}")))
}

fn parse_entry(path: &Path, row: usize, col: usize, value: &Value) -> Result<Complex64, CliError> {
    let pair = value
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| parse_error(path, format!("entry ({row}, {col}) must be [re, im]")))?;
    let part = |v: &Value| {
        v.as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_error(path, format!("entry ({row}, {col}) is not a finite number pair")))
    };
    Ok(Complex64::new(part(&pair[0])?, part(&pair[1])?))
}

/// Parses a matrix object already loaded from `path`.
pub fn matrix_from_value(path: &Path, value: &Value) -> Result<ComplexMatrix, CliError> {
    let obj = value
        .as_object()
        .ok_or_else(|| parse_error(path, "matrix must be a JSON object"))?;
    let dim = obj
        .get("dim")
        .and_then(Value::as_u64)
        .filter(|&d| d >= 1)
        .ok_or_else(|| parse_error(path, "\"dim\" must be a positive integer"))? as usize;
    let rows = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error(path, "\"entries\" must be an array of rows"))?;
    if rows.len() != dim {
        return Err(parse_error(
            path,
            format!("matrix is not square: {} rows for dim {dim}", rows.len()),
        ));
    }
    let mut parsed = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| parse_error(path, format!("row {i} is not an array")))?;
        if row.len() != dim {
            return Err(parse_error(
                path,
                format!("row {i} has {} entries, expected {dim}", row.len()),
            ));
        }
        parsed.push(
            row.iter()
                .enumerate()
                .map(|(j, v)| parse_entry(path, i, j, v))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(ComplexMatrix::from_rows(&parsed)?)
}

pub fn parse_matrix_file(path: &Path) -> Result<ComplexMatrix, CliError> {
    matrix_from_value(path, &read_json(path)?)
}

pub fn parse_state_file(path: &Path) -> Result<DensityOperator, CliError> {
    Ok(DensityOperator::new(parse_matrix_file(path)?)?)
}

/// Matrix files are decomposed with `cluster_tol`; spectral files are
/// validated with it.
pub fn parse_observable_file(path: &Path, cluster_tol: f64) -> Result<Observable, CliError> {
    let value = read_json(path)?;
    let obj = value
        .as_object()
        .ok_or_else(|| parse_error(path, "observable must be a JSON object"))?;
    if obj.contains_key("entries") {
        let h = matrix_from_value(path, &value)?;
        return Ok(spectral_decompose(&h, cluster_tol)?);
    }
    let eigenvalues = obj
        .get("eigenvalues")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error(path, "expected \"entries\" or \"eigenvalues\""))?
        .iter()
        .map(|v| {
            v.as_f64()
                .ok_or_else(|| parse_error(path, "eigenvalues must be numbers"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let projectors = obj
        .get("projectors")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error(path, "\"projectors\" must be an array of matrices"))?
        .iter()
        .map(|v| matrix_from_value(path, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Observable::from_parts_with_tol(eigenvalues, projectors, cluster_tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn identity_file() {
        let f = write(r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#);
        assert_eq!(parse_matrix_file(f.path()).unwrap(), ComplexMatrix::identity(2));
    }

    #[test]
    fn ragged_row_named() {
        let f = write(r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0]]]}"#);
        let err = parse_matrix_file(f.path()).unwrap_err();
        assert!(err.to_string().contains("row 1 has 1 entries"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn complex_entry() {
        let f = write(r#"{"dim": 1, "entries": [[[0.5, 0.5]]]}"#);
        let m = parse_matrix_file(f.path()).unwrap();
        assert_eq!(m[(0, 0)], Complex64::new(0.5, 0.5));
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            "not json",
            r#"{"dim": 0, "entries": []}"#,
            r#"{"dim": 2, "entries": [[[1, 0], [0, 0]]]}"#,
            r#"{"dim": 1, "entries": [[[1, 0, 3]]]}"#,
            r#"{"dim": 1, "entries": [[["a", 0]]]}"#,
            r#"{"dim": 1, "entries": [[[1e400, 0]]]}"#,
        ] {
            let f = write(text);
            let err = parse_matrix_file(f.path()).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}: {err}");
        }
    }

    #[test]
    fn missing_file_is_io() {
        let err = parse_matrix_file(Path::new("/nonexistent/qnd.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn observable_both_forms() {
        let matrix = write(r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}"#);
        let spectral = write(
            r#"{"eigenvalues": [1, -1], "projectors": [
                {"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
                {"dim": 2, "entries": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}]}"#,
        );
        let a = parse_observable_file(matrix.path(), 1e-8).unwrap();
        let b = parse_observable_file(spectral.path(), 1e-8).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        for (p, q) in a.projectors().iter().zip(b.projectors()) {
            assert!(p.max_abs_diff(q) < 1e-15);
        }
    }

    #[test]
    fn seventeen_digit_floats() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
        let json = serde_json::to_string(&vec![Num(1.0 / 3.0), Num(f64::NAN)]).unwrap();
        assert_eq!(json, "[3.3333333333333331e-1,null]");
    }

    // Matrices written by `matrix_to_json` parse back to identical bits.
    #[test]
    fn matrices_roundtrip() {
        for seed in 0..64u64 {
            let dim = 1 + (seed as usize % 6);
            let m = qnd_core::random::random_matrix(dim, seed);
            let f = write(&matrix_to_json(&m));
            let back = parse_matrix_file(f.path()).unwrap();
            assert_eq!(back, m);
        }
        let extremes = [f64::MIN_POSITIVE, 5e-324, f64::MAX, -0.0, 1e-300, 123456789.12345679];
        for x in extremes {
            assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
