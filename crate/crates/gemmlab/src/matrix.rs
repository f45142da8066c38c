//! Dense row-major matrix storage and the operations every other module
//! builds on: construction, transposition, tolerance comparison, CSV I/O.

use std::fs::File;
use std::io::{BufWriter, Read as _, Write as _};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A dense matrix of reals, stored row-major: element (i, j) lives at
/// `data[i * cols + j]`.
///
/// Dimensions are always at least 1x1 and `data.len() == rows * cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    /// Creates a rows x cols matrix with every element exactly zero.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        Ok(Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        })
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::DataLengthMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// The n x n identity matrix.
    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        Ok(m)
    }

    fn check_dims(rows: usize, cols: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimensions { rows, cols });
        }
        if rows.checked_mul(cols).is_none() {
            return Err(Error::DimensionOverflow { rows, cols });
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    /// Row-major view of the backing storage.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// One contiguous row.
    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Returns the cols x rows matrix with result(j, i) = self(i, j).
    pub fn transpose(&self) -> Matrix<T> {
        let mut out = vec![T::zero(); self.data.len()];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (j, &v) in row.iter().enumerate() {
                out[j * self.rows + i] = v;
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// Square root of the sum of squared elements.
    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    }

    /// Relative Frobenius distance: ||self - other|| over the larger of the
    /// two norms (floored at 1e-300 so all-zero matrices stay comparable).
    /// Symmetric in its arguments; `None` on a shape mismatch.
    pub fn relative_error(&self, other: &Matrix<T>) -> Option<T> {
        if self.shape() != other.shape() {
            return None;
        }
        let diff = self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| {
                let d = a - b;
                acc + d * d
            })
            .sqrt();
        let scale = self.frobenius_norm().max(other.frobenius_norm());
        Some(diff / norm_guard(scale))
    }

    /// True iff shapes match and the relative Frobenius distance is within
    /// `rel_tol`.
    pub fn approx_equal(&self, other: &Matrix<T>, rel_tol: T) -> bool {
        match self.relative_error(other) {
            Some(err) => err <= rel_tol,
            None => false,
        }
    }

    /// True iff shapes match and every element is bitwise identical.
    pub fn bit_equal(&self, other: &Matrix<T>) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits_u64() == b.to_bits_u64())
    }

    /// Writes the matrix as CSV: one row per line, comma-separated decimals,
    /// `\n` line endings, no header. The decimal form round-trips bit-exactly.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let file = File::create(path).map_err(|e| Error::io(&display, e))?;
        let mut w = BufWriter::new(file);
        let mut line = String::new();
        for i in 0..self.rows {
            line.clear();
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v}"));
            }
            line.push('\n');
            w.write_all(line.as_bytes())
                .map_err(|e| Error::io(&display, e))?;
        }
        w.flush().map_err(|e| Error::io(&display, e))?;
        Ok(())
    }

    /// Reads a matrix written by [`Matrix::save_csv`]. Ragged rows and
    /// malformed tokens are reported with their 1-based row/column position.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(&display, e))?;

        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut cols = 0usize;
        for (idx, line) in text.split('\n').enumerate() {
            if line.is_empty() {
                // Only the trailing newline may leave an empty fragment.
                continue;
            }
            let row_no = idx + 1;
            let mut row = Vec::with_capacity(cols.max(1));
            for (col_idx, token) in line.split(',').enumerate() {
                let value = T::parse_real(token).ok_or_else(|| Error::CsvParse {
                    path: display.clone(),
                    row: row_no,
                    col: col_idx + 1,
                    token: token.to_string(),
                })?;
                row.push(value);
            }
            if cols == 0 {
                cols = row.len();
            } else if row.len() != cols {
                return Err(Error::RaggedRow {
                    path: display,
                    row: row_no,
                    expected: cols,
                    found: row.len(),
                });
            }
            rows.push(row);
        }

        if rows.is_empty() {
            return Err(Error::EmptyDimensions { rows: 0, cols: 0 });
        }
        let n_rows = rows.len();
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Matrix::from_vec(n_rows, cols, data)
    }
}

/// Denominator floor for relative comparisons; 1e-300 when representable,
/// otherwise the type's smallest positive normal.
fn norm_guard<T: Real>(norm: T) -> T {
    let floor = match T::from(1e-300) {
        Some(f) if f > T::zero() => f,
        _ => T::min_positive_value(),
    };
    norm.max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_has_requested_shape_and_zero_elements() {
        let m = Matrix::<f64>::zeros(2, 3).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert!(m.as_slice().iter().all(|&v| v == 0.0));

        let one = Matrix::<f64>::zeros(1, 1).unwrap();
        assert_eq!(one.as_slice(), &[0.0]);

        let big = Matrix::<f64>::zeros(1024, 1024).unwrap();
        assert_eq!(big.as_slice().len(), 1_048_576);
    }

    #[test]
    fn zeros_rejects_bad_dimensions() {
        assert!(matches!(
            Matrix::<f64>::zeros(0, 3),
            Err(Error::EmptyDimensions { rows: 0, cols: 3 })
        ));
        assert!(matches!(
            Matrix::<f64>::zeros(3, 0),
            Err(Error::EmptyDimensions { .. })
        ));
        assert!(matches!(
            Matrix::<f64>::zeros(usize::MAX, 2),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn transpose_hand_checked() {
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = m.transpose();
        assert_eq!(t.as_slice(), &[1.0, 3.0, 2.0, 4.0]);

        let id = Matrix::<f64>::identity(3).unwrap();
        assert!(id.transpose().bit_equal(&id));

        let row = Matrix::from_vec(1, 4, vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let col = row.transpose();
        assert_eq!(col.shape(), (4, 1));
        assert_eq!(col.as_slice(), &[5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn approx_equal_cases() {
        let m = Matrix::from_vec(2, 2, vec![1.0, -2.0, 0.5, 4.0]).unwrap();
        assert!(m.approx_equal(&m, 0.0));

        let a = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let b = Matrix::from_vec(1, 1, vec![1.0 + 1e-15]).unwrap();
        assert!(a.approx_equal(&b, 1e-10));

        let c = Matrix::from_vec(1, 1, vec![1.1]).unwrap();
        assert!(!a.approx_equal(&c, 1e-10));

        // Shape mismatch is inequality, not an error.
        let wide = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        assert!(!a.approx_equal(&wide, 1.0));

        // All-zero matrices compare equal thanks to the denominator guard.
        let z1 = Matrix::<f64>::zeros(3, 3).unwrap();
        let z2 = Matrix::<f64>::zeros(3, 3).unwrap();
        assert!(z1.approx_equal(&z2, 0.0));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = Matrix::from_vec(2, 2, vec![19.0, 22.0, 43.0, 50.0]).unwrap();
        m.save_csv(&path).unwrap();
        let back = Matrix::<f64>::load_csv(&path).unwrap();
        assert!(m.bit_equal(&back));
    }

    #[test]
    fn csv_ragged_row_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "1,2\n3\n").unwrap();
        match Matrix::<f64>::load_csv(&path) {
            Err(Error::RaggedRow {
                row, expected, found, ..
            }) => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            other => panic!("expected ragged-row error, got {other:?}"),
        }
    }

    #[test]
    fn csv_bad_token_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "1,2\n3,abc\n").unwrap();
        match Matrix::<f64>::load_csv(&path) {
            Err(Error::CsvParse { row, col, token, .. }) => {
                assert_eq!((row, col), (2, 2));
                assert_eq!(token, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn csv_missing_file_is_io_error() {
        assert!(matches!(
            Matrix::<f64>::load_csv("/definitely/not/here.csv"),
            Err(Error::Io { .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = Matrix<f64>> {
            (1usize..=6, 1usize..=6)
                .prop_flat_map(|(rows, cols)| {
                    proptest::collection::vec(
                        prop::num::f64::NORMAL | prop::num::f64::ZERO,
                        rows * cols,
                    )
                    .prop_map(move |data| Matrix::from_vec(rows, cols, data).unwrap())
                })
        }

        proptest! {
            #[test]
            fn transpose_involution_is_bit_exact(m in small_matrix()) {
                prop_assert!(m.transpose().transpose().bit_equal(&m));
            }

            #[test]
            fn csv_round_trip_is_bit_exact(m in small_matrix()) {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("m.csv");
                m.save_csv(&path).unwrap();
                let back = Matrix::<f64>::load_csv(&path).unwrap();
                prop_assert!(m.bit_equal(&back));
            }

            #[test]
            fn approx_equal_is_reflexive_and_symmetric(
                m in small_matrix(),
                other in small_matrix(),
                tol in 0.0f64..1.0,
            ) {
                prop_assert!(m.approx_equal(&m, tol));
                prop_assert_eq!(m.approx_equal(&other, tol), other.approx_equal(&m, tol));
            }
        }
    }
}
