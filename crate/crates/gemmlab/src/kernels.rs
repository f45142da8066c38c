//! The four multiplication strategies under study. All compute C = A * B;
//! they differ only in memory-access pattern and parallelism.
//!
//! `naive` is the reference: every other variant is checked against it, bit
//! for bit where the per-element accumulation order is unchanged (prefetch,
//! parallel) and within a relative Frobenius tolerance where blocking may
//! reassociate the sum (tiled).

use std::fmt;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Default tile edge: three 32x32 blocks of f64 occupy 24 KiB, comfortably
/// inside a 32 KiB per-core L1.
pub const DEFAULT_TILE: usize = 32;

/// One multiplication strategy plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelVariant {
    Naive,
    Prefetch,
    Tiled { tile: usize },
    Parallel { workers: usize },
}

impl KernelVariant {
    pub fn name(&self) -> &'static str {
        match self {
            KernelVariant::Naive => "naive",
            KernelVariant::Prefetch => "prefetch",
            KernelVariant::Tiled { .. } => "tiled",
            KernelVariant::Parallel { .. } => "parallel",
        }
    }

    pub fn tile(&self) -> Option<usize> {
        match self {
            KernelVariant::Tiled { tile } => Some(*tile),
            _ => None,
        }
    }

    pub fn workers(&self) -> Option<usize> {
        match self {
            KernelVariant::Parallel { workers } => Some(*workers),
            _ => None,
        }
    }

    /// Runs the variant on the given operands.
    pub fn run<T: Real>(&self, a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
        match *self {
            KernelVariant::Naive => matmul_naive(a, b),
            KernelVariant::Prefetch => matmul_prefetch(a, b),
            KernelVariant::Tiled { tile } => matmul_tiled(a, b, tile),
            KernelVariant::Parallel { workers } => matmul_parallel(a, b, workers),
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelVariant::Naive => write!(f, "naive"),
            KernelVariant::Prefetch => write!(f, "prefetch"),
            KernelVariant::Tiled { tile } => write!(f, "tiled(tile={tile})"),
            KernelVariant::Parallel { workers } => write!(f, "parallel(workers={workers})"),
        }
    }
}

fn check_product_dims<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            lhs_rows: a.rows(),
            lhs_cols: a.cols(),
            rhs_rows: b.rows(),
            rhs_cols: b.cols(),
        });
    }
    Ok(())
}

/// Reference triple loop: i outer, j middle, k inner, one scalar accumulator
/// per output element, terms added in ascending k order.
pub fn matmul_naive<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_product_dims(a, b)?;
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, p)?;
    let a_data = a.as_slice();
    let b_data = b.as_slice();
    let c_data = c.as_mut_slice();
    for i in 0..m {
        let a_row = &a_data[i * n..(i + 1) * n];
        for j in 0..p {
            let mut sum = T::zero();
            for (k, &aik) in a_row.iter().enumerate() {
                sum += aik * b_data[k * p + j];
            }
            c_data[i * p + j] = sum;
        }
    }
    Ok(c)
}

/// Transposes B once so both operands stream row-contiguously, then runs the
/// same dot products. The transpose happens inside the kernel and is part of
/// any timed region. Per-element accumulation order matches `naive`, so the
/// result is bit-identical.
pub fn matmul_prefetch<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    check_product_dims(a, b)?;
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let bt = b.transpose();
    let mut c = Matrix::zeros(m, p)?;
    let c_data = c.as_mut_slice();
    for i in 0..m {
        let a_row = a.row(i);
        for j in 0..p {
            let b_col = bt.row(j);
            let mut sum = T::zero();
            for k in 0..n {
                sum += a_row[k] * b_col[k];
            }
            c_data[i * p + j] = sum;
        }
    }
    Ok(c)
}

/// Cache-tiled loops: the i/k/j nest is blocked and each k-block's partial
/// sums accumulate directly into C. The tile need not divide the dimensions;
/// edge blocks are partial. A tile covering every dimension degenerates to
/// the naive order.
pub fn matmul_tiled<T: Real>(a: &Matrix<T>, b: &Matrix<T>, tile: usize) -> Result<Matrix<T>> {
    if tile == 0 {
        return Err(Error::ZeroTile);
    }
    check_product_dims(a, b)?;
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, p)?;
    let a_data = a.as_slice();
    let b_data = b.as_slice();
    let c_data = c.as_mut_slice();
    for ii in (0..m).step_by(tile) {
        let i_end = (ii + tile).min(m);
        for kk in (0..n).step_by(tile) {
            let k_end = (kk + tile).min(n);
            for jj in (0..p).step_by(tile) {
                let j_end = (jj + tile).min(p);
                for i in ii..i_end {
                    let a_row = i * n;
                    let c_row = i * p;
                    for k in kk..k_end {
                        let aik = a_data[a_row + k];
                        let b_row = k * p;
                        for j in jj..j_end {
                            c_data[c_row + j] += aik * b_data[b_row + j];
                        }
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Row-parallel multiply: output rows are split into `workers` contiguous
/// blocks of ceil(m / workers) rows (the last block short, surplus workers
/// idle). Each thread runs the naive per-element accumulation on its rows
/// with shared read-only access to A and B, so the result is bit-identical
/// to `naive` at any worker count.
pub fn matmul_parallel<T: Real>(a: &Matrix<T>, b: &Matrix<T>, workers: usize) -> Result<Matrix<T>> {
    if workers == 0 {
        return Err(Error::ZeroWorkers);
    }
    check_product_dims(a, b)?;
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    let mut c = Matrix::zeros(m, p)?;
    let rows_per_worker = m.div_ceil(workers);

    let a_data = a.as_slice();
    let b_data = b.as_slice();
    let c_data = c.as_mut_slice();
    thread::scope(|scope| {
        for (block, chunk) in c_data.chunks_mut(rows_per_worker * p).enumerate() {
            let row_offset = block * rows_per_worker;
            scope.spawn(move || {
                for (local_i, out_row) in chunk.chunks_mut(p).enumerate() {
                    let i = row_offset + local_i;
                    let a_row = &a_data[i * n..(i + 1) * n];
                    for (j, out) in out_row.iter_mut().enumerate() {
                        let mut sum = T::zero();
                        for (k, &aik) in a_row.iter().enumerate() {
                            sum += aik * b_data[k * p + j];
                        }
                        *out = sum;
                    }
                }
            });
        }
    });
    Ok(c)
}
