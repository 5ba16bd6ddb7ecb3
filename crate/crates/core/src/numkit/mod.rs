//! Small dense and sparse kernels used by the solvers.
//!
//! Dense vectors are plain `[f64]` slices. All reductions run in index order,
//! so results are bit-identical for identical inputs.

mod cholesky;
mod csr;
mod dense;

pub use cholesky::{cholesky, logdet_and_inverse, CholeskyFactor};
pub use csr::CsrMatrix;
pub use dense::{small_solve, SmallSquareMatrix, SymmetricDense, TallThinMatrix};

use crate::error::{Error, Result};

/// Inner product of two equal-length vectors.
pub fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(dot_unchecked(a, b))
}

/// Inner product without the length check; extra entries of the longer slice are ignored.
#[inline]
pub fn dot_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot_unchecked(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Weighted l1 norm `sum_j weights[j] * |w[j]|`.
pub fn weighted_l1(weights: &[f64], w: &[f64]) -> f64 {
    weights
        .iter()
        .zip(w)
        .fold(0.0, |acc, (lam, x)| acc + lam * x.abs())
}
