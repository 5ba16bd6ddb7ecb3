use crate::error::{Error, Result};

/// Row-major `rows x cols` matrix with few columns, so that each row is contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct TallThinMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TallThinMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Number of stored reals.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Dense square matrix of small order, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallSquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SmallSquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// Solves `A X = B` by LU with partial pivoting.
///
/// `b` is row-major `n x k`; the solution is returned in the same layout.
/// A pivot below `1e-14 * ||A||_inf` is reported as degenerate curvature, since
/// the only caller inverts the compact L-BFGS middle matrix.
pub fn small_solve(a: &SmallSquareMatrix, b: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = a.order();
    if b.len() != n * k {
        return Err(Error::DimensionMismatch {
            expected: n * k,
            found: b.len(),
        });
    }
    let tol = 1e-14 * a.norm_inf();
    let mut lu = a.data.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let mut piv = col;
        let mut best = lu[col * n + col].abs();
        for r in col + 1..n {
            let v = lu[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best > tol) {
            return Err(Error::DegenerateCurvature { pivot: best });
        }
        if piv != col {
            for c in 0..n {
                lu.swap(col * n + c, piv * n + c);
            }
            for c in 0..k {
                x.swap(col * k + c, piv * k + c);
            }
        }
        let d = lu[col * n + col];
        for r in col + 1..n {
            let f = lu[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            lu[r * n + col] = f;
            for c in col + 1..n {
                lu[r * n + c] -= f * lu[col * n + c];
            }
            for c in 0..k {
                x[r * k + c] -= f * x[col * k + c];
            }
        }
    }

    for col in (0..n).rev() {
        let d = lu[col * n + col];
        for c in 0..k {
            let mut acc = x[col * k + c];
            for j in col + 1..n {
                acc -= lu[col * n + j] * x[j * k + c];
            }
            x[col * k + c] = acc / d;
        }
    }
    Ok(x)
}

/// Full-storage symmetric matrix; writes go to both triangles.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricDense {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricDense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a row-major square array, replacing it by `(A + A^T) / 2`.
    pub fn symmetrized(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = data[i * n + i];
            for j in i + 1..n {
                m.set(i, j, 0.5 * (data[i * n + j] + data[j * n + i]));
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Dense product `self * other`, mostly useful for checks.
    pub fn matmul(&self, other: &SymmetricDense) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }
}
