use std::sync::atomic::{AtomicU64, Ordering};

use super::{check_len, SmoothLoss};
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;

/// Average logistic loss `(1/N) sum_n log(1 + exp(-y_n w^T x_n))` with labels in `{-1, +1}`.
#[derive(Debug)]
pub struct LogisticLoss {
    data: CsrMatrix,
    labels: Vec<f64>,
    nnz_touched: AtomicU64,
}

/// `log(1 + exp(-z))` without overflow.
#[inline]
pub(crate) fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(z))`, evaluated on the stable side.
#[inline]
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl LogisticLoss {
    pub fn new(data: CsrMatrix, labels: Vec<f64>) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::Input(
                "logistic loss needs at least one sample".into(),
            ));
        }
        check_len(data.rows(), labels.len())?;
        if let Some(bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidArgument(format!(
                "logistic labels must be +1 or -1, found {bad}"
            )));
        }
        Ok(Self {
            data,
            labels,
            nnz_touched: AtomicU64::new(0),
        })
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Number of stored data-matrix entries read so far.
    pub fn nnz_touched(&self) -> u64 {
        self.nnz_touched.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.nnz_touched.store(0, Ordering::Relaxed);
    }

    fn margins(&self, w: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.data.rows()];
        self.data.mul_vec(w, &mut z);
        self.nnz_touched
            .fetch_add(self.data.nnz() as u64, Ordering::Relaxed);
        for (zi, y) in z.iter_mut().zip(&self.labels) {
            *zi *= y;
        }
        z
    }
}

impl SmoothLoss for LogisticLoss {
    fn value_change(&self, w: &[f64], w_new: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), w_new.len())?;
        let step: Vec<f64> = w_new.iter().zip(w).map(|(a, b)| a - b).collect();
        let z = self.margins(w);
        let dz = self.margins(&step);
        // l(z + dz) - l(z) = log1p(sigma(-z) * expm1(-dz)) for l(z) = log(1 + exp(-z))
        let total: f64 = z
            .iter()
            .zip(&dz)
            .map(|(&zi, &di)| (sigmoid_neg(zi) * (-di).exp_m1()).ln_1p())
            .sum();
        Ok(total / z.len() as f64)
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        let z = self.margins(w);
        let n = z.len() as f64;
        Ok(z.iter().map(|&zi| log1p_exp_neg(zi)).sum::<f64>() / n)
    }

    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), grad.len())?;
        let z = self.margins(w);
        let n = z.len() as f64;
        let mut value = 0.0;
        let mut r = vec![0.0; z.len()];
        for ((ri, &zi), y) in r.iter_mut().zip(&z).zip(&self.labels) {
            value += log1p_exp_neg(zi);
            *ri = -y * sigmoid_neg(zi) / n;
        }
        self.data.mul_transpose_vec(&r, grad);
        self.nnz_touched
            .fetch_add(self.data.nnz() as u64, Ordering::Relaxed);
        Ok(value / n)
    }
}
