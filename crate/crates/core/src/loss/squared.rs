use super::{check_len, SmoothLoss};
use crate::error::{Error, Result};
use crate::numkit::CsrMatrix;

/// Least-squares loss `(1/2N) ||X w - y||^2`; with the l1 penalty this is the lasso.
#[derive(Clone, Debug)]
pub struct SquaredLoss {
    data: CsrMatrix,
    targets: Vec<f64>,
}

impl SquaredLoss {
    pub fn new(data: CsrMatrix, targets: Vec<f64>) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::Input(
                "squared loss needs at least one sample".into(),
            ));
        }
        check_len(data.rows(), targets.len())?;
        Ok(Self { data, targets })
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn residual(&self, w: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.data.rows()];
        self.data.mul_vec(w, &mut r);
        for (ri, y) in r.iter_mut().zip(&self.targets) {
            *ri -= y;
        }
        r
    }
}

impl SmoothLoss for SquaredLoss {
    fn value_change(&self, w: &[f64], w_new: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), w_new.len())?;
        let step: Vec<f64> = w_new.iter().zip(w).map(|(a, b)| a - b).collect();
        let r = self.residual(w);
        let mut xs = vec![0.0; r.len()];
        self.data.mul_vec(&step, &mut xs);
        // (1/2N) (||r + Xs||^2 - ||r||^2) = (1/N) (r^T Xs + ||Xs||^2 / 2)
        let change: f64 = r
            .iter()
            .zip(&xs)
            .map(|(ri, xi)| ri * xi + 0.5 * xi * xi)
            .sum();
        Ok(change / r.len() as f64)
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        let r = self.residual(w);
        Ok(0.5 * r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64)
    }

    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), grad.len())?;
        let mut r = self.residual(w);
        let n = r.len() as f64;
        let value = 0.5 * r.iter().map(|v| v * v).sum::<f64>() / n;
        r.iter_mut().for_each(|v| *v /= n);
        self.data.mul_transpose_vec(&r, grad);
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit_is_zero() {
        let x = CsrMatrix::from_dense(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]).unwrap();
        let w = [2.0, -1.0];
        let y = vec![2.0, -2.0, 1.0];
        let l = SquaredLoss::new(x, y).unwrap();
        assert_eq!(l.value(&w).unwrap(), 0.0);
        assert_eq!(l.gradient(&w).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_quadratic() {
        // N = 1, x = 1, y = 3 gives L(w) = (w - 3)^2 / 2
        let l = SquaredLoss::new(CsrMatrix::from_dense(1, 1, &[1.0]).unwrap(), vec![3.0]).unwrap();
        assert_eq!(l.value(&[1.0]).unwrap(), 2.0);
        assert_eq!(l.gradient(&[1.0]).unwrap(), vec![-2.0]);
    }
}
