use std::cell::RefCell;

use super::{check_len, SmoothLoss};
use crate::error::{Error, Result};
use crate::numkit::{cholesky, CholeskyFactor, SymmetricDense};

/// Sparse inverse covariance loss `-log det X + tr(S X)` over positive definite `X`.
///
/// The variable is the row-major upper triangle of `X` (length `p(p+1)/2`).
/// Off-diagonal coordinates carry penalty weight `2 lambda` and diagonal ones
/// `lambda`, so the weighted l1 term equals `lambda ||X||_1` over the full matrix.
#[derive(Debug)]
pub struct SicsLoss {
    covariance: SymmetricDense,
    cache: RefCell<Option<FactorCache>>,
    /// `log det` at the last accepted iterate.
    anchor: RefCell<Option<(Vec<f64>, f64)>>,
}

#[derive(Debug)]
struct FactorCache {
    point: Vec<f64>,
    factor: CholeskyFactor,
    inverse: Option<SymmetricDense>,
}

/// Position of `(i, j)`, `i <= j`, in the packed upper triangle of an order-`p` matrix.
#[inline]
pub fn packed_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < p);
    i * p - i * (i + 1) / 2 + j
}

/// Packs the upper triangle of a symmetric matrix.
pub fn pack_upper(m: &SymmetricDense) -> Vec<f64> {
    let p = m.order();
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        for j in i..p {
            out.push(m.get(i, j));
        }
    }
    out
}

/// Rebuilds the symmetric matrix from its packed upper triangle.
pub fn unpack_upper(p: usize, w: &[f64]) -> SymmetricDense {
    let mut m = SymmetricDense::zeros(p);
    let mut k = 0;
    for i in 0..p {
        for j in i..p {
            m.set(i, j, w[k]);
            k += 1;
        }
    }
    m
}

impl SicsLoss {
    pub fn new(covariance: SymmetricDense) -> Result<Self> {
        if covariance.order() == 0 {
            return Err(Error::Input("empty covariance matrix".into()));
        }
        Ok(Self {
            covariance,
            cache: RefCell::new(None),
            anchor: RefCell::new(None),
        })
    }

    /// Order `p` of the matrix variable.
    pub fn order(&self) -> usize {
        self.covariance.order()
    }

    pub fn covariance(&self) -> &SymmetricDense {
        &self.covariance
    }

    pub fn to_matrix(&self, w: &[f64]) -> SymmetricDense {
        unpack_upper(self.order(), w)
    }

    /// True iff the matrix encoded by `w` has a Cholesky factor; on success the
    /// factor is cached for later calls at the same point.
    pub fn pd_check(&self, w: &[f64]) -> bool {
        if w.len() != self.dim() {
            return false;
        }
        if self.cached_matches(w) {
            return true;
        }
        match cholesky(&self.to_matrix(w)) {
            Ok(factor) => {
                *self.cache.borrow_mut() = Some(FactorCache {
                    point: w.to_vec(),
                    factor,
                    inverse: None,
                });
                true
            }
            Err(_) => false,
        }
    }

    fn cached_matches(&self, w: &[f64]) -> bool {
        self.cache
            .borrow()
            .as_ref()
            .is_some_and(|c| c.point.as_slice() == w)
    }

    fn logdet_at_anchor(&self, w: &[f64]) -> Result<f64> {
        if let Some((point, ld)) = self.anchor.borrow().as_ref() {
            if point.as_slice() == w {
                return Ok(*ld);
            }
        }
        Ok(cholesky(&self.to_matrix(w))?.logdet())
    }

    fn trace_sx(&self, w: &[f64]) -> f64 {
        let p = self.order();
        let mut acc = 0.0;
        let mut k = 0;
        for i in 0..p {
            let row = self.covariance.row(i);
            acc += row[i] * w[k];
            k += 1;
            for &s in &row[i + 1..] {
                acc += 2.0 * s * w[k];
                k += 1;
            }
        }
        acc
    }

    fn logdet(&self, w: &[f64]) -> Result<f64> {
        if !self.pd_check(w) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(self.cache.borrow().as_ref().unwrap().factor.logdet())
    }
}

impl SmoothLoss for SicsLoss {
    fn dim(&self) -> usize {
        let p = self.order();
        p * (p + 1) / 2
    }

    fn penalty_weights(&self, lambda: f64) -> Vec<f64> {
        let p = self.order();
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..p {
            out.push(lambda);
            out.extend(std::iter::repeat_n(2.0 * lambda, p - i - 1));
        }
        out
    }

    fn initial_point(&self) -> Vec<f64> {
        pack_upper(&SymmetricDense::identity(self.order()))
    }

    fn is_feasible(&self, w: &[f64]) -> bool {
        self.pd_check(w)
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        let logdet = self.logdet(w)?;
        Ok(-logdet + self.trace_sx(w))
    }

    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), grad.len())?;
        let value = self.value(w)?;
        let mut cache = self.cache.borrow_mut();
        let entry = cache.as_mut().expect("factor cached by value()");
        let inverse = entry.inverse.get_or_insert_with(|| entry.factor.inverse());
        let p = self.order();
        let mut k = 0;
        for i in 0..p {
            grad[k] = self.covariance.get(i, i) - inverse.get(i, i);
            k += 1;
            for j in i + 1..p {
                grad[k] = 2.0 * (self.covariance.get(i, j) - inverse.get(i, j));
                k += 1;
            }
        }
        Ok(value)
    }

    fn value_change(&self, w: &[f64], w_new: &[f64]) -> Result<f64> {
        check_len(self.dim(), w.len())?;
        check_len(self.dim(), w_new.len())?;
        let before = self.logdet_at_anchor(w)?;
        let after = self.logdet(w_new)?;
        let step: Vec<f64> = w_new.iter().zip(w).map(|(a, b)| a - b).collect();
        Ok(-(after - before) + self.trace_sx(&step))
    }

    fn accept(&self, w: &[f64]) {
        if self.pd_check(w) {
            let mut cache = self.cache.borrow_mut();
            let entry = cache.as_mut().unwrap();
            if entry.inverse.is_none() {
                entry.inverse = Some(entry.factor.inverse());
            }
            *self.anchor.borrow_mut() = Some((w.to_vec(), entry.factor.logdet()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::logdet_and_inverse;

    #[test]
    fn packed_index_matches_enumeration() {
        let p = 6;
        let mut k = 0;
        for i in 0..p {
            for j in i..p {
                assert_eq!(packed_index(p, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn identity_value() {
        let l = SicsLoss::new(SymmetricDense::identity(2)).unwrap();
        let w = l.initial_point();
        assert_eq!(l.value(&w).unwrap(), 2.0);
    }

    #[test]
    fn stationary_at_inverse_covariance() {
        let mut s = SymmetricDense::identity(3);
        s.set(0, 1, 0.3);
        s.set(1, 2, -0.2);
        let (_, inv) = logdet_and_inverse(&s).unwrap();
        let l = SicsLoss::new(s).unwrap();
        let g = l.gradient(&pack_upper(&inv)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12), "{g:?}");
    }

    #[test]
    fn pd_check_cases() {
        let l = SicsLoss::new(SymmetricDense::identity(2)).unwrap();
        assert!(l.pd_check(&pack_upper(&SymmetricDense::identity(2))));
        assert!(!l.pd_check(&pack_upper(&SymmetricDense::from_diagonal(&[1.0, -1.0]))));
        assert!(matches!(
            l.value(&pack_upper(&SymmetricDense::from_diagonal(&[1.0, -1.0]))),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn doubled_offdiagonal_weights() {
        let l = SicsLoss::new(SymmetricDense::identity(3)).unwrap();
        assert_eq!(l.penalty_weights(0.5), vec![0.5, 1.0, 1.0, 0.5, 1.0, 0.5]);
    }
}
