use super::SymmetricDense;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `L L^T = A`, stored row-major.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// `log det A = 2 sum log L_ii`
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// `A^{-1}` from the factor, one column at a time. Only the upper triangle
    /// is computed and then mirrored, so the result is exactly symmetric.
    pub fn inverse(&self) -> SymmetricDense {
        let n = self.n;
        let mut inv = SymmetricDense::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            // forward: L y = e_j (y_i = 0 for i < j)
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0 / self.get(j, j);
            for i in j + 1..n {
                let mut acc = 0.0;
                for k in j..i {
                    acc += self.get(i, k) * col[k];
                }
                col[i] = -acc / self.get(i, i);
            }
            // backward: L^T x = y
            for i in (0..n).rev() {
                let mut acc = col[i];
                for k in i + 1..n {
                    acc -= self.get(k, i) * col[k];
                }
                col[i] = acc / self.get(i, i);
            }
            for i in 0..=j {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }

    /// Dense `L L^T`, for checks.
    pub fn reconstruct(&self) -> SymmetricDense {
        let n = self.n;
        let mut a = SymmetricDense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..=j {
                    acc += self.get(i, k) * self.get(j, k);
                }
                a.set(i, j, acc);
            }
        }
        a
    }
}

/// Cholesky factorization. A non-positive pivot returns
/// [`Error::NotPositiveDefinite`], which line searches treat as a rejected trial point.
pub fn cholesky(a: &SymmetricDense) -> Result<CholeskyFactor> {
    let n = a.order();
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        let mut diag = a.get(j, j);
        for k in 0..j {
            let l = lower[j * n + k];
            diag -= l * l;
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = diag.sqrt();
        lower[j * n + j] = ljj;
        for i in j + 1..n {
            let mut acc = a.get(i, j);
            for k in 0..j {
                acc -= lower[i * n + k] * lower[j * n + k];
            }
            lower[i * n + j] = acc / ljj;
        }
    }
    Ok(CholeskyFactor { n, lower })
}

pub fn logdet_and_inverse(a: &SymmetricDense) -> Result<(f64, SymmetricDense)> {
    let f = cholesky(a)?;
    Ok((f.logdet(), f.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymmetricDense {
        let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut m = SymmetricDense::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += a[i * n + k] * a[j * n + k];
                }
                if i == j {
                    acc += 0.5;
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    #[test]
    fn identity_factor() {
        let f = cholesky(&SymmetricDense::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn two_by_two_factor() {
        let mut a = SymmetricDense::zeros(2);
        a.set(0, 0, 4.0);
        a.set(0, 1, 2.0);
        a.set(1, 1, 3.0);
        let f = cholesky(&a).unwrap();
        assert_eq!(f.get(0, 0), 2.0);
        assert_eq!(f.get(1, 0), 1.0);
        assert_eq!(f.get(0, 1), 0.0);
        assert!((f.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        let back = f.reconstruct();
        for i in 0..2 {
            for j in 0..2 {
                assert!((back.get(i, j) - a.get(i, j)).abs() <= 1e-9 * 4.0);
            }
        }
    }

    #[test]
    fn indefinite_is_signalled() {
        let mut a = SymmetricDense::identity(2);
        a.set(0, 1, 2.0);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn logdet_inverse_small_cases() {
        let (ld, inv) = logdet_and_inverse(&SymmetricDense::identity(3)).unwrap();
        assert_eq!(ld, 0.0);
        assert_eq!(inv, SymmetricDense::identity(3));

        let (ld, inv) = logdet_and_inverse(&SymmetricDense::from_diagonal(&[2.0, 2.0])).unwrap();
        assert!((ld - 4f64.ln()).abs() < 1e-15);
        let want = SymmetricDense::from_diagonal(&[0.5, 0.5]);
        assert!(inv
            .as_slice()
            .iter()
            .zip(want.as_slice())
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn inverse_reconstructs_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_spd(&mut rng, 8);
        let (_, inv) = logdet_and_inverse(&a).unwrap();
        let prod = a.matmul(&inv);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i * 8 + j] - want).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn recovers_random_lower_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let n = rng.random_range(1..=12);
            let mut l = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..i {
                    l[i * n + j] = rng.random_range(-1.0..1.0);
                }
                l[i * n + i] = rng.random_range(0.5..2.0);
            }
            let mut a = SymmetricDense::zeros(n);
            for i in 0..n {
                for j in 0..=i {
                    let mut acc = 0.0;
                    for k in 0..=j {
                        acc += l[i * n + k] * l[j * n + k];
                    }
                    a.set(i, j, acc);
                }
            }
            let f = cholesky(&a).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((f.get(i, j) - l[i * n + j]).abs() < 1e-8);
                }
            }
        }
    }
}
