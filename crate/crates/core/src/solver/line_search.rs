use crate::error::{Error, Result};
use crate::loss::SmoothLoss;

/// Accepted step of the Armijo backtracking search.
#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub w_new: Vec<f64>,
    /// `F(w_new) - F(w)`, evaluated without cancellation.
    pub objective_change: f64,
    pub backtracks: usize,
}

/// Armijo parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoParams {
    pub beta: f64,
    pub sigma: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            sigma: 1e-4,
            max_backtracks: 50,
        }
    }
}

/// `||lambda o w_new||_1 - ||lambda o w||_1`, coordinate by coordinate. When a
/// coordinate keeps its sign the change is taken from `w_new_j - w_j` directly.
pub fn weighted_l1_change(weights: &[f64], w: &[f64], w_new: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&lam, &a), &b) in weights.iter().zip(w).zip(w_new) {
        if a == b {
            continue;
        }
        let change = if a * b > 0.0 {
            a.signum() * (b - a)
        } else {
            b.abs() - a.abs()
        };
        acc += lam * change;
    }
    acc
}

/// `F(w_new) - F(w)` for the composite objective.
pub fn objective_change<L: SmoothLoss + ?Sized>(
    loss: &L,
    weights: &[f64],
    w: &[f64],
    w_new: &[f64],
) -> Result<f64> {
    Ok(loss.value_change(w, w_new)? + weighted_l1_change(weights, w, w_new))
}

/// Largest `alpha = beta^i` with `F(w + alpha d) <= F(w) + alpha sigma delta`.
///
/// Trial points outside the loss domain count as failed tests. Exhausting
/// `max_backtracks` yields [`Error::LineSearchFailed`]; its `iteration` field
/// is left at zero for the caller to fill in.
pub fn line_search<L: SmoothLoss + ?Sized>(
    loss: &L,
    weights: &[f64],
    w: &[f64],
    d: &[f64],
    delta: f64,
    objective: f64,
    params: &ArmijoParams,
) -> Result<LineSearchStep> {
    if !(delta < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "line search needs a descent direction, got delta = {delta:e}"
        )));
    }
    let mut alpha = 1.0;
    let mut w_new = vec![0.0; w.len()];
    for backtracks in 0..=params.max_backtracks {
        for ((wn, &wi), &di) in w_new.iter_mut().zip(w).zip(d) {
            *wn = wi + alpha * di;
        }
        match objective_change(loss, weights, w, &w_new) {
            Ok(change) if change <= alpha * params.sigma * delta => {
                return Ok(LineSearchStep {
                    alpha,
                    w_new,
                    objective_change: change,
                    backtracks,
                });
            }
            Ok(_) | Err(Error::NotPositiveDefinite) => {}
            Err(e) => return Err(e),
        }
        alpha *= params.beta;
    }
    Err(Error::LineSearchFailed {
        iteration: 0,
        backtracks: params.max_backtracks,
        delta,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{SicsLoss, SquaredLoss};
    use crate::numkit::{CsrMatrix, SymmetricDense};

    #[test]
    fn full_step_on_quadratic() {
        // L(w) = w^2 / 2 via one sample with x = 1, y = 0
        let loss =
            SquaredLoss::new(CsrMatrix::from_dense(1, 1, &[1.0]).unwrap(), vec![0.0]).unwrap();
        let params = ArmijoParams {
            sigma: 0.25,
            ..ArmijoParams::default()
        };
        let step = line_search(&loss, &[0.0], &[1.0], &[-1.0], -1.0, 0.5, &params).unwrap();
        assert_eq!(step.alpha, 1.0);
        assert_eq!(step.w_new, vec![0.0]);
        assert_eq!(step.objective_change, -0.5);
    }

    #[test]
    fn rejects_non_descent() {
        let loss =
            SquaredLoss::new(CsrMatrix::from_dense(1, 1, &[1.0]).unwrap(), vec![0.0]).unwrap();
        assert!(line_search(
            &loss,
            &[0.0],
            &[1.0],
            &[0.0],
            0.0,
            0.5,
            &ArmijoParams::default()
        )
        .is_err());
    }

    #[test]
    fn sics_backtracks_into_pd_region() {
        // X = I (p = 2) and d = vec(-2 e_1 e_1^T), so alpha = 1 gives X_00 = -1.
        // S_00 = 3 makes the smooth gradient (S - X^{-1})_00 = 2 and d a descent direction.
        let mut s = SymmetricDense::identity(2);
        s.set(0, 0, 3.0);
        let loss = SicsLoss::new(s).unwrap();
        let w = loss.initial_point();
        let d = vec![-2.0, 0.0, 0.0];
        let weights = loss.penalty_weights(0.0);
        let g = loss.gradient(&w).unwrap();
        let delta: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!(delta < 0.0);
        let f0 = loss.value(&w).unwrap();
        let params = ArmijoParams::default();
        let step = line_search(&loss, &weights, &w, &d, delta, f0, &params).unwrap();
        assert!(step.alpha < 1.0);
        assert!(loss.pd_check(&step.w_new));
        let f1 = loss.value(&step.w_new).unwrap();
        assert!(f1 <= f0 + step.alpha * params.sigma * delta);
    }

    #[test]
    fn l1_change_keeps_sign_exactly() {
        let w = [1.0, -2.0, 0.0, 0.5];
        let w_new = [1.0 + 1e-17, -1.5, 0.25, -0.5];
        let ch = weighted_l1_change(&[1.0; 4], &w, &w_new);
        assert!((ch - (0.0 - 0.5 + 0.25 + 0.0)).abs() < 1e-15);
    }
}
