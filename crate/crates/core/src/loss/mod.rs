//! Smooth parts `L(w)` of the composite objective `||lambda o w||_1 + L(w)`.

mod logistic;
mod sics;
mod squared;

pub use logistic::LogisticLoss;
pub use sics::{pack_upper, packed_index, unpack_upper, SicsLoss};
pub use squared::SquaredLoss;

use crate::error::{Error, Result};

/// A convex, twice differentiable loss over `R^p`.
///
/// Methods take `&self`; models with internal caches use interior mutability
/// and are therefore not `Sync`.
pub trait SmoothLoss {
    /// Dimension `p` of the variable.
    fn dim(&self) -> usize;

    /// Per-coordinate penalty weights for a scalar regularization level `lambda`.
    fn penalty_weights(&self, lambda: f64) -> Vec<f64> {
        vec![lambda; self.dim()]
    }

    /// Starting iterate; must lie in the domain of the loss.
    fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Whether `w` lies in the domain. Always true for losses defined on all of `R^p`.
    fn is_feasible(&self, _w: &[f64]) -> bool {
        true
    }

    /// `L(w)`. Points outside the domain yield [`Error::NotPositiveDefinite`].
    fn value(&self, w: &[f64]) -> Result<f64>;

    /// Writes `grad L(w)` into `grad` and returns `L(w)`.
    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64>;

    /// `L(w_new) - L(w)`. Models override this with a form that avoids
    /// cancellation when the two points are close.
    fn value_change(&self, w: &[f64], w_new: &[f64]) -> Result<f64> {
        Ok(self.value(w_new)? - self.value(w)?)
    }

    fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        self.value_and_gradient(w, &mut g)?;
        Ok(g)
    }

    /// Called once per accepted iterate; models may cache derived data there.
    fn accept(&self, _w: &[f64]) {}
}

impl<T: SmoothLoss + ?Sized> SmoothLoss for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn penalty_weights(&self, lambda: f64) -> Vec<f64> {
        (**self).penalty_weights(lambda)
    }
    fn initial_point(&self) -> Vec<f64> {
        (**self).initial_point()
    }
    fn is_feasible(&self, w: &[f64]) -> bool {
        (**self).is_feasible(w)
    }
    fn value(&self, w: &[f64]) -> Result<f64> {
        (**self).value(w)
    }
    fn value_and_gradient(&self, w: &[f64], grad: &mut [f64]) -> Result<f64> {
        (**self).value_and_gradient(w, grad)
    }
    fn value_change(&self, w: &[f64], w_new: &[f64]) -> Result<f64> {
        (**self).value_change(w, w_new)
    }
    fn accept(&self, w: &[f64]) {
        (**self).accept(w)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
