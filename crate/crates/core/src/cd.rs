//! Coordinate descent on the working-set lasso subproblem
//!
//! ```text
//! min_d  g^T d + 1/2 d^T B d + sum_j lambda_j |w_j + d_j|,   d_j = 0 off the working set
//! ```
//!
//! with `B` in compact L-BFGS form. Each coordinate step reads `(B d)_j`
//! through the cached `dhat = Qhat d`, so its cost depends on `m` only.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::active_set::WorkingSet;
use crate::error::{Error, Result};
use crate::flops::{FlopAccount, FlopCounter, FlopKind};
use crate::lbfgs::CompactRepresentation;
use crate::numkit::dot_unchecked;

/// Flops for the scalar part of one coordinate step (`b`, `c`, the threshold and `z`).
pub const SCALAR_STEP_FLOPS: u64 = 8;

/// `sign(x) max(|x| - tau, 0)`
#[inline]
pub fn soft_threshold(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// Exact minimizer of `a/2 z^2 + b z + lambda |c + z|` for `a > 0`.
pub fn coordinate_step(a: f64, b: f64, c: f64, lambda: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coordinate curvature must be positive, got {a}"
        )));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be nonnegative, got {lambda}"
        )));
    }
    Ok(step_unchecked(a, b, c, lambda))
}

#[inline]
fn step_unchecked(a: f64, b: f64, c: f64, lambda: f64) -> f64 {
    -c + soft_threshold(c - b / a, lambda / a)
}

/// Order in which a sweep visits the working set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoordinateOrder {
    #[default]
    Ascending,
    /// Shuffled every sweep from a seeded generator.
    Shuffled(u64),
}

/// How `(B d)_j` is obtained inside a coordinate step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HessianRows {
    /// `gamma d_j - q_j^T dhat`: `O(m)` per step.
    #[default]
    LowRank,
    /// Reference mode: the explicit `p x p` matrix is formed once per
    /// subproblem and each step takes a dense row product, `O(p)` per step.
    Dense,
}

#[derive(Clone, Copy, Debug)]
pub struct CdOptions {
    pub sweeps: usize,
    pub order: CoordinateOrder,
    pub hessian: HessianRows,
}

impl Default for CdOptions {
    fn default() -> Self {
        Self {
            sweeps: 1,
            order: CoordinateOrder::Ascending,
            hessian: HessianRows::LowRank,
        }
    }
}

/// Scratch reused across subproblems: `d` and the cached diagonal (length `p`)
/// and `dhat` (length up to `2m`).
#[derive(Clone, Debug)]
pub struct SubproblemState {
    pub d: Vec<f64>,
    pub dhat: Vec<f64>,
    pub diag: Vec<f64>,
}

impl SubproblemState {
    pub fn new(p: usize, memory: usize) -> Self {
        Self {
            d: vec![0.0; p],
            dhat: Vec::with_capacity(2 * memory),
            diag: vec![0.0; p],
        }
    }

    /// Reals held, counting `dhat` at its reserved capacity.
    pub fn storage_reals(&self) -> usize {
        self.d.len() + self.diag.len() + self.dhat.capacity()
    }
}

/// Outcome of one subproblem solve; the step itself is left in `SubproblemState::d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemOutcome {
    /// `g^T d + ||lambda o (w + d)||_1 - ||lambda o w||_1`
    pub delta: f64,
    pub steps: u64,
    pub flops: u64,
}

/// Runs `options.sweeps` passes of coordinate descent over `ws`.
///
/// On return `state.d` holds the step (zero off `ws`) and `state.dhat = Qhat d`.
/// Per-step flop counts are recorded in `account`.
#[allow(clippy::too_many_arguments)]
pub fn solve_subproblem_in(
    state: &mut SubproblemState,
    rep: &CompactRepresentation<'_>,
    grad: &[f64],
    w: &[f64],
    ws: &WorkingSet,
    weights: &[f64],
    options: &CdOptions,
    account: &mut FlopAccount,
) -> SubproblemOutcome {
    solve_subproblem_observed(
        state,
        rep,
        grad,
        w,
        ws,
        weights,
        options,
        account,
        |_, _| {},
    )
}

/// [`solve_subproblem_in`] calling `observer(j, state)` after every coordinate step.
/// In [`HessianRows::Dense`] mode `state.dhat` is only filled in at the end.
#[allow(clippy::too_many_arguments)]
pub fn solve_subproblem_observed<F: FnMut(usize, &SubproblemState)>(
    state: &mut SubproblemState,
    rep: &CompactRepresentation<'_>,
    grad: &[f64],
    w: &[f64],
    ws: &WorkingSet,
    weights: &[f64],
    options: &CdOptions,
    account: &mut FlopAccount,
    mut observer: F,
) -> SubproblemOutcome {
    let p = w.len();
    debug_assert_eq!(grad.len(), p);
    debug_assert_eq!(weights.len(), p);
    state.d.iter_mut().for_each(|v| *v = 0.0);
    state.dhat.clear();
    state.dhat.resize(rep.width(), 0.0);

    let diag_cost = 2 * rep.width() as u64 + 2;
    for &j in &ws.indices {
        state.diag[j] = rep.diag_entry(j);
    }
    account.record_flops(FlopKind::Diagonal, diag_cost * ws.len() as u64);

    let dense = match options.hessian {
        HessianRows::LowRank => None,
        HessianRows::Dense => Some(rep.explicit_matrix()),
    };

    let mut order = ws.indices.clone();
    let mut rng = match options.order {
        CoordinateOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        CoordinateOrder::Ascending => None,
    };

    let mut steps = 0;
    let mut total = 0;
    for _ in 0..options.sweeps {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        for &j in &order {
            let mut flops = FlopCounter::new();
            let bd = match &dense {
                None => rep.bd_entry(j, state.d[j], &state.dhat, &mut flops),
                Some(b) => {
                    flops.add(2 * p as u64);
                    dot_unchecked(&b[j * p..(j + 1) * p], &state.d)
                }
            };
            let a = state.diag[j];
            let b = grad[j] + bd;
            let c = w[j] + state.d[j];
            let z = step_unchecked(a, b, c, weights[j]);
            flops.add(SCALAR_STEP_FLOPS);
            if z != 0.0 {
                state.d[j] += z;
                if dense.is_none() {
                    rep.update_dhat(j, z, &mut state.dhat, &mut flops);
                }
            }
            account.record_flops(FlopKind::CoordinateStep, flops.get());
            observer(j, state);
            steps += 1;
            total += flops.get();
        }
    }
    if dense.is_some() {
        state.dhat = rep.qhat_times(&state.d);
    }

    let delta = model_decrease(grad, w, &state.d, weights, &ws.indices);
    SubproblemOutcome {
        delta,
        steps,
        flops: total,
    }
}

/// Subproblem result returned by [`solve_subproblem`].
#[derive(Clone, Debug, PartialEq)]
pub struct Subproblem {
    pub d: Vec<f64>,
    pub delta: f64,
    pub flops: FlopAccount,
}

/// Convenience wrapper over [`solve_subproblem_in`] with fresh scratch space.
pub fn solve_subproblem(
    rep: &CompactRepresentation<'_>,
    grad: &[f64],
    w: &[f64],
    ws: &WorkingSet,
    weights: &[f64],
    options: &CdOptions,
) -> Subproblem {
    let mut state = SubproblemState::new(w.len(), rep.pairs());
    let mut flops = FlopAccount::new();
    let out = solve_subproblem_in(&mut state, rep, grad, w, ws, weights, options, &mut flops);
    Subproblem {
        d: state.d,
        delta: out.delta,
        flops,
    }
}

/// `g^T d + sum_j lambda_j (|w_j + d_j| - |w_j|)` restricted to `support`.
pub fn model_decrease(
    grad: &[f64],
    w: &[f64],
    d: &[f64],
    weights: &[f64],
    support: &[usize],
) -> f64 {
    let mut lin = 0.0;
    let mut pen = 0.0;
    for &j in support {
        lin += grad[j] * d[j];
        pen += weights[j] * ((w[j] + d[j]).abs() - w[j].abs());
    }
    lin + pen
}

/// Subproblem objective `psi(d) = g^T d + 1/2 d^T B d + ||lambda o (w + d)||_1`.
pub fn model_value(
    rep: &CompactRepresentation<'_>,
    grad: &[f64],
    w: &[f64],
    d: &[f64],
    weights: &[f64],
) -> f64 {
    let bd = rep.apply(d);
    let mut acc = 0.0;
    for j in 0..w.len() {
        acc += grad[j] * d[j] + 0.5 * d[j] * bd[j] + weights[j] * (w[j] + d[j]).abs();
    }
    acc
}
