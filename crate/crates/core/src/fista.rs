//! FISTA with backtracking, used as a first-order reference solver.
//!
//! Same termination rule and trace schema as the LHAC solver. Intended for
//! losses defined on all of `R^p`; the inverse covariance loss is not supported.

use std::time::Instant;

use crate::active_set::{subgradient, NormKind};
use crate::cd::soft_threshold;
use crate::error::{Error, Result};
use crate::flops::FlopAccount;
use crate::loss::SmoothLoss;
use crate::numkit::{dot_unchecked, weighted_l1};
use crate::solver::{IterationRecord, SolveStatus, SolverTrace};

/// Componentwise soft-threshold of `v` with per-entry thresholds `tau`.
pub fn prox_l1(v: &[f64], tau: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(tau)
        .map(|(&x, &t)| soft_threshold(x, t))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FistaConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Starting Lipschitz estimate.
    pub lipschitz: f64,
    /// Growth factor applied while the quadratic upper bound fails.
    pub growth: f64,
    pub norm: NormKind,
}

impl Default for FistaConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon: 1e-5,
            max_iterations: 200_000,
            lipschitz: 1.0,
            growth: 2.0,
            norm: NormKind::L2,
        }
    }
}

/// Iteration state; `t` follows `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2` from `t_1 = 1`.
#[derive(Clone, Debug)]
pub struct FistaState {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub t: f64,
    pub lipschitz: f64,
    pub iteration: usize,
}

#[derive(Clone, Debug)]
pub struct FistaSolution {
    pub w: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: SolverTrace,
    pub initial_violation: f64,
    pub final_violation: f64,
    /// Momentum parameters used, `t_1, t_2, ...`.
    pub momentum: Vec<f64>,
}

impl FistaSolution {
    /// No coordinate descent is run, so the account stays empty.
    pub fn flops(&self) -> FlopAccount {
        FlopAccount::new()
    }
}

pub fn fista_solve<L: SmoothLoss>(loss: &L, config: &FistaConfig) -> Result<FistaSolution> {
    if !(config.lambda >= 0.0) || !(config.epsilon >= 0.0 && config.epsilon < 1.0) {
        return Err(Error::InvalidArgument(
            "lambda >= 0 and epsilon in [0, 1) required".into(),
        ));
    }
    if !(config.growth > 1.0) || !(config.lipschitz > 0.0) {
        return Err(Error::InvalidArgument(
            "growth > 1 and positive Lipschitz estimate required".into(),
        ));
    }
    let started = Instant::now();
    let p = loss.dim();
    let weights = loss.penalty_weights(config.lambda);
    let w0 = loss.initial_point();

    let mut grad_w = vec![0.0; p];
    let smooth_w0 = loss.value_and_gradient(&w0, &mut grad_w)?;
    let mut objective = smooth_w0 + weighted_l1(&weights, &w0);
    let report = subgradient(&grad_w, &w0, &weights);
    let initial_violation = report.norm(config.norm);
    let mut violation = initial_violation;

    let mut trace = SolverTrace::default();
    trace.push(IterationRecord {
        iter: 0,
        objective,
        subgrad_norm: violation,
        ws_size: w0.iter().filter(|v| **v != 0.0).count(),
        alpha: 0.0,
        sweeps: 0,
        flops_cum: 0,
        time_s: 0.0,
    });

    let mut state = FistaState {
        y: w0.clone(),
        w: w0,
        t: 1.0,
        lipschitz: config.lipschitz,
        iteration: 0,
    };
    let mut momentum = vec![state.t];
    let mut grad_y = vec![0.0; p];
    let mut tau = vec![0.0; p];

    let status = loop {
        if violation <= config.epsilon * initial_violation {
            break SolveStatus::Converged;
        }
        if state.iteration >= config.max_iterations {
            break SolveStatus::MaxIterations;
        }

        loss.value_and_gradient(&state.y, &mut grad_y)?;
        // Try a smaller constant first, then grow until the upper bound holds.
        state.lipschitz = (state.lipschitz / config.growth).max(config.lipschitz * 1e-12);
        let w_next = loop {
            let step = 1.0 / state.lipschitz;
            let v: Vec<f64> = state
                .y
                .iter()
                .zip(&grad_y)
                .map(|(y, g)| y - step * g)
                .collect();
            for (ti, wi) in tau.iter_mut().zip(&weights) {
                *ti = wi * step;
            }
            let cand = prox_l1(&v, &tau);
            let diff: Vec<f64> = cand.iter().zip(&state.y).map(|(a, b)| a - b).collect();
            let rise = loss.value_change(&state.y, &cand)?;
            let bound =
                dot_unchecked(&grad_y, &diff) + 0.5 * state.lipschitz * dot_unchecked(&diff, &diff);
            if rise <= bound {
                break cand;
            }
            state.lipschitz *= config.growth;
            if !state.lipschitz.is_finite() {
                return Err(Error::Input("Lipschitz estimate diverged".into()));
            }
        };

        let t_next = (1.0 + (1.0 + 4.0 * state.t * state.t).sqrt()) / 2.0;
        let beta = (state.t - 1.0) / t_next;
        state.y = w_next
            .iter()
            .zip(&state.w)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        state.w = w_next;
        state.t = t_next;
        momentum.push(t_next);
        state.iteration += 1;

        let smooth = loss.value_and_gradient(&state.w, &mut grad_w)?;
        objective = smooth + weighted_l1(&weights, &state.w);
        violation = subgradient(&grad_w, &state.w, &weights).norm(config.norm);
        trace.push(IterationRecord {
            iter: state.iteration,
            objective,
            subgrad_norm: violation,
            ws_size: state.w.iter().filter(|v| **v != 0.0).count(),
            alpha: 1.0 / state.lipschitz,
            sweeps: 0,
            flops_cum: 0,
            time_s: started.elapsed().as_secs_f64(),
        });
    };

    Ok(FistaSolution {
        w: state.w,
        objective,
        status,
        iterations: state.iteration,
        trace,
        initial_violation,
        final_violation: violation,
        momentum,
    })
}
