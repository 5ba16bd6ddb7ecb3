//! Outer loop: working set, compact model, coordinate descent, Armijo step,
//! correction-pair update.

mod line_search;
mod trace;

pub use line_search::{
    line_search, objective_change, weighted_l1_change, ArmijoParams, LineSearchStep,
};
pub use trace::{IterationRecord, SolverTrace, TRACE_HEADER};

use std::fmt;
use std::time::Instant;

use log::{debug, warn};

use crate::active_set::{
    extras_budget, select_working_set, subgradient, NormKind, SubgradientReport,
};
use crate::cd::{solve_subproblem_in, CdOptions, CoordinateOrder, HessianRows, SubproblemState};
use crate::error::{Error, Result};
use crate::flops::FlopAccount;
use crate::lbfgs::CorrectionPairBuffer;
use crate::loss::SmoothLoss;
use crate::numkit::weighted_l1;

/// Solver parameters. Defaults: `m = 10`, `beta = 0.5`, `sigma = 1e-4`,
/// 5% working-set growth, sweep schedule `min(1 + k/3, 10)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Relative tolerance on the subgradient norm.
    pub epsilon: f64,
    pub memory: usize,
    pub beta: f64,
    pub sigma: f64,
    pub max_iterations: usize,
    pub max_backtracks: usize,
    /// Fraction of the violated coordinates added to the working set each iteration.
    pub ws_fraction: f64,
    pub sweeps_max: usize,
    /// Iterations per extra sweep in the schedule.
    pub sweeps_every: usize,
    pub norm: NormKind,
    /// `Some(seed)` shuffles the coordinate order of every sweep.
    pub shuffle_seed: Option<u64>,
    pub hessian_rows: HessianRows,
    /// Keep every accepted step in [`Solution::steps`].
    pub record_steps: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon: 1e-5,
            memory: 10,
            beta: 0.5,
            sigma: 1e-4,
            max_iterations: 10_000,
            max_backtracks: 50,
            ws_fraction: 0.05,
            sweeps_max: 10,
            sweeps_every: 3,
            norm: NormKind::L2,
            shuffle_seed: None,
            hessian_rows: HessianRows::LowRank,
            record_steps: false,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be finite and nonnegative");
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in [0, 1)");
        }
        if self.memory == 0 {
            return bad("memory must be positive");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma must lie in (0, 1)");
        }
        if !(self.ws_fraction > 0.0 && self.ws_fraction <= 1.0) {
            return bad("working-set fraction must lie in (0, 1]");
        }
        if self.sweeps_max == 0 || self.sweeps_every == 0 {
            return bad("sweep schedule parameters must be positive");
        }
        Ok(())
    }

    /// Inner sweeps at outer iteration `k` (0-based): `min(1 + k / every, max)`.
    pub fn sweeps_at(&self, k: usize) -> usize {
        (1 + k / self.sweeps_every).min(self.sweeps_max)
    }

    pub fn armijo(&self) -> ArmijoParams {
        ArmijoParams {
            beta: self.beta,
            sigma: self.sigma,
            max_backtracks: self.max_backtracks,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    LineSearchFailure {
        iteration: usize,
        delta: f64,
        objective: f64,
    },
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Converged => f.write_str("converged"),
            SolveStatus::MaxIterations => f.write_str("max-iters"),
            SolveStatus::LineSearchFailure { .. } => f.write_str("line-search-failure"),
        }
    }
}

/// One accepted step, kept when [`SolverConfig::record_steps`] is set.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub w: Vec<f64>,
    pub direction: Vec<f64>,
    pub alpha: f64,
    pub delta: f64,
    pub objective_before: f64,
    pub objective_change: f64,
    /// Correction pair built from this step.
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub pair_accepted: bool,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub w: Vec<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: SolverTrace,
    pub flops: FlopAccount,
    pub initial_violation: f64,
    pub final_violation: f64,
    pub steps: Vec<StepRecord>,
    /// Working-set size of every outer iteration.
    pub working_set_sizes: Vec<usize>,
    /// Violators added on top of the nonzeros, per outer iteration.
    pub working_set_extras: Vec<usize>,
    pub storage: StorageReport,
}

/// Peak auxiliary storage in reals, split by dependence on `p`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StorageReport {
    /// Correction pairs, `Qhat`, `d`, `dhat` and the cached diagonal.
    pub scaled: usize,
    /// Gram matrices of the pair buffer.
    pub constant: usize,
}

impl StorageReport {
    /// `4 m p + 2 p + 2 m`
    pub fn bound(p: usize, m: usize) -> usize {
        4 * m * p + 2 * p + 2 * m
    }
}

/// Result of one outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Continue,
    Finished,
}

/// Stateful LHAC solver over a smooth loss.
pub struct LhacSolver<L: SmoothLoss> {
    loss: L,
    config: SolverConfig,
    weights: Vec<f64>,
    w: Vec<f64>,
    grad: Vec<f64>,
    smooth_value: f64,
    objective: f64,
    report: SubgradientReport,
    initial_violation: f64,
    buffer: CorrectionPairBuffer,
    state: SubproblemState,
    flops: FlopAccount,
    trace: SolverTrace,
    steps: Vec<StepRecord>,
    ws_sizes: Vec<usize>,
    ws_extras: Vec<usize>,
    iteration: usize,
    status: Option<SolveStatus>,
    peak_qhat: usize,
    started: Instant,
}

impl<L: SmoothLoss> LhacSolver<L> {
    /// Sets up the solver at the loss's initial point.
    pub fn new(loss: L, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let p = loss.dim();
        let w = loss.initial_point();
        if w.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: w.len(),
            });
        }
        if !loss.is_feasible(&w) {
            return Err(Error::NotPositiveDefinite);
        }
        let weights = loss.penalty_weights(config.lambda);
        let mut grad = vec![0.0; p];
        let smooth_value = loss.value_and_gradient(&w, &mut grad)?;
        loss.accept(&w);
        let objective = smooth_value + weighted_l1(&weights, &w);
        let report = subgradient(&grad, &w, &weights);
        let initial_violation = report.norm(config.norm);

        let mut trace = SolverTrace::default();
        trace.push(IterationRecord {
            iter: 0,
            objective,
            subgrad_norm: initial_violation,
            ws_size: 0,
            alpha: 0.0,
            sweeps: 0,
            flops_cum: 0,
            time_s: 0.0,
        });

        Ok(Self {
            buffer: CorrectionPairBuffer::new(p, config.memory),
            state: SubproblemState::new(p, config.memory),
            loss,
            weights,
            w,
            grad,
            smooth_value,
            objective,
            report,
            initial_violation,
            flops: FlopAccount::new(),
            trace,
            steps: Vec::new(),
            ws_sizes: Vec::new(),
            ws_extras: Vec::new(),
            iteration: 0,
            status: None,
            peak_qhat: 0,
            started: Instant::now(),
            config,
        })
    }

    pub fn iterate(&self) -> &[f64] {
        &self.w
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn smooth_value(&self) -> f64 {
        self.smooth_value
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn report(&self) -> &SubgradientReport {
        &self.report
    }

    pub fn buffer(&self) -> &CorrectionPairBuffer {
        &self.buffer
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn status(&self) -> Option<&SolveStatus> {
        self.status.as_ref()
    }

    fn converged(&self) -> bool {
        self.report.norm(self.config.norm) <= self.config.epsilon * self.initial_violation
    }

    /// Peak auxiliary storage so far.
    pub fn storage(&self) -> StorageReport {
        StorageReport {
            scaled: self.buffer.storage_reals() + self.peak_qhat + self.state.storage_reals(),
            constant: self.buffer.small_storage_reals(),
        }
    }

    /// Runs one outer iteration, or records the terminal status.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.status.is_some() {
            return Ok(StepOutcome::Finished);
        }
        if self.converged() {
            self.status = Some(SolveStatus::Converged);
            return Ok(StepOutcome::Finished);
        }
        if self.iteration >= self.config.max_iterations {
            self.status = Some(SolveStatus::MaxIterations);
            return Ok(StepOutcome::Finished);
        }
        let k = self.iteration;
        let p = self.w.len();

        let violated = self.report.violated_count();
        let budget = extras_budget(violated, self.config.ws_fraction, p);
        let ws = select_working_set(&self.report, &self.w, budget);
        assert!(
            !ws.is_empty(),
            "empty working set with violation {}",
            self.report.violation_norm
        );

        let rep = match self.buffer.rebuild() {
            Ok(rep) => rep,
            Err(Error::DegenerateCurvature { pivot }) => {
                warn!("iteration {k}: singular compact middle matrix (pivot {pivot:e}); resetting memory");
                self.buffer.clear();
                self.buffer.rebuild()?
            }
            Err(e) => return Err(e),
        };
        self.peak_qhat = self.peak_qhat.max(rep.storage_reals());

        let sweeps = self.config.sweeps_at(k);
        let options = CdOptions {
            sweeps,
            order: match self.config.shuffle_seed {
                Some(seed) => {
                    CoordinateOrder::Shuffled(seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
                }
                None => CoordinateOrder::Ascending,
            },
            hessian: self.config.hessian_rows,
        };
        let outcome = solve_subproblem_in(
            &mut self.state,
            &rep,
            &self.grad,
            &self.w,
            &ws,
            &self.weights,
            &options,
            &mut self.flops,
        );
        drop(rep);
        self.flops.record_sweeps(sweeps as u64);
        self.ws_sizes.push(ws.len());
        self.ws_extras.push(ws.selected_extras);

        let ls = if outcome.delta < 0.0 {
            line_search(
                &self.loss,
                &self.weights,
                &self.w,
                &self.state.d,
                outcome.delta,
                self.objective,
                &self.config.armijo(),
            )
        } else {
            Err(Error::LineSearchFailed {
                iteration: k,
                backtracks: 0,
                delta: outcome.delta,
                objective: self.objective,
            })
        };
        let step = match ls {
            Ok(step) => step,
            Err(Error::LineSearchFailed {
                delta, objective, ..
            }) => {
                warn!("iteration {k}: line search failed (delta = {delta:e})");
                self.status = Some(SolveStatus::LineSearchFailure {
                    iteration: k,
                    delta,
                    objective,
                });
                return Ok(StepOutcome::Finished);
            }
            Err(e) => return Err(e),
        };

        let mut grad_new = vec![0.0; p];
        let smooth_new = self.loss.value_and_gradient(&step.w_new, &mut grad_new)?;
        self.loss.accept(&step.w_new);

        let s: Vec<f64> = step.w_new.iter().zip(&self.w).map(|(a, b)| a - b).collect();
        let t: Vec<f64> = grad_new
            .iter()
            .zip(&self.grad)
            .map(|(a, b)| a - b)
            .collect();
        let accepted = self.buffer.push_pair(&s, &t)?;
        if !accepted {
            debug!("iteration {k}: correction pair rejected by curvature test");
        }

        if self.config.record_steps {
            self.steps.push(StepRecord {
                w: self.w.clone(),
                direction: self.state.d.clone(),
                alpha: step.alpha,
                delta: outcome.delta,
                objective_before: self.objective,
                objective_change: step.objective_change,
                s,
                t,
                pair_accepted: accepted,
            });
        }

        self.w = step.w_new;
        self.grad = grad_new;
        self.smooth_value = smooth_new;
        self.objective = smooth_new + weighted_l1(&self.weights, &self.w);
        self.report = subgradient(&self.grad, &self.w, &self.weights);
        self.iteration += 1;

        self.trace.push(IterationRecord {
            iter: self.iteration,
            objective: self.objective,
            subgrad_norm: self.report.norm(self.config.norm),
            ws_size: ws.len(),
            alpha: step.alpha,
            sweeps,
            flops_cum: self.flops.total,
            time_s: self.started.elapsed().as_secs_f64(),
        });
        Ok(StepOutcome::Continue)
    }

    /// Iterates until a terminal status is reached.
    pub fn run(mut self) -> Result<Solution> {
        while self.step()? == StepOutcome::Continue {}
        Ok(self.into_solution())
    }

    pub fn into_solution(self) -> Solution {
        let storage = self.storage();
        let final_violation = self.report.norm(self.config.norm);
        Solution {
            objective: self.objective,
            status: self.status.unwrap_or(SolveStatus::MaxIterations),
            iterations: self.iteration,
            trace: self.trace,
            flops: self.flops,
            initial_violation: self.initial_violation,
            final_violation,
            steps: self.steps,
            working_set_sizes: self.ws_sizes,
            working_set_extras: self.ws_extras,
            storage,
            w: self.w,
        }
    }
}

/// Minimizes `||lambda o w||_1 + L(w)` with LHAC.
pub fn solve<L: SmoothLoss>(loss: L, config: &SolverConfig) -> Result<Solution> {
    LhacSolver::new(loss, config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::SquaredLoss;
    use crate::numkit::CsrMatrix;

    fn scalar_lasso(target: f64) -> SquaredLoss {
        SquaredLoss::new(CsrMatrix::from_dense(1, 1, &[1.0]).unwrap(), vec![target]).unwrap()
    }

    #[test]
    fn dominant_lambda_converges_immediately() {
        let sol = solve(scalar_lasso(3.0), &SolverConfig::with_lambda(5.0)).unwrap();
        assert_eq!(sol.status, SolveStatus::Converged);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.w, vec![0.0]);
    }

    #[test]
    fn one_dimensional_lasso_is_exact() {
        // argmin (w - 3)^2 / 2 + |w| = 2
        let sol = solve(scalar_lasso(3.0), &SolverConfig::with_lambda(1.0)).unwrap();
        assert!(sol.status.is_converged());
        assert_eq!(sol.w, vec![2.0]);
    }

    #[test]
    fn sweep_schedule() {
        let c = SolverConfig::default();
        let got: Vec<usize> = [0, 2, 3, 6, 27, 100]
            .iter()
            .map(|&k| c.sweeps_at(k))
            .collect();
        assert_eq!(got, vec![1, 1, 2, 3, 10, 10]);
    }

    #[test]
    fn rejects_bad_armijo_constants() {
        let c = SolverConfig {
            beta: 1.0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SolverConfig {
            sigma: 0.0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
