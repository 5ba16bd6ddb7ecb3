//! Flop accounting for the inner coordinate descent.
//!
//! Total complexity is `kappa_o * kappa_i * p * T_CD`: outer iterations times
//! inner sweeps times coordinates times the cost of one coordinate step.

use std::collections::BTreeMap;

/// Running count of floating-point operations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlopCounter(u64);

impl FlopCounter {
    pub fn new() -> Self {
        Self(0)
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.0 += n;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}

/// What a recorded flop count was spent on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlopKind {
    /// One coordinate descent step (the `T_CD` unit).
    CoordinateStep,
    /// Diagonal precomputation at the start of a subproblem.
    Diagonal,
}

/// Solver-wide accounting: outer count, total sweeps and per-step costs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlopAccount {
    /// Outer iterations (`kappa_o`).
    pub outer: u64,
    /// Inner sweeps summed over outer iterations.
    pub sweeps: u64,
    /// Coordinate steps taken.
    pub steps: u64,
    /// Histogram of per-step costs: cost -> number of steps with that cost.
    pub step_costs: BTreeMap<u64, u64>,
    /// Flops spent on diagonal precomputation.
    pub diagonal: u64,
    /// Coordinate-step flops; always equals the histogram total.
    pub total: u64,
}

impl FlopAccount {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_flops(&mut self, kind: FlopKind, count: u64) {
        match kind {
            FlopKind::CoordinateStep => {
                self.steps += 1;
                *self.step_costs.entry(count).or_insert(0) += 1;
                self.total += count;
            }
            FlopKind::Diagonal => self.diagonal += count,
        }
    }

    pub fn record_sweeps(&mut self, sweeps: u64) {
        self.outer += 1;
        self.sweeps += sweeps;
    }

    /// Sum of the step-cost histogram, computed independently of `total`.
    pub fn histogram_total(&self) -> u64 {
        self.step_costs.iter().map(|(cost, n)| cost * n).sum()
    }

    /// Largest per-step cost seen.
    pub fn max_step_cost(&self) -> u64 {
        self.step_costs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn merge(&mut self, other: &FlopAccount) {
        self.outer += other.outer;
        self.sweeps += other.sweeps;
        self.steps += other.steps;
        for (cost, n) in &other.step_costs {
            *self.step_costs.entry(*cost).or_insert(0) += n;
        }
        self.diagonal += other.diagonal;
        self.total += other.total;
    }
}
