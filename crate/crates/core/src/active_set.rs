//! Optimality violations and greedy working-set selection.

use crate::numkit::{norm2, norm_inf};

/// Minimum-norm subgradient of `F = ||lambda o w||_1 + L` at `w`.
///
/// Entry `j` is `g_j + lambda_j` for `w_j > 0`, `g_j - lambda_j` for `w_j < 0`
/// and `max(|g_j| - lambda_j, 0)` for `w_j = 0`. The last case stores a
/// magnitude only, which is all ranking and termination need.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientReport {
    pub values: Vec<f64>,
    pub violation_norm: f64,
}

impl SubgradientReport {
    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => self.violation_norm,
            NormKind::Inf => norm_inf(&self.values),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Number of coordinates with a nonzero violation.
    pub fn violated_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}

/// Norm used for the termination test.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormKind {
    #[default]
    L2,
    Inf,
}

pub fn subgradient(grad: &[f64], w: &[f64], weights: &[f64]) -> SubgradientReport {
    assert_eq!(grad.len(), w.len());
    assert_eq!(grad.len(), weights.len());
    let values: Vec<f64> = grad
        .iter()
        .zip(w)
        .zip(weights)
        .map(|((&g, &x), &lam)| {
            if x > 0.0 {
                g + lam
            } else if x < 0.0 {
                g - lam
            } else {
                (g.abs() - lam).max(0.0)
            }
        })
        .collect();
    let violation_norm = norm2(&values);
    SubgradientReport {
        values,
        violation_norm,
    }
}

/// Coordinates allowed to move in one subproblem, ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WorkingSet {
    pub indices: Vec<usize>,
    /// How many indices came from the violator ranking and were not already nonzero.
    pub selected_extras: usize,
}

impl WorkingSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// All coordinates `0..p`.
    pub fn full(p: usize) -> Self {
        Self {
            indices: (0..p).collect(),
            selected_extras: 0,
        }
    }
}

/// Extra-violator budget `max(1, ceil(fraction * violated))`, capped at `p`.
pub fn extras_budget(violated: usize, fraction: f64, p: usize) -> usize {
    let raw = (fraction * violated as f64).ceil() as usize;
    raw.max(1).min(p.max(1))
}

/// Working set = nonzeros of `w` plus the `s_k` largest violators.
///
/// The violators are ranked over every coordinate with nonzero violation,
/// nonzeros of `w` included, by decreasing `|values|`; ties go to the lower
/// index.
pub fn select_working_set(report: &SubgradientReport, w: &[f64], s_k: usize) -> WorkingSet {
    assert!(s_k >= 1, "working-set budget must be positive");
    let mut violators: Vec<usize> = (0..report.values.len())
        .filter(|&j| report.values[j] != 0.0)
        .collect();

    let by_rank = |a: &usize, b: &usize| {
        report.values[*b]
            .abs()
            .total_cmp(&report.values[*a].abs())
            .then(a.cmp(b))
    };
    if s_k < violators.len() {
        violators.select_nth_unstable_by(s_k - 1, by_rank);
        violators.truncate(s_k);
    }

    let mut member = vec![false; w.len()];
    for (j, &x) in w.iter().enumerate() {
        if x != 0.0 {
            member[j] = true;
        }
    }
    let mut selected_extras = 0;
    for &j in &violators {
        if !member[j] {
            member[j] = true;
            selected_extras += 1;
        }
    }
    WorkingSet {
        indices: (0..w.len()).filter(|&j| member[j]).collect(),
        selected_extras,
    }
}
