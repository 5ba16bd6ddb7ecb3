//! Sparse logistic regression on a synthetic problem, compared with the
//! ground-truth support.

use lhac::data::{synthetic_logistic, SyntheticSpec};
use lhac::{solve, LogisticLoss, SmoothLoss, SolverConfig};

fn main() -> lhac::Result<()> {
    let prob = synthetic_logistic(&SyntheticSpec {
        density: 0.1,
        ..SyntheticSpec::new(500, 2000, 25, 42)
    })?;
    let truth = prob.truth.clone();
    let loss = LogisticLoss::new(prob.data, prob.labels)?;

    let g0 = loss.gradient(&loss.initial_point())?;
    let lambda_max = g0.iter().fold(0.0f64, |m, g| m.max(g.abs()));

    for frac in [0.5, 0.2, 0.1] {
        let config = SolverConfig {
            epsilon: 1e-6,
            ..SolverConfig::with_lambda(frac * lambda_max)
        };
        let sol = solve(&loss, &config)?;
        let found: Vec<usize> = (0..sol.w.len()).filter(|&j| sol.w[j] != 0.0).collect();
        let hits = found.iter().filter(|&&j| truth[j] != 0.0).count();
        println!(
            "lambda = {:.2} lambda_max: {} after {} iterations, F = {:.6}, {} nonzeros ({} in the true support), {} CD flops",
            frac,
            sol.status,
            sol.iterations,
            sol.objective,
            found.len(),
            hits,
            sol.flops.total
        );
    }
    Ok(())
}
