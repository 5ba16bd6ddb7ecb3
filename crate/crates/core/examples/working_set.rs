//! Working-set size per outer iteration on a lasso problem, as CSV on stdout.

use lhac::data::{synthetic_lasso, SyntheticSpec};
use lhac::{solve, SmoothLoss, SolverConfig, SquaredLoss};

fn main() -> lhac::Result<()> {
    let prob = synthetic_lasso(&SyntheticSpec::new(600, 300, 20, 9))?;
    let loss = SquaredLoss::new(prob.data, prob.labels)?;
    let g0 = loss.gradient(&loss.initial_point())?;
    let lambda = 0.05 * g0.iter().fold(0.0f64, |m, g| m.max(g.abs()));

    let sol = solve(
        &loss,
        &SolverConfig {
            epsilon: 1e-10,
            ..SolverConfig::with_lambda(lambda)
        },
    )?;
    let nnz = sol.w.iter().filter(|v| **v != 0.0).count();
    println!("iter,ws_size,extras,final_nnz");
    for (k, (size, extra)) in sol
        .working_set_sizes
        .iter()
        .zip(&sol.working_set_extras)
        .enumerate()
    {
        println!("{},{size},{extra},{nnz}", k + 1);
    }
    Ok(())
}
