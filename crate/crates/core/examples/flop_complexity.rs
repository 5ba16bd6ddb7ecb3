//! Coordinate-descent flops with the low-rank update against dense Hessian
//! rows, for growing `p`.

use lhac::cd::HessianRows;
use lhac::data::{synthetic_lasso, SyntheticSpec};
use lhac::{solve, SmoothLoss, SolverConfig, SquaredLoss};

fn main() -> lhac::Result<()> {
    println!("p,lowrank_flops,dense_flops,ratio,max_step_lowrank,max_step_dense");
    for p in [100, 200, 400, 800, 1600] {
        let prob = synthetic_lasso(&SyntheticSpec::new(p / 2, p, 10, p as u64))?;
        let loss = SquaredLoss::new(prob.data, prob.labels)?;
        let g0 = loss.gradient(&loss.initial_point())?;
        let config = SolverConfig {
            epsilon: 1e-5,
            ..SolverConfig::with_lambda(0.1 * g0.iter().fold(0.0f64, |m, g| m.max(g.abs())))
        };
        let low = solve(&loss, &config)?;
        let dense = solve(
            &loss,
            &SolverConfig {
                hessian_rows: HessianRows::Dense,
                ..config
            },
        )?;
        println!(
            "{p},{},{},{:.4},{},{}",
            low.flops.total,
            dense.flops.total,
            low.flops.total as f64 / dense.flops.total as f64,
            low.flops.max_step_cost(),
            dense.flops.max_step_cost()
        );
    }
    Ok(())
}
