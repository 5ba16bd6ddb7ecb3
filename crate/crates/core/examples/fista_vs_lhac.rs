//! Both solvers on one logistic problem; writes `lhac.csv` and `fista.csv`
//! traces into the directory given as first argument (default: current).

use std::fs::File;
use std::path::PathBuf;

use lhac::data::{synthetic_logistic, SyntheticSpec};
use lhac::{fista_solve, solve, FistaConfig, LogisticLoss, SmoothLoss, SolverConfig};

fn main() -> lhac::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let prob = synthetic_logistic(&SyntheticSpec {
        density: 0.1,
        ..SyntheticSpec::new(200, 500, 20, 5)
    })?;
    let loss = LogisticLoss::new(prob.data, prob.labels)?;
    let g0 = loss.gradient(&loss.initial_point())?;
    let lambda = 0.1 * g0.iter().fold(0.0f64, |m, g| m.max(g.abs()));

    loss.reset_counter();
    let lhac = solve(
        &loss,
        &SolverConfig {
            epsilon: 1e-6,
            ..SolverConfig::with_lambda(lambda)
        },
    )?;
    let lhac_passes = loss.nnz_touched() as f64 / loss.data().nnz() as f64;

    loss.reset_counter();
    let fista = fista_solve(
        &loss,
        &FistaConfig {
            lambda,
            epsilon: 1e-6,
            ..FistaConfig::default()
        },
    )?;
    let fista_passes = loss.nnz_touched() as f64 / loss.data().nnz() as f64;

    lhac.trace
        .write_csv(File::create(dir.join("lhac.csv"))?, true)?;
    fista
        .trace
        .write_csv(File::create(dir.join("fista.csv"))?, true)?;
    println!("solver,status,objective,iterations,data_passes");
    println!(
        "lhac,{},{:.12},{},{lhac_passes:.0}",
        lhac.status, lhac.objective, lhac.iterations
    );
    println!(
        "fista,{},{:.12},{},{fista_passes:.0}",
        fista.status, fista.objective, fista.iterations
    );
    Ok(())
}
