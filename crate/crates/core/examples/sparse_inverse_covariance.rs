//! Sparse inverse covariance estimation on the bundled 20 x 20 sample
//! covariance, printing the sparsity pattern of the estimate.

use std::path::Path;

use lhac::data::load_covariance;
use lhac::loss::unpack_upper;
use lhac::{solve, SicsLoss, SolverConfig};

fn main() -> lhac::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sics_20.csv");
    let s = load_covariance(&path)?;
    let p = s.order();
    let loss = SicsLoss::new(s)?;
    let config = SolverConfig {
        epsilon: 1e-6,
        ..SolverConfig::with_lambda(0.5)
    };
    let sol = solve(&loss, &config)?;
    assert!(loss.pd_check(&sol.w));
    let x = unpack_upper(p, &sol.w);

    println!(
        "{} in {} iterations, F = {:.8}",
        sol.status, sol.iterations, sol.objective
    );
    for i in 0..p {
        let row: String = (0..p)
            .map(|j| match x.get(i, j) {
                v if i == j => {
                    if v > 0.0 {
                        'D'
                    } else {
                        '?'
                    }
                }
                v if v > 0.0 => '+',
                v if v < 0.0 => '-',
                _ => '.',
            })
            .collect();
        println!("  {row}");
    }
    Ok(())
}
