//! Writes seeded fixtures: `cargo run --example generate_data -- <out_dir> [seed]`
//!
//! Produces `logistic.svm`, `lasso.svm` and `sics_20.csv`.

use std::path::PathBuf;

use lhac::data::{
    save_covariance, save_libsvm, synthetic_covariance, synthetic_lasso, synthetic_logistic,
    SyntheticSpec,
};

fn main() -> lhac::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "data".into()));
    let seed: u64 = args
        .next()
        .map(|s| s.parse().expect("seed must be an integer"))
        .unwrap_or(20);
    std::fs::create_dir_all(&dir)?;

    let logistic = synthetic_logistic(&SyntheticSpec {
        density: 0.1,
        ..SyntheticSpec::new(200, 500, 20, seed)
    })?;
    save_libsvm(&dir.join("logistic.svm"), &logistic.data, &logistic.labels)?;

    let lasso = synthetic_lasso(&SyntheticSpec::new(600, 300, 20, seed))?;
    save_libsvm(&dir.join("lasso.svm"), &lasso.data, &lasso.labels)?;

    let cov = synthetic_covariance(20, 100, seed)?;
    save_covariance(&dir.join("sics_20.csv"), &cov)?;

    println!(
        "wrote {} (nnz {}), {} (nnz {}), {}",
        dir.join("logistic.svm").display(),
        logistic.data.nnz(),
        dir.join("lasso.svm").display(),
        lasso.data.nnz(),
        dir.join("sics_20.csv").display()
    );
    Ok(())
}
