//! The compact L-BFGS matrix against the textbook BFGS recursion, and the
//! cost of reading one entry of `B d`.

use std::collections::VecDeque;

use lhac::flops::FlopCounter;
use lhac::lbfgs::{recursive_bfgs, CorrectionPairBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lhac::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (p, m) = (40, 6);
    let curvature: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..3.0)).collect();

    let mut buf = CorrectionPairBuffer::new(p, m);
    let mut kept = VecDeque::new();
    for _ in 0..10 {
        let s: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t: Vec<f64> = s.iter().zip(&curvature).map(|(a, c)| a * c).collect();
        if buf.push_pair(&s, &t)? {
            kept.push_back((s, t));
            if kept.len() > m {
                kept.pop_front();
            }
        }
    }

    let rep = buf.rebuild()?;
    let compact = rep.explicit_matrix();
    let recursive = recursive_bfgs(p, rep.gamma(), &kept);
    let gap = compact
        .iter()
        .zip(&recursive)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    println!(
        "{} pairs, gamma = {:.4}, max |compact - recursive| = {gap:.2e}",
        rep.pairs(),
        rep.gamma()
    );

    let d: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let dhat = rep.qhat_times(&d);
    let mut flops = FlopCounter::new();
    let bd0 = rep.bd_entry(0, d[0], &dhat, &mut flops);
    let dense: f64 = (0..p).map(|k| compact[k] * d[k]).sum();
    println!(
        "(Bd)_0 = {bd0:.6} (dense row: {dense:.6}) in {} flops, versus {} for a dense row",
        flops.get(),
        2 * p
    );
    println!(
        "storage: {} reals for pairs, {} for Qhat",
        buf.storage_reals(),
        rep.storage_reals()
    );
    Ok(())
}
