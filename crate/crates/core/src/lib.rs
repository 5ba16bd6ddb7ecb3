//! Solver for `min_w ||lambda o w||_1 + L(w)` with a smooth convex `L`.
//!
//! Each outer iteration picks a working set from the minimum-norm subgradient,
//! minimizes a quadratic model built from a compact L-BFGS matrix by
//! coordinate descent, and takes an Armijo step. A coordinate step costs
//! `O(m)` flops for `m` stored correction pairs, independent of `p`.
//!
//! ```
//! use lhac::{solve, SolverConfig, SquaredLoss};
//! use lhac::numkit::CsrMatrix;
//!
//! let x = CsrMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
//! let loss = SquaredLoss::new(x, vec![4.0, 0.1]).unwrap();
//! let sol = solve(loss, &SolverConfig::with_lambda(0.5)).unwrap();
//! assert!(sol.status.is_converged());
//! assert!(sol.w[0] > 0.0 && sol.w[1] == 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod active_set;
pub mod cd;
pub mod cli;
pub mod data;
pub mod error;
pub mod fista;
pub mod flops;
pub mod lbfgs;
pub mod loss;
pub mod numkit;
pub mod solver;

pub use active_set::{NormKind, SubgradientReport, WorkingSet};
pub use error::{Error, Result};
pub use fista::{fista_solve, FistaConfig, FistaSolution};
pub use flops::FlopAccount;
pub use lbfgs::{CompactRepresentation, CorrectionPairBuffer};
pub use loss::{LogisticLoss, SicsLoss, SmoothLoss, SquaredLoss};
pub use solver::{solve, LhacSolver, Solution, SolveStatus, SolverConfig, SolverTrace};
