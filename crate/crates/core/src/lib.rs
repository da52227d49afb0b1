//! Krylov solvers for symmetric quasi-definite (SQD) systems
//!
//! ```text
//! [ M   A ] [x]   [b]
//! [ Aᵀ −N ] [y] = [c]      M, N symmetric positive definite
//! ```
//!
//! built on the generalized Saunders–Simon–Yip (gSSY) tridiagonalization:
//!
//! * [`tricg`]: TriCG, the short-recurrence Galerkin solver.
//! * [`esvd`]: gSSY-DR(p, k), largest elliptic singular triplets by deflated
//!   restarting.
//! * [`tricgdr`]: TriCG-DR(p, k), TriCG interleaved with those restarts.
//! * [`multirhs`]: D-TriCG, recycling the deflation space for further
//!   right-hand sides.
//! * [`deflate`]: projectors, coarse correction and dense diagnostics.
//!
//! Residuals are measured in the `H⁻¹` norm, `H = blockdiag(M, N)`.
//!
//! ```
//! use sqdsolve::probio::random_sqd;
//! use sqdsolve::tricg::{tricg_solve, TricgConfig};
//!
//! let p = random_sqd(30, 30, true, 3).unwrap();
//! let sol = tricg_solve(&p.system, &p.b, &p.c, &TricgConfig::default()).unwrap();
//! assert!(sol.report.converged());
//! ```

pub mod cli;
pub mod deflate;
pub mod error;
pub mod esvd;
pub mod gssy;
pub mod multirhs;
pub mod opcore;
pub mod probio;
pub mod report;
pub mod system;
pub mod tricg;
pub mod tricgdr;

pub use deflate::DeflationBasis;
pub use error::{Error, Result};
pub use esvd::{gssy_dr_run, EsvdConfig, EsvdResult};
pub use multirhs::{dtricg_solve, multi_rhs_driver, RecycleContext};
pub use opcore::{SparseMatrix, SpdOperator};
pub use report::{ConvergenceRecord, SolveReport, Stage, Status};
pub use system::SqdSystem;
pub use tricg::{tricg_solve, Solution, TricgConfig};
pub use tricgdr::{tricg_dr_solve, DrOutcome, TricgDrConfig};
