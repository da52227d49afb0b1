//! TriCG on a random SQD system with dense SPD weights.
//!
//! cargo run --example tricg_basic

use sqdsolve::probio::random_sqd;
use sqdsolve::{tricg_solve, TricgConfig};

fn main() -> sqdsolve::Result<()> {
    let p = random_sqd(80, 70, true, 11)?;
    let cfg = TricgConfig {
        tol: 1e-10,
        explicit_residual: true,
        ..Default::default()
    };
    let sol = tricg_solve(&p.system, &p.b, &p.c, &cfg)?;

    for rec in sol.report.history.iter().step_by(10) {
        println!(
            "iter {:>3}  recurrence {:.3e}  explicit {:.3e}",
            rec.iteration,
            rec.residual,
            rec.explicit_residual.unwrap()
        );
    }
    println!(
        "{} after {} iterations ({} matvecs), final residual {:.3e}",
        sol.report.status,
        sol.report.iterations,
        sol.report.matvecs,
        sol.report.final_residual()
    );
    Ok(())
}
