//! Largest elliptic singular triplets with gSSY-DR(p, k), compared with a
//! dense factorization.
//!
//! cargo run --release --example esvd_partial

use sqdsolve::deflate::DeflationBasis;
use sqdsolve::probio::random_sqd;
use sqdsolve::{gssy_dr_run, EsvdConfig};

fn main() -> sqdsolve::Result<()> {
    let p = random_sqd(100, 80, true, 5)?;
    let cfg = EsvdConfig::new(20, 5, 1e-10, 50);
    let res = gssy_dr_run(&p.system, &p.b, &p.c, &cfg)?;
    let exact = DeflationBasis::exact(&p.system, 5)?;

    println!("{} in {} cycles, {} matvecs", res.status, res.cycles, res.matvecs);
    for (i, cycle) in res.cycle_residuals.iter().enumerate() {
        let worst = cycle.iter().copied().fold(0.0, f64::max);
        println!("  cycle {}: max triplet residual {worst:.2e}", i + 1);
    }
    for (approx, exact) in res.sigma.iter().zip(&exact.sigma) {
        println!("  sigma {approx:.12}  dense {exact:.12}");
    }
    Ok(())
}
