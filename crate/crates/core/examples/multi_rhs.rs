//! TriCG-DR for the first right-hand side, D-TriCG for the next ones.
//!
//! cargo run --release --example multi_rhs

use sqdsolve::probio::{gen_synth3, random_rhs_list};
use sqdsolve::{multi_rhs_driver, tricg_solve, TricgConfig, TricgDrConfig};

fn main() -> sqdsolve::Result<()> {
    let p = gen_synth3(1);
    let rhs = random_rhs_list(p.system.rows(), p.system.cols(), 4, 7);
    let cfg = TricgDrConfig {
        p: 80,
        k: 40,
        eps_svd: 1e-12,
        maxcycle: 20,
        maxit: 6000,
        ..Default::default()
    };
    let (solves, ctx) = multi_rhs_driver(&p.system, &rhs, &cfg)?;
    println!("recycled {} triplets", ctx.k());

    let plain = TricgConfig {
        maxit: 6000,
        ..Default::default()
    };
    for (i, (s, (b, c))) in solves.iter().zip(&rhs).enumerate() {
        let t = tricg_solve(&p.system, b, c, &plain)?;
        println!(
            "rhs {}: {:<8} {:>5} iterations   tricg {:>5}",
            i + 1,
            if i == 0 { "tricg-dr" } else { "d-tricg" },
            s.report().iterations,
            t.report.iterations
        );
    }
    Ok(())
}
