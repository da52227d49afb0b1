//! TriCG-DR against TriCG on a diagonal model with 60 large singular values.
//!
//! cargo run --release --example tricg_dr

use sqdsolve::probio::gen_synth1;
use sqdsolve::report::Stage;
use sqdsolve::{tricg_dr_solve, tricg_solve, TricgConfig, TricgDrConfig};

fn main() -> sqdsolve::Result<()> {
    let p = gen_synth1(1);
    let plain = tricg_solve(
        &p.system,
        &p.b,
        &p.c,
        &TricgConfig {
            maxit: 40_000,
            ..Default::default()
        },
    )?;
    println!("TriCG: {} after {} matvecs", plain.report.status, plain.report.matvecs);

    let cfg = TricgDrConfig {
        p: 140,
        k: 60,
        maxcycle: 80,
        maxit: 40_000,
        ..Default::default()
    };
    let out = tricg_dr_solve(&p.system, &p.b, &p.c, &cfg)?;
    let rep = &out.solution.report;
    let restarting = rep.history.iter().filter(|r| r.stage == Stage::Restarting).count();
    println!(
        "TriCG-DR(140, 60): {} after {} matvecs, {} cycles, {} restarting iterations",
        rep.status, rep.matvecs, rep.cycles, restarting
    );
    println!(
        "deflation space: k = {}, largest triplet residual {:.2e}",
        out.recycle.k(),
        out.recycle.basis.eps
    );
    Ok(())
}
