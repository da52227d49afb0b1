//! The synth1 comparison: TriCG and TriCG-DR(k + 80, k) for k = 20, 40, 60,
//! with one CSV history per run.
//!
//! cargo run --release --example experiment_one [out-dir]

use std::path::PathBuf;

use sqdsolve::probio::{gen_synth1, write_history_csv};
use sqdsolve::{tricg_dr_solve, tricg_solve, TricgConfig, TricgDrConfig};

fn main() -> sqdsolve::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "exp1-out".into());
    std::fs::create_dir_all(&out)?;
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
    write_history_csv(out.join("tricg.csv"), &plain.report.history)?;
    println!("tricg        {:>15} matvecs {:>6}", plain.report.status.to_string(), plain.report.matvecs);

    for k in [20, 40, 60] {
        let cfg = TricgDrConfig {
            p: k + 80,
            k,
            tol: 1e-8,
            eps_svd: 1e-10,
            maxcycle: 80,
            maxit: 40_000,
            ..Default::default()
        };
        let r = tricg_dr_solve(&p.system, &p.b, &p.c, &cfg)?.solution.report;
        write_history_csv(out.join(format!("tricg-dr-k{k}.csv")), &r.history)?;
        println!("tricg-dr k={k} {:>15} matvecs {:>6} cycles {}", r.status.to_string(), r.matvecs, r.cycles);
    }
    Ok(())
}
