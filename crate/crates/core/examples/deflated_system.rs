//! Exact deflation: with exact triplets the deflated system is solved by
//! TriCG on the projected right-hand side, and the correction recovers the
//! solution of the original system. The spectrum shows what was removed.
//!
//! cargo run --example deflated_system

use nalgebra::DVector;
use sqdsolve::deflate::{spectrum_diag, DeflationBasis};
use sqdsolve::{tricg_solve, SparseMatrix, SqdSystem, TricgConfig};

fn main() -> sqdsolve::Result<()> {
    let a = SparseMatrix::from_diagonal(&[40.0, 25.0, 3.0, 2.0, 1.0, 0.5])?;
    let sys = SqdSystem::with_identity(a);
    let b = DVector::from_element(6, 1.0);
    let c = DVector::from_fn(6, |i, _| i as f64);
    let cfg = TricgConfig {
        tol: 1e-12,
        ..Default::default()
    };

    let plain = tricg_solve(&sys, &b, &c, &cfg)?;
    let basis = DeflationBasis::exact(&sys, 2)?;
    let (pb, pc) = basis.deflated_rhs(&b, &c);
    let deflated = tricg_solve(&sys, &pb, &pc, &cfg)?;
    let (x, y) = basis.correct_solution(&sys, &b, &c, &deflated.x, &deflated.y)?;
    println!("TriCG iterations: {} plain, {} deflated", plain.report.iterations, deflated.report.iterations);
    println!("residual after correction: {:.2e}", sys.residual_norm(&b, &c, &x, &y));

    let fmt = |v: Vec<f64>| v.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>().join(" ");
    println!("spectrum:          {}", fmt(spectrum_diag(&sys, None)?));
    println!("deflated spectrum: {}", fmt(spectrum_diag(&sys, Some(&basis))?));
    Ok(())
}
