//! Round trip through MatrixMarket and a history CSV, then solve from the file.
//!
//! cargo run --example matrix_market

use sqdsolve::probio::{gen_ones_rhs, read_history_csv, read_matrix_market, write_history_csv, write_matrix_market};
use sqdsolve::{tricg_solve, SparseMatrix, SqdSystem, TricgConfig};

fn main() -> sqdsolve::Result<()> {
    let dir = std::env::temp_dir().join("sqdsolve-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("tridiag.mtx");

    let n = 50;
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, 4.0 + i as f64 / n as f64));
        if i + 1 < n {
            t.push((i, i + 1, -1.0));
            t.push((i + 1, i, -1.0));
        }
    }
    write_matrix_market(&path, &SparseMatrix::from_triplets(n, n, &t)?)?;

    let a = read_matrix_market(&path)?;
    println!("{}: {}x{}, {} entries", path.display(), a.rows(), a.cols(), a.nnz());
    let (b, c) = gen_ones_rhs(a.rows(), a.cols());
    let sys = SqdSystem::with_identity(a);
    let sol = tricg_solve(&sys, &b, &c, &TricgConfig::default())?;

    let csv = dir.join("history.csv");
    write_history_csv(&csv, &sol.report.history)?;
    let back = read_history_csv(&csv)?;
    println!("{} records written to {}, {} read back", sol.report.history.len(), csv.display(), back.len());
    Ok(())
}
