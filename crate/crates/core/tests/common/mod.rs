//! Dense oracles shared by the integration tests. Everything here goes
//! through nalgebra factorizations, never through the solver code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sqdsolve::probio::{random_sqd, Problem};
use sqdsolve::SqdSystem;

pub fn dense_m(sys: &SqdSystem) -> DMatrix<f64> {
    sys.m.to_dense()
}

pub fn dense_n(sys: &SqdSystem) -> DMatrix<f64> {
    sys.n.to_dense()
}

pub fn dense_a(sys: &SqdSystem) -> DMatrix<f64> {
    sys.a.to_dense()
}

pub fn dense_k(sys: &SqdSystem) -> DMatrix<f64> {
    let (m, n) = (sys.rows(), sys.cols());
    let a = dense_a(sys);
    let mut k = DMatrix::zeros(m + n, m + n);
    k.view_mut((0, 0), (m, m)).copy_from(&dense_m(sys));
    k.view_mut((0, m), (m, n)).copy_from(&a);
    k.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
    k.view_mut((m, m), (n, n)).copy_from(&(-dense_n(sys)));
    k
}

pub fn cat(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(x.len() + y.len());
    z.rows_mut(0, x.len()).copy_from(x);
    z.rows_mut(x.len(), y.len()).copy_from(y);
    z
}

/// Solution of `K·z = f` by a dense LU.
pub fn dense_solution(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    dense_k(sys).lu().solve(&cat(b, c)).expect("nonsingular K")
}

/// `‖f − K·z‖_{H⁻¹}` with dense Cholesky solves.
pub fn explicit_residual(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let r = cat(b, c) - dense_k(sys) * cat(x, y);
    let m = sys.rows();
    let rx = r.rows(0, m).into_owned();
    let ry = r.rows(m, sys.cols()).into_owned();
    let hx = dense_m(sys).cholesky().unwrap().solve(&rx);
    let hy = dense_n(sys).cholesky().unwrap().solve(&ry);
    (rx.dot(&hx) + ry.dot(&hy)).sqrt()
}

/// Symmetric square root inverse through an eigendecomposition.
pub fn inv_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let e = s.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Singular values (descending) of `M^{-1/2}·A·N^{-1/2}`.
pub fn elliptic_singular_values(sys: &SqdSystem) -> Vec<f64> {
    let b = inv_sqrt(&dense_m(sys)) * dense_a(sys) * inv_sqrt(&dense_n(sys));
    let mut s: Vec<f64> = b.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Galerkin solution over `blockdiag(U, V)`: `z = Z·(ZᵀKZ)⁻¹·Zᵀf`.
pub fn galerkin(sys: &SqdSystem, u: &DMatrix<f64>, v: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
    let (m, n) = (sys.rows(), sys.cols());
    let (ku, kv) = (u.ncols(), v.ncols());
    let mut z = DMatrix::zeros(m + n, ku + kv);
    z.view_mut((0, 0), (m, ku)).copy_from(u);
    z.view_mut((m, ku), (n, kv)).copy_from(v);
    let g = z.transpose() * dense_k(sys) * &z;
    let w = g.lu().solve(&(z.transpose() * cat(b, c))).expect("nonsingular projection");
    z * w
}

pub fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Random problem with n/m in [0.75, 1] (see the ledger on one-sided breakdown).
pub fn random_problem(seed: u64, max_dim: usize, general_spd: bool) -> Problem {
    let m = 20 + (seed as usize * 37 + 11) % (max_dim - 19);
    let n = (m * 3).div_ceil(4) + (seed as usize * 13) % (m - (m * 3).div_ceil(4) + 1);
    let (m, n) = if seed.is_multiple_of(2) { (m, n) } else { (n, m) };
    random_sqd(m, n, general_spd, 1000 + seed).unwrap()
}

/// Unpivoted `S = L·D·Lᵀ` with unit lower `L`.
pub fn dense_ldl(s: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = s.nrows();
    let mut l = DMatrix::identity(n, n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        d[j] = s[(j, j)] - (0..j).map(|t| l[(j, t)] * l[(j, t)] * d[t]).sum::<f64>();
        for i in j + 1..n {
            l[(i, j)] = (s[(i, j)] - (0..j).map(|t| l[(i, t)] * l[(j, t)] * d[t]).sum::<f64>()) / d[j];
        }
    }
    (l, d)
}

/// Columns of a basis block as a dense matrix.
pub fn columns(vecs: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_columns(vecs)
}
