use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximum number of cyclic Jacobi sweeps.
pub const SVD_MAX_SWEEPS: usize = 30;

/// Thin singular value decomposition `T = Û·diag(σ̂)·V̂ᵀ`.
#[derive(Debug, Clone)]
pub struct DenseSvd {
    pub u: DMatrix<f64>,
    /// Nonincreasing, nonnegative.
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl DenseSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

/// One-sided (Hestenes) Jacobi SVD with cyclic sweeps.
///
/// Singular values come out sorted nonincreasing; ties keep the column order
/// of the sweep. Each right singular vector is signed so that its first
/// nonzero entry is positive, and the matching left vector flips with it.
pub fn dense_svd(t: &DMatrix<f64>) -> Result<DenseSvd> {
    if t.nrows() == 0 || t.ncols() == 0 {
        return Err(Error::InvalidConfig("dense_svd of an empty matrix".into()));
    }
    if t.nrows() < t.ncols() {
        let s = dense_svd_tall(&t.transpose())?;
        let mut out = DenseSvd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        };
        fix_signs(&mut out);
        return Ok(out);
    }
    let mut out = dense_svd_tall(t)?;
    fix_signs(&mut out);
    Ok(out)
}

fn dense_svd_tall(t: &DMatrix<f64>) -> Result<DenseSvd> {
    let (rows, cols) = t.shape();
    let mut w = t.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    let tol = f64::EPSILON * rows.max(4) as f64;

    let mut converged = cols == 1;
    let mut last_off = 0.0f64;
    for _ in 0..SVD_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        last_off = 0.0;
        for i in 0..cols - 1 {
            for j in i + 1..cols {
                let (a, b, c) = {
                    let wi = w.column(i);
                    let wj = w.column(j);
                    (wi.norm_squared(), wj.norm_squared(), wi.dot(&wj))
                };
                let scale = (a * b).sqrt();
                if scale == 0.0 || c == 0.0 {
                    continue;
                }
                let rel = c.abs() / scale;
                last_off = last_off.max(rel);
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (b - a) / (2.0 * c);
                let tn = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + tn * tn).sqrt();
                let sn = cs * tn;
                rotate_columns(&mut w, i, j, cs, sn);
                rotate_columns(&mut v, i, j, cs, sn);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: SVD_MAX_SWEEPS,
            off: last_off,
        });
    }

    let norms: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    // stable: equal values keep sweep order
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap_or(std::cmp::Ordering::Equal));

    let smax = norms[order[0]];
    let negligible = smax * f64::EPSILON * rows as f64;
    let mut u = DMatrix::<f64>::zeros(rows, cols);
    let mut vs = DMatrix::<f64>::zeros(cols, cols);
    let mut sigma = DVector::<f64>::zeros(cols);
    let mut deficient = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        sigma[dst] = norms[src];
        vs.set_column(dst, &v.column(src));
        if norms[src] > negligible && norms[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / norms[src]));
        } else {
            deficient.push(dst);
        }
    }
    complete_basis(&mut u, &deficient);
    Ok(DenseSvd { u, sigma, v: vs })
}

fn rotate_columns(m: &mut DMatrix<f64>, i: usize, j: usize, cs: f64, sn: f64) {
    for r in 0..m.nrows() {
        let xi = m[(r, i)];
        let xj = m[(r, j)];
        m[(r, i)] = cs * xi - sn * xj;
        m[(r, j)] = sn * xi + cs * xj;
    }
}

/// Fills the listed columns with unit vectors orthogonal to all others.
fn complete_basis(u: &mut DMatrix<f64>, deficient: &[usize]) {
    if deficient.is_empty() {
        return;
    }
    let rows = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|j| !deficient.contains(j)).collect();
    let mut candidate = 0;
    for &col in deficient {
        while candidate < rows {
            let mut e = DVector::<f64>::zeros(rows);
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let c = u.column(f).dot(&e);
                    e.axpy(-c, &u.column(f).into_owned(), 1.0);
                }
            }
            let n = e.norm();
            if n > 0.5 {
                u.set_column(col, &(e / n));
                filled.push(col);
                break;
            }
        }
    }
}

fn fix_signs(s: &mut DenseSvd) {
    for j in 0..s.v.ncols() {
        let first = s.v.column(j).iter().copied().find(|x| x.abs() > 1e-14);
        if let Some(x) = first {
            if x < 0.0 {
                s.v.column_mut(j).neg_mut();
                s.u.column_mut(j).neg_mut();
            }
        }
    }
}

/// Solves `K x = f` for a small dense nonsingular `K` by LU with partial
/// pivoting and one step of iterative refinement.
pub fn dense_solve(k: &DMatrix<f64>, f: &DVector<f64>) -> Result<DVector<f64>> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: k.ncols(),
        });
    }
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let lu = k.clone().lu();
    let upper = lu.u();
    let kmax = k.abs().max();
    let threshold = f64::EPSILON * kmax * n as f64;
    for i in 0..n {
        let pivot = upper[(i, i)];
        if pivot.abs() <= threshold || !pivot.is_finite() {
            return Err(Error::Singular { index: i, pivot });
        }
    }
    let mut x = lu.solve(f).ok_or(Error::Singular { index: 0, pivot: 0.0 })?;
    let r = f - k * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x)
}
