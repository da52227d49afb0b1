//! Deflation of the largest elliptic singular values.
//!
//! With `P = I − M·Ũ_k·Ũ_kᵀ` and `Q = I − Ṽ_k·Ṽ_kᵀ·N`, the deflated system
//! `𝒫·K·ũ = 𝒫·f` (`𝒫 = blockdiag(P, Qᵀ)`) loses the `k` largest triplets,
//! and a solution of the original system is recovered from any solution of
//! the deflated one. Projectors are applied matrix-free.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::esvd::EsvdResult;
use crate::gssy::BasisBlock;
use crate::opcore::dense_solve;
use crate::system::{split, stack, SqdSystem};

/// Largest `m + n` accepted by the dense diagnostics.
pub const DENSE_DIAG_MAX_DIM: usize = 2000;

/// Approximate elliptic singular triplets used for deflation.
#[derive(Debug, Clone)]
pub struct DeflationBasis {
    /// `Ũ_k` with images `M·Ũ_k`.
    pub u: BasisBlock,
    /// `Ṽ_k` with images `N·Ṽ_k`.
    pub v: BasisBlock,
    pub sigma: Vec<f64>,
    /// `Ũ_kᵀ·A·Ṽ_k`
    pub t_k: DMatrix<f64>,
    /// Largest triplet residual of the basis (zero for exact triplets).
    pub eps: f64,
}

impl DeflationBasis {
    /// An empty basis (`k = 0`): all projectors are identities.
    pub fn empty() -> Self {
        DeflationBasis {
            u: BasisBlock::default(),
            v: BasisBlock::default(),
            sigma: vec![],
            t_k: DMatrix::zeros(0, 0),
            eps: 0.0,
        }
    }

    /// Builds a basis from columns and their images; `T_k` is computed as
    /// `Ũ_kᵀ·A·Ṽ_k`.
    pub fn from_parts(sys: &SqdSystem, u: BasisBlock, v: BasisBlock, sigma: Vec<f64>, eps: f64) -> Result<Self> {
        let k = sigma.len();
        if u.len() != k || v.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: u.len().min(v.len()),
            });
        }
        let av: Vec<DVector<f64>> = v.vecs.iter().map(|x| sys.a.mul_vec(x)).collect();
        let t_k = DMatrix::from_fn(k, k, |i, j| u.vecs[i].dot(&av[j]));
        Ok(DeflationBasis { u, v, sigma, t_k, eps })
    }

    pub fn from_esvd(sys: &SqdSystem, res: &EsvdResult) -> Result<Self> {
        Self::from_parts(sys, res.u.clone(), res.v.clone(), res.sigma.clone(), res.max_residual())
    }

    /// The `k` largest exact triplets from a dense factorization
    /// `A = M·Ũ·Σ·Ṽᵀ·N` (diagnostic; limited to [`DENSE_DIAG_MAX_DIM`]).
    pub fn exact(sys: &SqdSystem, k: usize) -> Result<Self> {
        let (m, n) = (sys.rows(), sys.cols());
        check_cap(m + n)?;
        if k > m.min(n) {
            return Err(Error::InvalidConfig(format!("k = {k} exceeds min(m, n)")));
        }
        let lm = cholesky_factor(&sys.m.to_dense())?;
        let ln = cholesky_factor(&sys.n.to_dense())?;
        // C = L_M⁻¹·A·L_N⁻ᵀ
        let a = sys.a.to_dense();
        let left = lm.solve_lower_triangular(&a).ok_or(Error::Singular { index: 0, pivot: 0.0 })?;
        let c = ln
            .solve_lower_triangular(&left.transpose())
            .ok_or(Error::Singular { index: 0, pivot: 0.0 })?
            .transpose();
        let svd = c.svd(true, true);
        let (pu, s, qv) = (svd.u.unwrap(), svd.singular_values, svd.v_t.unwrap().transpose());
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap());
        let mut u = BasisBlock::default();
        let mut v = BasisBlock::default();
        let mut sigma = Vec::new();
        for &i in order.iter().take(k) {
            let ui = lm
                .transpose()
                .solve_upper_triangular(&pu.column(i).into_owned())
                .ok_or(Error::Singular { index: i, pivot: 0.0 })?;
            let vi = ln
                .transpose()
                .solve_upper_triangular(&qv.column(i).into_owned())
                .ok_or(Error::Singular { index: i, pivot: 0.0 })?;
            let (mu, nv) = (sys.m.apply(&ui), sys.n.apply(&vi));
            u.push(ui, mu);
            v.push(vi, nv);
            sigma.push(s[i]);
        }
        Self::from_parts(sys, u, v, sigma, 0.0)
    }

    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// `P·w = w − M·Ũ·(Ũᵀ·w)`
    pub fn apply_p(&self, w: &DVector<f64>) -> DVector<f64> {
        subtract(w, &self.u.images, &self.u.vecs)
    }

    /// `Pᵀ·w = w − Ũ·((M·Ũ)ᵀ·w)`
    pub fn apply_pt(&self, w: &DVector<f64>) -> DVector<f64> {
        subtract(w, &self.u.vecs, &self.u.images)
    }

    /// `Qᵀ·w = w − N·Ṽ·(Ṽᵀ·w)`
    pub fn apply_qt(&self, w: &DVector<f64>) -> DVector<f64> {
        subtract(w, &self.v.images, &self.v.vecs)
    }

    /// `Q·w = w − Ṽ·((N·Ṽ)ᵀ·w)`
    pub fn apply_q(&self, w: &DVector<f64>) -> DVector<f64> {
        subtract(w, &self.v.vecs, &self.v.images)
    }

    /// `𝒫·[r; s]`
    pub fn apply_cal_p(&self, r: &DVector<f64>, s: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (self.apply_p(r), self.apply_qt(s))
    }

    /// `𝒫ᵀ·[x; y]`
    pub fn apply_cal_pt(&self, x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (self.apply_pt(x), self.apply_q(y))
    }

    /// Right-hand side `(P·b, Qᵀ·c)` of the deflated system.
    pub fn deflated_rhs(&self, b: &DVector<f64>, c: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        self.apply_cal_p(b, c)
    }

    /// `[[I, T_k], [T_kᵀ, −I]]`
    pub fn coarse_matrix(&self) -> DMatrix<f64> {
        let k = self.k();
        let mut l = DMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            l[(i, i)] = 1.0;
            l[(k + i, k + i)] = -1.0;
        }
        l.view_mut((0, k), (k, k)).copy_from(&self.t_k);
        l.view_mut((k, 0), (k, k)).copy_from(&self.t_k.transpose());
        l
    }

    /// `(d_x, d_y) = [[I, T_k], [T_kᵀ, −I]]⁻¹·(Ũᵀ·b, Ṽᵀ·c)`
    pub fn coarse_solve(&self, b: &DVector<f64>, c: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let k = self.k();
        let rhs = stack(
            &DVector::from_iterator(k, self.u.vecs.iter().map(|u| u.dot(b))),
            &DVector::from_iterator(k, self.v.vecs.iter().map(|v| v.dot(c))),
        );
        let d = dense_solve(&self.coarse_matrix(), &rhs)?;
        Ok(split(&d, k))
    }

    /// `Ũ·d_x`, `Ṽ·d_y`
    pub fn lift(&self, dx: &DVector<f64>, dy: &DVector<f64>, m: usize, n: usize) -> (DVector<f64>, DVector<f64>) {
        let mut x = DVector::zeros(m);
        let mut y = DVector::zeros(n);
        for (i, u) in self.u.vecs.iter().enumerate() {
            x.axpy(dx[i], u, 1.0);
        }
        for (i, v) in self.v.vecs.iter().enumerate() {
            y.axpy(dy[i], v, 1.0);
        }
        (x, y)
    }

    /// `u = Z_k·(Z_kᵀ·K·Z_k)⁻¹·Z_kᵀ·f + 𝒫ᵀ·ũ` for a solution `ũ = [x̃; ỹ]` of
    /// the deflated system.
    pub fn correct_solution(
        &self,
        sys: &SqdSystem,
        b: &DVector<f64>,
        c: &DVector<f64>,
        xt: &DVector<f64>,
        yt: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let (dx, dy) = self.coarse_solve(b, c)?;
        let (x0, y0) = self.lift(&dx, &dy, sys.rows(), sys.cols());
        let (px, py) = self.apply_cal_pt(xt, yt);
        Ok((x0 + px, y0 + py))
    }
}

fn subtract(w: &DVector<f64>, left: &[DVector<f64>], right: &[DVector<f64>]) -> DVector<f64> {
    let mut out = w.clone();
    for (l, r) in left.iter().zip(right) {
        out.axpy(-r.dot(w), l, 1.0);
    }
    out
}

fn check_cap(dim: usize) -> Result<()> {
    if dim > DENSE_DIAG_MAX_DIM {
        return Err(Error::SizeCap {
            cap: DENSE_DIAG_MAX_DIM,
            dim,
        });
    }
    Ok(())
}

fn cholesky_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(m
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { value: f64::NAN })?
        .l())
}

/// Identities relating the deflated and original systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualErrorReport {
    /// `‖(f − K·u) − 𝒫·(f − K·ũ)‖ / ‖f‖`
    pub residual_identity: f64,
    /// `‖(u* − u) − 𝒫ᵀ·(ũ* − ũ)‖ / ‖u*‖`
    pub error_identity: f64,
    /// `‖u* − u‖_H`
    pub error_h: f64,
    /// `‖ũ* − ũ‖_H`
    pub deflated_error_h: f64,
}

/// Compares an approximate deflated solution `ũ` with exact references `ũ*`
/// (deflated) and `u*` (original); `u` is obtained by correction.
#[allow(clippy::too_many_arguments)]
pub fn residual_error_diag(
    basis: &DeflationBasis,
    sys: &SqdSystem,
    b: &DVector<f64>,
    c: &DVector<f64>,
    approx: (&DVector<f64>, &DVector<f64>),
    deflated_exact: (&DVector<f64>, &DVector<f64>),
    exact: (&DVector<f64>, &DVector<f64>),
) -> Result<ResidualErrorReport> {
    let (x, y) = basis.correct_solution(sys, b, c, approx.0, approx.1)?;
    let (r, s) = sys.residual(b, c, &x, &y);
    let (rt, st) = sys.residual(b, c, approx.0, approx.1);
    let (pr, ps) = basis.apply_cal_p(&rt, &st);
    let f = stack(b, c);
    let residual_identity = (stack(&r, &s) - stack(&pr, &ps)).norm() / f.norm();

    let (ex, ey) = (exact.0 - &x, exact.1 - &y);
    let (dx, dy) = (deflated_exact.0 - approx.0, deflated_exact.1 - approx.1);
    let (qx, qy) = basis.apply_cal_pt(&dx, &dy);
    let error_identity = (stack(&ex, &ey) - stack(&qx, &qy)).norm() / stack(exact.0, exact.1).norm();
    Ok(ResidualErrorReport {
        residual_identity,
        error_identity,
        error_h: sys.h_norm(&ex, &ey),
        deflated_error_h: sys.h_norm(&dx, &dy),
    })
}

/// Eigenvalues (ascending) of `H^{-1/2}·K·H^{-1/2}`, or of the deflated
/// `H^{-1/2}·𝒫·K·H^{-1/2}` when a basis is given.
///
/// The deflated spectrum is computed from the symmetric matrix `Π·K̃·Π` with
/// `K̃ = L⁻¹·K·L⁻ᵀ`, `Π = L⁻¹·𝒫·L` and `L = blockdiag(chol M, chol N)`,
/// which has the same eigenvalues.
pub fn spectrum_diag(sys: &SqdSystem, basis: Option<&DeflationBasis>) -> Result<Vec<f64>> {
    let (m, n) = (sys.rows(), sys.cols());
    check_cap(m + n)?;
    let lm = cholesky_factor(&sys.m.to_dense())?;
    let ln = cholesky_factor(&sys.n.to_dense())?;
    let mut l = DMatrix::zeros(m + n, m + n);
    l.view_mut((0, 0), (m, m)).copy_from(&lm);
    l.view_mut((m, m), (n, n)).copy_from(&ln);
    let k = sys.dense_k();
    let left = l.solve_lower_triangular(&k).ok_or(Error::Singular { index: 0, pivot: 0.0 })?;
    let kt = l
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::Singular { index: 0, pivot: 0.0 })?
        .transpose();
    let op = match basis {
        None => kt,
        Some(basis) => {
            // Π = I − W·Wᵀ with W = blockdiag(L_Mᵀ·Ũ, L_Nᵀ·Ṽ)
            let kk = basis.k();
            let mut w = DMatrix::zeros(m + n, 2 * kk);
            for i in 0..kk {
                w.view_mut((0, i), (m, 1)).copy_from(&(lm.transpose() * &basis.u.vecs[i]));
                w.view_mut((m, kk + i), (n, 1)).copy_from(&(ln.transpose() * &basis.v.vecs[i]));
            }
            let pi = DMatrix::<f64>::identity(m + n, m + n) - &w * w.transpose();
            &pi * kt * &pi
        }
    };
    let sym = (&op + op.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eig)
}

/// Measured residual of a corrected solution against the a-priori bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// `‖f − K·u‖_{H⁻¹}`
    pub measured: f64,
    /// `‖𝒫·(f − K·ũ)‖_{H⁻¹}`
    pub projected: f64,
    /// `projected + ε·√k·((1 + σ̃_k²)^{-1/2}·‖f‖_{H⁻¹} + √2·‖ũ‖_H)`
    pub bound: f64,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.measured <= self.bound
    }
}

/// Evaluates the residual bound for the corrected solution of `ũ`, with `ε`
/// the basis' achieved triplet residual.
pub fn deflation_bound_diag(
    basis: &DeflationBasis,
    sys: &SqdSystem,
    b: &DVector<f64>,
    c: &DVector<f64>,
    xt: &DVector<f64>,
    yt: &DVector<f64>,
) -> Result<BoundReport> {
    let (x, y) = basis.correct_solution(sys, b, c, xt, yt)?;
    let measured = sys.residual_norm(b, c, &x, &y);
    let (rt, st) = sys.residual(b, c, xt, yt);
    let (pr, ps) = basis.apply_cal_p(&rt, &st);
    let projected = sys.h_inv_norm(&pr, &ps);
    let k = basis.k();
    let bound = if k == 0 {
        projected
    } else {
        let sk = basis.sigma[k - 1];
        projected
            + basis.eps
                * (k as f64).sqrt()
                * ((1.0 + sk * sk).powf(-0.5) * sys.h_inv_norm(b, c) + 2f64.sqrt() * sys.h_norm(xt, yt))
    };
    Ok(BoundReport {
        measured,
        projected,
        bound,
    })
}
