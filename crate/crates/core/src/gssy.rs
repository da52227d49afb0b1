//! The generalized Saunders–Simon–Yip tridiagonalization.
//!
//! Starting from `β₁·M·u₁ = b` and `γ₁·N·v₁ = c`, each step produces
//! `α_j`, `β_{j+1}`, `γ_{j+1}` and the next basis pair so that
//! `A·V_j = M·U_{j+1}·T_{j+1,j}` and `Aᵀ·U_j = N·V_{j+1}·T_{j,j+1}ᵀ` with
//! `U` M-orthonormal and `V` N-orthonormal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::opcore::{normalize, normalize_scaled, Normalized, SpdOperator};
use crate::system::SqdSystem;

/// Basis columns together with their operator images (`M·u` or `N·v`).
#[derive(Debug, Clone, Default)]
pub struct BasisBlock {
    pub vecs: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
}

impl BasisBlock {
    pub fn len(&self) -> usize {
        self.vecs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vecs.is_empty()
    }

    pub fn push(&mut self, vec: DVector<f64>, image: DVector<f64>) {
        self.vecs.push(vec);
        self.images.push(image);
    }

    pub fn truncate(&mut self, len: usize) {
        self.vecs.truncate(len);
        self.images.truncate(len);
    }

    /// Columns as a dense matrix (`dim × len`).
    pub fn to_matrix(&self, dim: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(dim, self.len());
        for (j, v) in self.vecs.iter().enumerate() {
            out.set_column(j, v);
        }
        out
    }

    /// Replaces the block by `[B·coeffs]`, i.e. new column `i` is
    /// `Σ_r coeffs[(r, i)]·b_r` (images transform the same way).
    pub fn combine(&self, coeffs: &DMatrix<f64>) -> BasisBlock {
        let mut out = BasisBlock::default();
        for i in 0..coeffs.ncols() {
            let mut v = DVector::zeros(self.vecs[0].len());
            let mut im = DVector::zeros(self.images[0].len());
            for r in 0..coeffs.nrows() {
                let c = coeffs[(r, i)];
                if c != 0.0 {
                    v.axpy(c, &self.vecs[r], 1.0);
                    im.axpy(c, &self.images[r], 1.0);
                }
            }
            out.push(v, im);
        }
        out
    }
}

/// Removes the components of `w` along `images` using coefficients
/// `vecsᵀ·w` (classical Gram–Schmidt). A second pass runs when the first
/// correction exceeds half of the original norm.
pub fn project_out(w: &mut DVector<f64>, vecs: &[DVector<f64>], images: &[DVector<f64>]) {
    if vecs.is_empty() {
        return;
    }
    for pass in 0..2 {
        let before = w.norm();
        let coeffs: Vec<f64> = vecs.iter().map(|v| v.dot(w)).collect();
        let mut correction = DVector::zeros(w.len());
        for (c, im) in coeffs.iter().zip(images) {
            correction.axpy(*c, im, 1.0);
        }
        *w -= &correction;
        if pass == 0 && correction.norm() <= 0.5 * before {
            break;
        }
    }
}

/// Which previously generated columns the new vectors are re-projected against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reorth {
    Off,
    /// All stored columns.
    Full,
    /// Only the first `n` stored columns.
    Leading(usize),
}

/// Result of one expansion before normalization.
#[derive(Debug, Clone)]
pub(crate) struct Expansion {
    pub alpha: f64,
    /// `q − α·M·u_j`: the unnormalized `β_{j+1}·M·u_{j+1}`.
    pub wu: DVector<f64>,
    /// `p − α·N·v_j`: the unnormalized `γ_{j+1}·N·v_{j+1}`.
    pub wv: DVector<f64>,
    pub scale_u: f64,
    pub scale_v: f64,
}

/// `q = A·v_j − Σ c·(M·u)`, `p = Aᵀ·u_j − Σ c·(N·v)`, `α = u_jᵀq`, and the
/// orthogonalized remainders. `u_couple`/`v_couple` list `(coefficient,
/// image)` pairs.
pub(crate) fn expand(
    sys: &SqdSystem,
    u_j: &DVector<f64>,
    mu_j: &DVector<f64>,
    v_j: &DVector<f64>,
    nv_j: &DVector<f64>,
    u_couple: &[(f64, &DVector<f64>)],
    v_couple: &[(f64, &DVector<f64>)],
) -> Expansion {
    let mut q = sys.a.mul_vec(v_j);
    let mut p = sys.a.mul_t_vec(u_j);
    let scale_u = q.norm();
    let scale_v = p.norm();
    for (c, im) in u_couple {
        q.axpy(-c, im, 1.0);
    }
    for (c, im) in v_couple {
        p.axpy(-c, im, 1.0);
    }
    let alpha = u_j.dot(&q);
    q.axpy(-alpha, mu_j, 1.0);
    p.axpy(-alpha, nv_j, 1.0);
    Expansion {
        alpha,
        wu: q,
        wv: p,
        scale_u,
        scale_v,
    }
}

/// Reorthogonalizes and normalizes both halves of an expansion.
pub(crate) fn finish(
    sys: &SqdSystem,
    mut e: Expansion,
    u: &BasisBlock,
    v: &BasisBlock,
    reorth: Reorth,
) -> Result<(Normalized, Normalized)> {
    match reorth {
        Reorth::Off => {}
        Reorth::Full => {
            project_out(&mut e.wu, &u.vecs, &u.images);
            project_out(&mut e.wv, &v.vecs, &v.images);
        }
        Reorth::Leading(n) => {
            let nu = n.min(u.len());
            let nv = n.min(v.len());
            project_out(&mut e.wu, &u.vecs[..nu], &u.images[..nu]);
            project_out(&mut e.wv, &v.vecs[..nv], &v.images[..nv]);
        }
    }
    let nu = normalize_scaled(&sys.m, &e.wu, e.scale_u)?;
    let nv = normalize_scaled(&sys.n, &e.wv, e.scale_v)?;
    Ok((nu, nv))
}

/// `U` (M-orthonormal) and `V` (N-orthonormal) columns with their images.
#[derive(Debug, Clone, Default)]
pub struct GssyBasis {
    pub u: BasisBlock,
    pub v: BasisBlock,
}

/// Coefficients of the projected tridiagonal matrix.
///
/// `T_j` has `α` on the diagonal, `γ_{i+1}` above and `β_{i+1}` below it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriDiag {
    pub alphas: Vec<f64>,
    /// `β₁..β_{j+1}`
    pub betas: Vec<f64>,
    /// `γ₁..γ_{j+1}`
    pub gammas: Vec<f64>,
}

impl TriDiag {
    pub fn steps(&self) -> usize {
        self.alphas.len()
    }

    /// Dense `T_j` (`j × j`).
    pub fn dense(&self) -> DMatrix<f64> {
        let j = self.steps();
        let mut t = DMatrix::zeros(j, j);
        for i in 0..j {
            t[(i, i)] = self.alphas[i];
            if i + 1 < j {
                t[(i, i + 1)] = self.gammas[i + 1];
                t[(i + 1, i)] = self.betas[i + 1];
            }
        }
        t
    }

    /// Dense `T_{j+1,j}`.
    pub fn dense_lower(&self) -> DMatrix<f64> {
        let j = self.steps();
        let mut t = DMatrix::zeros(j + 1, j);
        t.view_mut((0, 0), (j, j)).copy_from(&self.dense());
        t[(j, j - 1)] = self.betas[j];
        t
    }

    /// Dense `T_{j,j+1}`.
    pub fn dense_upper(&self) -> DMatrix<f64> {
        let j = self.steps();
        let mut t = DMatrix::zeros(j, j + 1);
        t.view_mut((0, 0), (j, j)).copy_from(&self.dense());
        t[(j - 1, j)] = self.gammas[j];
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Extended,
    /// `β_{j+1}` or `γ_{j+1}` vanished; the process cannot continue.
    Breakdown,
}

/// A running instance of the process.
#[derive(Debug, Clone)]
pub struct GssyProcess<'s> {
    sys: &'s SqdSystem,
    basis: GssyBasis,
    tri: TriDiag,
    reorth: bool,
    broken: bool,
}

/// `β₁·M·u₁ = b`, `γ₁·N·v₁ = c`.
pub fn gssy_init<'s>(sys: &'s SqdSystem, b: &DVector<f64>, c: &DVector<f64>, reorth: bool) -> Result<GssyProcess<'s>> {
    let nu = normalize(&sys.m, b)?;
    let nv = normalize(&sys.n, c)?;
    let (Normalized::Unit { beta, u, image: mu }, Normalized::Unit { beta: gamma, u: v, image: nv }) = (nu, nv) else {
        return Err(Error::Breakdown { step: 0 });
    };
    let mut basis = GssyBasis::default();
    basis.u.push(u, mu);
    basis.v.push(v, nv);
    Ok(GssyProcess {
        sys,
        basis,
        tri: TriDiag {
            alphas: vec![],
            betas: vec![beta],
            gammas: vec![gamma],
        },
        reorth,
        broken: false,
    })
}

impl<'s> GssyProcess<'s> {
    pub fn basis(&self) -> &GssyBasis {
        &self.basis
    }

    pub fn tridiag(&self) -> &TriDiag {
        &self.tri
    }

    pub fn steps(&self) -> usize {
        self.tri.steps()
    }

    pub fn is_broken(&self) -> bool {
        self.broken
    }

    /// Advances one step of the three-term recurrence.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.broken {
            return Ok(StepOutcome::Breakdown);
        }
        let j = self.tri.steps(); // 0-based index of u_j
        let (u, v) = (&self.basis.u, &self.basis.v);
        let mut uc = Vec::new();
        let mut vc = Vec::new();
        if j > 0 {
            uc.push((self.tri.gammas[j], &u.images[j - 1]));
            vc.push((self.tri.betas[j], &v.images[j - 1]));
        }
        let e = expand(self.sys, &u.vecs[j], &u.images[j], &v.vecs[j], &v.images[j], &uc, &vc);
        let alpha = e.alpha;
        let reorth = if self.reorth { Reorth::Full } else { Reorth::Off };
        let (nu, nv) = finish(self.sys, e, u, v, reorth)?;
        self.tri.alphas.push(alpha);
        self.tri.betas.push(nu.beta());
        self.tri.gammas.push(nv.beta());
        let broken = nu.is_breakdown() || nv.is_breakdown();
        if let Normalized::Unit { u, image, .. } = nu {
            self.basis.u.push(u, image);
        }
        if let Normalized::Unit { u, image, .. } = nv {
            self.basis.v.push(u, image);
        }
        if broken {
            self.broken = true;
            return Ok(StepOutcome::Breakdown);
        }
        Ok(StepOutcome::Extended)
    }
}

/// Residuals of the process relations after `j` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals {
    /// `‖A·V_j − M·U_{j+1}·T_{j+1,j}‖_F`
    pub r_av: f64,
    /// `‖Aᵀ·U_j − N·V_{j+1}·T_{j,j+1}ᵀ‖_F`
    pub r_atu: f64,
    /// `‖U_{j+1}ᵀ·M·U_{j+1} − I‖_max`
    pub r_orth_u: f64,
    /// `‖V_{j+1}ᵀ·N·V_{j+1} − I‖_max`
    pub r_orth_v: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.r_av.max(self.r_atu).max(self.r_orth_u).max(self.r_orth_v)
    }
}

/// Evaluates the process relations by explicit products (operator images are
/// recomputed rather than taken from the basis).
pub fn verify_relations(sys: &SqdSystem, basis: &GssyBasis, tri: &TriDiag) -> RelationResiduals {
    let j = tri.steps();
    let mu: Vec<DVector<f64>> = basis.u.vecs.iter().map(|u| sys.m.apply(u)).collect();
    let nv: Vec<DVector<f64>> = basis.v.vecs.iter().map(|v| sys.n.apply(v)).collect();

    let mut r_av = 0.0;
    let mut r_atu = 0.0;
    for i in 0..j {
        // A v_i = γ_i M u_{i-1} + α_i M u_i + β_{i+1} M u_{i+1}
        let mut r = sys.a.mul_vec(&basis.v.vecs[i]);
        if i > 0 {
            r.axpy(-tri.gammas[i], &mu[i - 1], 1.0);
        }
        r.axpy(-tri.alphas[i], &mu[i], 1.0);
        if tri.betas[i + 1] != 0.0 {
            r.axpy(-tri.betas[i + 1], &mu[i + 1], 1.0);
        }
        r_av += r.norm_squared();

        let mut s = sys.a.mul_t_vec(&basis.u.vecs[i]);
        if i > 0 {
            s.axpy(-tri.betas[i], &nv[i - 1], 1.0);
        }
        s.axpy(-tri.alphas[i], &nv[i], 1.0);
        if tri.gammas[i + 1] != 0.0 {
            s.axpy(-tri.gammas[i + 1], &nv[i + 1], 1.0);
        }
        r_atu += s.norm_squared();
    }
    RelationResiduals {
        r_av: r_av.sqrt(),
        r_atu: r_atu.sqrt(),
        r_orth_u: gram_deviation(&basis.u.vecs, &mu),
        r_orth_v: gram_deviation(&basis.v.vecs, &nv),
    }
}

/// `‖Xᵀ·(op·X) − I‖_max` given the columns and their images.
pub fn gram_deviation(vecs: &[DVector<f64>], images: &[DVector<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, x) in vecs.iter().enumerate() {
        for (j, y) in images.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((x.dot(y) - target).abs());
        }
    }
    worst
}

/// `‖Xᵀ·op·X − I‖_max` for a matrix of columns.
pub fn orthonormality_error(op: &SpdOperator, x: &DMatrix<f64>) -> f64 {
    let cols: Vec<DVector<f64>> = x.column_iter().map(|c| c.into_owned()).collect();
    let images: Vec<DVector<f64>> = cols.iter().map(|c| op.apply(c)).collect();
    gram_deviation(&cols, &images)
}
