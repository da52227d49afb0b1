use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// Largest dimension for which a sparse SPD matrix is factored densely.
pub const DENSE_CHOLESKY_MAX_DIM: usize = 2000;
/// Relative residual tolerance of the inner CG solve.
pub const INNER_CG_TOL: f64 = 1e-14;
/// Relative threshold below which a normalization is treated as breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// A symmetric positive definite operator that can be applied and inverted.
#[derive(Debug, Clone)]
pub enum SpdOperator {
    Identity(usize),
    Diagonal(DVector<f64>),
    Dense {
        matrix: DMatrix<f64>,
        factor: Cholesky<f64, Dyn>,
    },
    InnerCg {
        matrix: SparseMatrix,
        tol: f64,
        max_iter: usize,
    },
}

impl SpdOperator {
    pub fn identity(dim: usize) -> Self {
        SpdOperator::Identity(dim)
    }

    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|v| v.is_nan() || **v <= 0.0 || !v.is_finite()) {
            return Err(Error::NotPositiveDefinite { value: v });
        }
        Ok(SpdOperator::Diagonal(DVector::from_vec(values)))
    }

    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > 1e-12 * matrix.abs().max() {
            return Err(Error::InvalidConfig(format!(
                "SPD operator is not symmetric (asymmetry {asym:e})"
            )));
        }
        let factor = Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite {
            value: f64::NAN,
        })?;
        Ok(SpdOperator::Dense { matrix, factor })
    }

    pub fn inner_cg(matrix: SparseMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let max_iter = 10 * matrix.rows();
        Ok(SpdOperator::InnerCg {
            matrix,
            tol: INNER_CG_TOL,
            max_iter,
        })
    }

    /// Picks a representation for a sparse SPD matrix: diagonal when it has
    /// no off-diagonal entries, dense Cholesky up to
    /// [`DENSE_CHOLESKY_MAX_DIM`], inner CG beyond.
    pub fn from_sparse(matrix: SparseMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if matrix.triplets().all(|(r, c, _)| r == c) {
            let d = matrix.diagonal();
            if d.iter().all(|&v| v == 1.0) {
                return Ok(SpdOperator::Identity(d.len()));
            }
            return Self::diagonal(d);
        }
        if matrix.rows() <= DENSE_CHOLESKY_MAX_DIM {
            Self::dense(matrix.to_dense())
        } else {
            Self::inner_cg(matrix)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpdOperator::Identity(n) => *n,
            SpdOperator::Diagonal(d) => d.len(),
            SpdOperator::Dense { matrix, .. } => matrix.nrows(),
            SpdOperator::InnerCg { matrix, .. } => matrix.rows(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, SpdOperator::Identity(_))
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            SpdOperator::Identity(_) => v.clone(),
            SpdOperator::Diagonal(d) => d.component_mul(v),
            SpdOperator::Dense { matrix, .. } => matrix * v,
            SpdOperator::InnerCg { matrix, .. } => matrix.mul_vec(v),
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            SpdOperator::Identity(_) => b.clone(),
            SpdOperator::Diagonal(d) => b.component_div(d),
            SpdOperator::Dense { factor, .. } => factor.solve(b),
            SpdOperator::InnerCg { matrix, tol, max_iter } => conjugate_gradient(matrix, b, *tol, *max_iter),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SpdOperator::Identity(n) => DMatrix::identity(*n, *n),
            SpdOperator::Diagonal(d) => DMatrix::from_diagonal(d),
            SpdOperator::Dense { matrix, .. } => matrix.clone(),
            SpdOperator::InnerCg { matrix, .. } => matrix.to_dense(),
        }
    }

    fn check_dim(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

fn conjugate_gradient(a: &SparseMatrix, b: &DVector<f64>, tol: f64, max_iter: usize) -> DVector<f64> {
    let bnorm = b.norm();
    let mut x = DVector::zeros(b.len());
    if bnorm == 0.0 {
        return x;
    }
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return x;
        }
        let ap = a.mul_vec(&p);
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_new = r.dot(&r);
        p = &r + (rr_new / rr) * &p;
        rr = rr_new;
    }
    log::warn!(
        "inner CG stopped at {max_iter} iterations with relative residual {:e}",
        rr.sqrt() / bnorm
    );
    x
}

/// `‖v‖_op = sqrt(vᵀ·op·v)`.
pub fn spd_norm(op: &SpdOperator, v: &DVector<f64>) -> Result<f64> {
    op.check_dim(v)?;
    let q = v.dot(&op.apply(v));
    if q < 0.0 || q.is_nan() {
        return Err(Error::NotPositiveDefinite { value: q });
    }
    Ok(q.sqrt())
}

/// Result of the normalization `β·op·u = b`.
#[derive(Debug, Clone)]
pub enum Normalized {
    Unit {
        beta: f64,
        /// `u = op⁻¹b / β`, unit in the op-norm.
        u: DVector<f64>,
        /// `op·u = b / β`, available without another application.
        image: DVector<f64>,
    },
    Breakdown,
}

impl Normalized {
    pub fn beta(&self) -> f64 {
        match self {
            Normalized::Unit { beta, .. } => *beta,
            Normalized::Breakdown => 0.0,
        }
    }

    pub fn is_breakdown(&self) -> bool {
        matches!(self, Normalized::Breakdown)
    }
}

/// `ũ = op⁻¹b; β = sqrt(ũᵀb); u = ũ/β`, with breakdown when `b` vanishes.
pub fn normalize(op: &SpdOperator, b: &DVector<f64>) -> Result<Normalized> {
    normalize_scaled(op, b, b.norm())
}

/// Normalization with breakdown declared once `‖b‖₂ ≤ 1e-14·scale`, where
/// `scale` is the norm of the vector `b` was projected from.
pub fn normalize_scaled(op: &SpdOperator, b: &DVector<f64>, scale: f64) -> Result<Normalized> {
    op.check_dim(b)?;
    let bnorm = b.norm();
    if bnorm == 0.0 || bnorm <= BREAKDOWN_TOL * scale {
        return Ok(Normalized::Breakdown);
    }
    let ut = op.solve(b);
    let q = ut.dot(b);
    if q < 0.0 || q.is_nan() {
        return Err(Error::NotPositiveDefinite { value: q });
    }
    let beta = q.sqrt();
    if beta == 0.0 {
        return Ok(Normalized::Breakdown);
    }
    Ok(Normalized::Unit {
        beta,
        u: ut / beta,
        image: b / beta,
    })
}
