use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::opcore::{SparseMatrix, SpdOperator};

/// The block system `K = [[M, A], [Aᵀ, −N]]` with `M`, `N` SPD.
#[derive(Debug, Clone)]
pub struct SqdSystem {
    pub m: SpdOperator,
    pub n: SpdOperator,
    pub a: SparseMatrix,
}

impl SqdSystem {
    pub fn new(m: SpdOperator, n: SpdOperator, a: SparseMatrix) -> Result<Self> {
        if m.dim() != a.rows() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: m.dim(),
            });
        }
        if n.dim() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.cols(),
                found: n.dim(),
            });
        }
        Ok(SqdSystem { m, n, a })
    }

    /// `M = I`, `N = I`.
    pub fn with_identity(a: SparseMatrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        SqdSystem {
            m: SpdOperator::identity(m),
            n: SpdOperator::identity(n),
            a,
        }
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// `K·[x; y]` split into its two blocks.
    pub fn apply_k(&self, x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let top = self.m.apply(x) + self.a.mul_vec(y);
        let bottom = self.a.mul_t_vec(x) - self.n.apply(y);
        (top, bottom)
    }

    /// `f − K·[x; y]`.
    pub fn residual(
        &self,
        b: &DVector<f64>,
        c: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let (kx, ky) = self.apply_k(x, y);
        (b - kx, c - ky)
    }

    /// `‖[r; s]‖_{H⁻¹}` with `H = blockdiag(M, N)`.
    pub fn h_inv_norm(&self, r: &DVector<f64>, s: &DVector<f64>) -> f64 {
        (r.dot(&self.m.solve(r)) + s.dot(&self.n.solve(s))).max(0.0).sqrt()
    }

    /// `‖[x; y]‖_H`.
    pub fn h_norm(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.dot(&self.m.apply(x)) + y.dot(&self.n.apply(y))).max(0.0).sqrt()
    }

    /// Explicit `‖f − K·[x; y]‖_{H⁻¹}`.
    pub fn residual_norm(&self, b: &DVector<f64>, c: &DVector<f64>, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let (r, s) = self.residual(b, c, x, y);
        self.h_inv_norm(&r, &s)
    }

    /// Dense `K`, for diagnostics on small systems.
    pub fn dense_k(&self) -> DMatrix<f64> {
        let (m, n) = (self.rows(), self.cols());
        let a = self.a.to_dense();
        let mut k = DMatrix::zeros(m + n, m + n);
        k.view_mut((0, 0), (m, m)).copy_from(&self.m.to_dense());
        k.view_mut((0, m), (m, n)).copy_from(&a);
        k.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
        k.view_mut((m, m), (n, n)).copy_from(&(-self.n.to_dense()));
        k
    }
}

/// Stacks `[x; y]`.
pub fn stack(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(x.len() + y.len());
    z.rows_mut(0, x.len()).copy_from(x);
    z.rows_mut(x.len(), y.len()).copy_from(y);
    z
}

/// Splits `z` into its first `m` entries and the rest.
pub fn split(z: &DVector<f64>, m: usize) -> (DVector<f64>, DVector<f64>) {
    (z.rows(0, m).into_owned(), z.rows(m, z.len() - m).into_owned())
}
