//! Linear-algebra building blocks: SPD operators, sparse matrices, and the
//! small dense kernels used on projected matrices.

mod dense;
mod sparse;
mod spd;

pub use dense::{dense_solve, dense_svd, DenseSvd, SVD_MAX_SWEEPS};
pub use sparse::SparseMatrix;
pub use spd::{
    normalize, normalize_scaled, spd_norm, Normalized, SpdOperator, BREAKDOWN_TOL,
    DENSE_CHOLESKY_MAX_DIM, INNER_CG_TOL,
};
