//! D-TriCG: later right-hand sides reuse the deflation space of a TriCG-DR
//! run through a warm start and reorthogonalization against `U_k`, `V_k`.

use nalgebra::DVector;

use crate::deflate::DeflationBasis;
use crate::error::{Error, Result};
use crate::esvd::{EsvdResult, RestartTail};
use crate::gssy::gram_deviation;
use crate::report::{Observer, SolveReport, Stage};
use crate::system::SqdSystem;
use crate::tricg::{check_rhs, run, Policy, Solution, TricgConfig};
use crate::tricgdr::{tricg_dr_solve, TricgDrConfig};

/// `U_{k+1}`, `V_{k+1}` and the coupling blocks carried between right-hand
/// sides. `T_{k+1,k} = [T_k; tail.coupling_row]` and
/// `T_{k,k+1} = [T_k, tail.coupling_col]`.
#[derive(Debug, Clone)]
pub struct RecycleContext {
    pub basis: DeflationBasis,
    pub tail: RestartTail,
}

impl RecycleContext {
    pub fn new(basis: DeflationBasis, tail: RestartTail) -> Result<Self> {
        let k = basis.k();
        if tail.coupling_row.len() != k || tail.coupling_col.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: tail.coupling_row.len(),
            });
        }
        Ok(RecycleContext { basis, tail })
    }

    /// `k = 0`: no warm start, D-TriCG is plain TriCG.
    pub fn empty(m: usize, n: usize) -> Self {
        RecycleContext {
            basis: DeflationBasis::empty(),
            tail: RestartTail::zeros(m, n, 0),
        }
    }

    /// Context of exact triplets, whose couplings vanish.
    pub fn from_exact(sys: &SqdSystem, basis: DeflationBasis) -> Self {
        let k = basis.k();
        RecycleContext {
            basis,
            tail: RestartTail::zeros(sys.rows(), sys.cols(), k),
        }
    }

    /// Context of a standalone gSSY-DR run.
    pub fn from_esvd(sys: &SqdSystem, res: &EsvdResult) -> Result<Self> {
        let basis = DeflationBasis::from_esvd(sys, res)?;
        match &res.tail {
            Some(t) => Self::new(basis, t.clone()),
            None => Ok(Self::from_exact(sys, basis)),
        }
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }
}

/// Warm start: `x₀ = U_k·d_x`, `y₀ = V_k·d_y` with `(d_x, d_y)` from the
/// `2k×2k` coarse system.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub x0: DVector<f64>,
    pub y0: DVector<f64>,
    pub dx: DVector<f64>,
    pub dy: DVector<f64>,
}

pub fn warm_start(ctx: &RecycleContext, b: &DVector<f64>, c: &DVector<f64>) -> Result<WarmStart> {
    let (dx, dy) = ctx.basis.coarse_solve(b, c)?;
    let (x0, y0) = ctx.basis.lift(&dx, &dy, b.len(), c.len());
    Ok(WarmStart { x0, y0, dx, dy })
}

/// `f − [M·U_{k+1}; N·V_{k+1}]·[[I_{k+1,k}, T_{k+1,k}], [T_{k,k+1}ᵀ, −I_{k+1,k}]]·d`
/// without products with `K`.
pub fn initial_residual(
    ctx: &RecycleContext,
    b: &DVector<f64>,
    c: &DVector<f64>,
    dx: &DVector<f64>,
    dy: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let t = &ctx.basis.t_k;
    let top = dx + t * dy;
    let bottom = t.transpose() * dx - dy;
    let mut r = b.clone();
    let mut s = c.clone();
    for (i, mu) in ctx.basis.u.images.iter().enumerate() {
        r.axpy(-top[i], mu, 1.0);
    }
    for (i, nv) in ctx.basis.v.images.iter().enumerate() {
        s.axpy(-bottom[i], nv, 1.0);
    }
    let row: f64 = ctx.tail.coupling_row.iter().zip(dy.iter()).map(|(a, b)| a * b).sum();
    let col: f64 = ctx.tail.coupling_col.iter().zip(dx.iter()).map(|(a, b)| a * b).sum();
    r.axpy(-row, &ctx.tail.mu_next, 1.0);
    s.axpy(-col, &ctx.tail.nv_next, 1.0);
    (r, s)
}

/// D-TriCG for one right-hand side.
pub fn dtricg_solve(
    sys: &SqdSystem,
    ctx: &RecycleContext,
    b: &DVector<f64>,
    c: &DVector<f64>,
    config: &TricgConfig,
) -> Result<Solution> {
    dtricg_observed(sys, ctx, b, c, config, None)
}

/// [`dtricg_solve`]; the observer sees the correction to the warm start.
pub fn dtricg_observed(
    sys: &SqdSystem,
    ctx: &RecycleContext,
    b: &DVector<f64>,
    c: &DVector<f64>,
    config: &TricgConfig,
    observer: Option<Observer<'_>>,
) -> Result<Solution> {
    check_rhs(sys, b, c)?;
    let ws = warm_start(ctx, b, c)?;
    let (r0, s0) = initial_residual(ctx, b, c, &ws.dx, &ws.dy);
    let policy = if ctx.k() == 0 {
        if config.reorth {
            Policy::Full
        } else {
            Policy::Off
        }
    } else {
        Policy::Against(&ctx.basis.u, &ctx.basis.v)
    };
    let mut sol = run(sys, &r0, &s0, config, policy, Stage::Deflated, observer)?;
    sol.x += &ws.x0;
    sol.y += &ws.y0;
    sol.report.final_explicit_residual = Some(sys.residual_norm(b, c, &sol.x, &sol.y));
    Ok(sol)
}

/// Per right-hand side outcome of [`multi_rhs_driver`].
#[derive(Debug, Clone)]
pub struct RhsSolve {
    pub solution: Solution,
    pub stage: Stage,
}

impl RhsSolve {
    pub fn report(&self) -> &SolveReport {
        &self.solution.report
    }
}

/// The first right-hand side by TriCG-DR, the rest by D-TriCG on its
/// deflation space.
pub fn multi_rhs_driver(
    sys: &SqdSystem,
    rhs: &[(DVector<f64>, DVector<f64>)],
    config: &TricgDrConfig,
) -> Result<(Vec<RhsSolve>, RecycleContext)> {
    let Some(((b1, c1), rest)) = rhs.split_first() else {
        return Err(Error::InvalidConfig("at least one right-hand side is required".into()));
    };
    let first = tricg_dr_solve(sys, b1, c1, config)?;
    let ctx = first.recycle;
    let drift = gram_deviation(&ctx.basis.u.vecs, &ctx.basis.u.images)
        .max(gram_deviation(&ctx.basis.v.vecs, &ctx.basis.v.images));
    if drift > 1e-6 {
        log::warn!("recycled basis is far from orthonormal (deviation {drift:e}); D-TriCG may stagnate, enable reorthogonalization");
    }
    let mut out = vec![RhsSolve {
        solution: first.solution,
        stage: Stage::Restarting,
    }];
    let tcfg = TricgConfig {
        tol: config.tol,
        maxit: config.maxit,
        reorth: config.reorth,
        explicit_residual: config.explicit_residual,
    };
    for (b, c) in rest {
        out.push(RhsSolve {
            solution: dtricg_solve(sys, &ctx, b, c, &tcfg)?,
            stage: Stage::Deflated,
        });
    }
    Ok((out, ctx))
}
