//! TriCG: the Galerkin solver built on the gSSY process.
//!
//! The projected system `S_j` interleaves `(u₁, v₁, u₂, v₂, …)` and is
//! factored as `L_j·D_j·L_jᵀ` by short recurrences; iterates are updated with
//! two new directions per step, so only a window of the basis is kept unless
//! reorthogonalization asks for more.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gssy::{expand, finish, BasisBlock, Reorth};
use crate::opcore::{normalize, Normalized};
use crate::report::{ConvergenceRecord, IterateView, Observer, SolveReport, Stage, Status};
use crate::system::SqdSystem;

/// Pivots smaller than this in magnitude are treated as a collapse of the
/// factorization.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Scalars of the `L_j·D_j·L_jᵀ` factorization after step `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdlState {
    /// Number of block steps factored so far.
    pub j: usize,
    /// `[d_{2j−3}, d_{2j−2}, d_{2j−1}, d_{2j}]`
    pub d: [f64; 4],
    pub delta: f64,
    pub delta_prev: f64,
    pub sigma: f64,
    pub eta: f64,
    pub lambda: f64,
}

impl Default for LdlState {
    fn default() -> Self {
        LdlState {
            j: 0,
            d: [0.0; 4],
            delta: 0.0,
            delta_prev: 0.0,
            sigma: 0.0,
            eta: 0.0,
            lambda: 0.0,
        }
    }
}

fn pivot(value: f64, index: usize) -> Result<f64> {
    if value.is_nan() || value.abs() < PIVOT_FLOOR {
        return Err(Error::PivotCollapse { index, value });
    }
    Ok(value)
}

/// Advances the factorization by the block of step `j = state.j + 1`,
/// given `α_j`, `β_j` and `γ_j`.
pub fn ldl_advance(state: &LdlState, alpha: f64, beta: f64, gamma: f64) -> Result<LdlState> {
    let j = state.j + 1;
    let (sigma, eta, lambda) = if state.j == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let d_odd = pivot(state.d[2], 2 * j - 3)?;
        let d_even = pivot(state.d[3], 2 * j - 2)?;
        (beta / d_even, gamma / d_odd, -gamma * state.delta / d_even)
    };
    let d1 = pivot(1.0 - sigma * sigma * state.d[3], 2 * j - 1)?;
    let delta = (alpha - lambda * beta) / d1;
    let d2 = -1.0 - eta * eta * state.d[2] - lambda * lambda * state.d[3] - delta * delta * d1;
    let d2 = pivot(d2, 2 * j)?;
    Ok(LdlState {
        j,
        d: [state.d[2], state.d[3], d1, d2],
        delta,
        delta_prev: state.delta,
        sigma,
        eta,
        lambda,
    })
}

/// Running iterate, `π` window and the two most recent direction pairs.
#[derive(Debug, Clone)]
pub struct IterState {
    pub j: usize,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    /// `[π_{2j−3}, π_{2j−2}, π_{2j−1}, π_{2j}]`
    pub pi: [f64; 4],
    /// `[ξ_{2j−1}, ξ_{2j}]`
    pub xi: [f64; 2],
    /// `[g_{2j−1}ˣ, g_{2j}ˣ]`
    pub gx: [DVector<f64>; 2],
    /// `[g_{2j−1}ʸ, g_{2j}ʸ]`
    pub gy: [DVector<f64>; 2],
}

impl IterState {
    /// `x₀ = 0`, `y₀ = 0` with zero direction seeds.
    pub fn new(m: usize, n: usize) -> Self {
        Self::from_start(DVector::zeros(m), DVector::zeros(n))
    }

    /// Starts from a given iterate, as a restarted cycle does.
    pub fn from_start(x: DVector<f64>, y: DVector<f64>) -> Self {
        let (m, n) = (x.len(), y.len());
        IterState {
            j: 0,
            x,
            y,
            pi: [0.0; 4],
            xi: [0.0; 2],
            gx: [DVector::zeros(m), DVector::zeros(m)],
            gy: [DVector::zeros(n), DVector::zeros(n)],
        }
    }

    /// Adds `π_{2j−1}·g_{2j−1} + π_{2j}·g_{2j}` to the iterate and sets `ξ`.
    pub(crate) fn apply_directions(&mut self, delta: f64) {
        let (p1, p2) = (self.pi[2], self.pi[3]);
        self.x.axpy(p1, &self.gx[0], 1.0);
        self.x.axpy(p2, &self.gx[1], 1.0);
        self.y.axpy(p1, &self.gy[0], 1.0);
        self.y.axpy(p2, &self.gy[1], 1.0);
        self.xi = [p1 - delta * p2, p2];
    }
}

/// The first-step `π` pair for a right-hand side `β·e_{odd} + γ·e_{even}`
/// entering at the block whose pivots are `d_odd`, `d_even`.
pub(crate) fn leading_pi(beta: f64, gamma: f64, delta: f64, d_odd: f64, d_even: f64) -> (f64, f64) {
    let p1 = beta / d_odd;
    (p1, (gamma - delta * beta) / d_even)
}

/// Advances `π`, the directions and the iterate to step `ldl.j`.
///
/// `beta`, `gamma` are `β_j`, `γ_j`; on the first step they are the
/// right-hand side coefficients `β₁`, `γ₁`.
pub fn iterate_advance(
    iter: &mut IterState,
    ldl: &LdlState,
    u_j: &DVector<f64>,
    v_j: &DVector<f64>,
    beta: f64,
    gamma: f64,
) {
    let [_, d_prev, d1, d2] = ldl.d;
    let (p1, p2) = if iter.j == 0 {
        leading_pi(beta, gamma, ldl.delta, d1, d2)
    } else {
        let p1 = -beta * iter.pi[3] / d1;
        let p2 = -(ldl.delta * d1 * p1 + ldl.lambda * d_prev * iter.pi[3] + gamma * iter.pi[2]) / d2;
        (p1, p2)
    };
    iter.pi = [iter.pi[2], iter.pi[3], p1, p2];

    let [gx3, gx2] = std::mem::replace(&mut iter.gx, [DVector::zeros(0), DVector::zeros(0)]);
    let [gy3, gy2] = std::mem::replace(&mut iter.gy, [DVector::zeros(0), DVector::zeros(0)]);
    // g_{2j−1} = u_j − σ_j g_{2j−2}
    let mut gx1 = u_j.clone();
    gx1.axpy(-ldl.sigma, &gx2, 1.0);
    let gy1 = &gy2 * (-ldl.sigma);
    // g_{2j} = −δ_j g_{2j−1} − λ_j g_{2j−2} − η_j g_{2j−3} (+ v_j)
    let mut gx0 = &gx1 * (-ldl.delta);
    gx0.axpy(-ldl.lambda, &gx2, 1.0);
    gx0.axpy(-ldl.eta, &gx3, 1.0);
    let mut gy0 = v_j.clone();
    gy0.axpy(-ldl.delta, &gy1, 1.0);
    gy0.axpy(-ldl.lambda, &gy2, 1.0);
    gy0.axpy(-ldl.eta, &gy3, 1.0);
    iter.gx = [gx1, gx0];
    iter.gy = [gy1, gy0];
    iter.j = ldl.j;
    iter.apply_directions(ldl.delta);
}

/// `‖r_j‖_{H⁻¹}` from the recurrences. At `j = 0` pass `β₁`, `γ₁`.
pub fn residual_norm(iter: &IterState, beta_next: f64, gamma_next: f64) -> f64 {
    if iter.j == 0 {
        return (gamma_next * gamma_next + beta_next * beta_next).sqrt();
    }
    let a = gamma_next * iter.xi[0];
    let b = beta_next * iter.xi[1];
    (a * a + b * b).sqrt()
}

/// Dense `S_j` in the interleaved ordering, for diagnostics.
pub fn dense_s(alphas: &[f64], betas: &[f64], gammas: &[f64]) -> DMatrix<f64> {
    let j = alphas.len();
    let mut s = DMatrix::zeros(2 * j, 2 * j);
    for i in 0..j {
        s[(2 * i, 2 * i)] = 1.0;
        s[(2 * i + 1, 2 * i + 1)] = -1.0;
        s[(2 * i, 2 * i + 1)] = alphas[i];
        s[(2 * i + 1, 2 * i)] = alphas[i];
        if i > 0 {
            // (u_i, v_{i−1}) = β_i and (v_i, u_{i−1}) = γ_i
            s[(2 * i, 2 * i - 1)] = betas[i];
            s[(2 * i - 1, 2 * i)] = betas[i];
            s[(2 * i + 1, 2 * i - 2)] = gammas[i];
            s[(2 * i - 2, 2 * i + 1)] = gammas[i];
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TricgConfig {
    pub tol: f64,
    pub maxit: usize,
    pub reorth: bool,
    /// Also record the explicitly recomputed residual at every iteration.
    pub explicit_residual: bool,
}

impl Default for TricgConfig {
    fn default() -> Self {
        TricgConfig {
            tol: 1e-8,
            maxit: 80_000,
            reorth: false,
            explicit_residual: false,
        }
    }
}

/// An approximate solution `[x; y]` with its report.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub report: SolveReport,
}

/// Solves `K·[x; y] = [b; c]` by TriCG.
pub fn tricg_solve(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>, config: &TricgConfig) -> Result<Solution> {
    tricg_observed(sys, b, c, config, None)
}

/// [`tricg_solve`] with a callback after each iteration.
pub fn tricg_observed(
    sys: &SqdSystem,
    b: &DVector<f64>,
    c: &DVector<f64>,
    config: &TricgConfig,
    observer: Option<Observer<'_>>,
) -> Result<Solution> {
    let policy = if config.reorth { Policy::Full } else { Policy::Off };
    run(sys, b, c, config, policy, Stage::Plain, observer)
}

/// How new basis vectors are reorthogonalized during a run.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Policy<'a> {
    Off,
    Full,
    /// Against fixed columns (`U_k`, `V_k`) only.
    Against(&'a BasisBlock, &'a BasisBlock),
}

/// The TriCG loop shared by the plain and deflated solvers.
pub(crate) fn run(
    sys: &SqdSystem,
    b: &DVector<f64>,
    c: &DVector<f64>,
    config: &TricgConfig,
    policy: Policy<'_>,
    stage: Stage,
    mut observer: Option<Observer<'_>>,
) -> Result<Solution> {
    check_rhs(sys, b, c)?;
    let (nu, nv) = (normalize(&sys.m, b)?, normalize(&sys.n, c)?);
    let (Normalized::Unit { beta: beta1, u, image: mu }, Normalized::Unit { beta: gamma1, u: v, image: nv }) = (nu, nv)
    else {
        return Err(Error::Breakdown { step: 0 });
    };
    let keep_all = matches!(policy, Policy::Full);
    let mut ub = BasisBlock::default();
    let mut vb = BasisBlock::default();
    ub.push(u, mu);
    vb.push(v, nv);

    let mut iter = IterState::new(sys.rows(), sys.cols());
    let mut ldl = LdlState::default();
    let mut history = Vec::new();
    let mut matvecs = 0;
    let (mut beta_j, mut gamma_j) = (beta1, gamma1);
    let mut residual = residual_norm(&iter, beta1, gamma1);
    let mut record = |iter: &IterState, residual: f64, matvecs: usize, history: &mut Vec<ConvergenceRecord>| {
        let explicit = config
            .explicit_residual
            .then(|| sys.residual_norm(b, c, &iter.x, &iter.y));
        history.push(ConvergenceRecord {
            iteration: iter.j,
            matvecs,
            residual,
            cycle: 1,
            stage,
            explicit_residual: explicit,
        });
        if let Some(obs) = observer.as_mut() {
            obs(&IterateView {
                iteration: iter.j,
                cycle: 1,
                stage,
                residual,
                x: &iter.x,
                y: &iter.y,
            });
        }
    };
    record(&iter, residual, matvecs, &mut history);

    let mut status = Status::MaxIterations;
    if residual <= config.tol {
        status = Status::Converged;
    }
    while status == Status::MaxIterations && iter.j < config.maxit {
        let last = ub.len() - 1;
        let mut uc = Vec::new();
        let mut vc = Vec::new();
        if iter.j > 0 {
            uc.push((gamma_j, &ub.images[last - 1]));
            vc.push((beta_j, &vb.images[last - 1]));
        }
        let e = expand(sys, &ub.vecs[last], &ub.images[last], &vb.vecs[last], &vb.images[last], &uc, &vc);
        matvecs += 2;
        let alpha = e.alpha;
        let (nu, nv) = match policy {
            Policy::Off => finish(sys, e, &ub, &vb, Reorth::Off)?,
            Policy::Full => finish(sys, e, &ub, &vb, Reorth::Full)?,
            Policy::Against(du, dv) => finish(sys, e, du, dv, Reorth::Full)?,
        };
        let (beta_next, gamma_next) = (nu.beta(), nv.beta());
        let broken = nu.is_breakdown() || nv.is_breakdown();

        ldl = match ldl_advance(&ldl, alpha, beta_j, gamma_j) {
            Ok(l) => l,
            Err(Error::PivotCollapse { index, value }) => {
                log::warn!("TriCG pivot d_{index} = {value:e} collapsed");
                status = Status::Breakdown;
                break;
            }
            Err(e) => return Err(e),
        };
        iterate_advance(&mut iter, &ldl, &ub.vecs[last], &vb.vecs[last], beta_j, gamma_j);
        residual = residual_norm(&iter, beta_next, gamma_next);
        record(&iter, residual, matvecs, &mut history);

        if residual <= config.tol {
            status = Status::Converged;
        } else if broken {
            status = Status::Breakdown;
        } else {
            if let (Normalized::Unit { u, image, .. }, Normalized::Unit { u: v, image: nvi, .. }) = (nu, nv) {
                ub.push(u, image);
                vb.push(v, nvi);
            }
            if !keep_all && ub.len() > 2 {
                ub.vecs.remove(0);
                ub.images.remove(0);
                vb.vecs.remove(0);
                vb.images.remove(0);
            }
            beta_j = beta_next;
            gamma_j = gamma_next;
        }
    }

    let final_explicit = Some(sys.residual_norm(b, c, &iter.x, &iter.y));
    Ok(Solution {
        report: SolveReport {
            status,
            iterations: iter.j,
            matvecs,
            cycles: 1,
            history,
            final_explicit_residual: final_explicit,
        },
        x: iter.x,
        y: iter.y,
    })
}

pub(crate) fn check_rhs(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>) -> Result<()> {
    if b.len() != sys.rows() {
        return Err(Error::DimensionMismatch {
            expected: sys.rows(),
            found: b.len(),
        });
    }
    if c.len() != sys.cols() {
        return Err(Error::DimensionMismatch {
            expected: sys.cols(),
            found: c.len(),
        });
    }
    Ok(())
}
