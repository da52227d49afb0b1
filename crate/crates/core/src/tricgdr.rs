//! TriCG with deflated restarting.
//!
//! Every `p` iterations the basis is folded onto the `k` largest Ritz
//! triplets plus the last basis pair, and TriCG continues on the residual
//! system whose projected matrix is arrow shaped. Once all `k` triplets pass
//! the triplet test the solver stops restarting and iterates with the
//! deflation space fixed.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::deflate::DeflationBasis;
use crate::esvd::{check_convergence, restart_fold, ritz_extract, ArrowTriDiag, DrProcess, RestartTail, RitzTriplets};
use crate::gssy::{BasisBlock, Reorth};
use crate::multirhs::RecycleContext;
use crate::opcore::{normalize, Normalized};
use crate::report::{ConvergenceRecord, IterateView, Observer, SolveReport, Stage, Status};
use crate::system::SqdSystem;
use crate::tricg::{check_rhs, iterate_advance, ldl_advance, leading_pi, residual_norm, IterState, LdlState, Solution, PIVOT_FLOOR};

/// Factorization entries of the restarted head and the bridge block.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadFactors {
    /// `d_{2ℓ−1}` for `ℓ = 1..k+1`
    pub d_odd: Vec<f64>,
    /// `d_{2ℓ}` for `ℓ = 1..k+1`
    pub d_even: Vec<f64>,
    /// `δ_ℓ` for `ℓ = 1..k+1`
    pub delta: Vec<f64>,
    /// `η_{ℓ+1}` for `ℓ = 1..k`
    pub eta: Vec<f64>,
    /// `σ_{ℓ+1}` for `ℓ = 1..k`
    pub sigma: Vec<f64>,
    /// `λ_{ℓ+1}` for `ℓ = 1..k`
    pub lambda: Vec<f64>,
}

impl HeadFactors {
    pub fn k(&self) -> usize {
        self.eta.len()
    }

    /// State from which the ordinary TriCG recurrences continue.
    pub fn ldl_state(&self) -> LdlState {
        let k = self.k();
        let (d_prev_odd, d_prev_even, delta_prev) = if k == 0 {
            (0.0, 0.0, 0.0)
        } else {
            (self.d_odd[k - 1], self.d_even[k - 1], self.delta[k - 1])
        };
        LdlState {
            j: k + 1,
            d: [d_prev_odd, d_prev_even, self.d_odd[k], self.d_even[k]],
            delta: self.delta[k],
            delta_prev,
            sigma: self.sigma.last().copied().unwrap_or(0.0),
            eta: self.eta.last().copied().unwrap_or(0.0),
            lambda: self.lambda.last().copied().unwrap_or(0.0),
        }
    }
}

fn pivot(value: f64, index: usize) -> Result<f64> {
    if value.is_nan() || value.abs() < PIVOT_FLOOR {
        return Err(Error::PivotCollapse { index, value });
    }
    Ok(value)
}

/// Factors the head of a restarted projected matrix: `alphas` holds
/// `α̃₁..α̃_{k+1}`, `betas` and `gammas` the couplings `β̃₂..β̃_{k+1}`,
/// `γ̃₂..γ̃_{k+1}`.
pub fn head_ldl(alphas: &[f64], betas: &[f64], gammas: &[f64]) -> Result<HeadFactors> {
    let k = betas.len();
    if alphas.len() != k + 1 || gammas.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k + 1,
            found: alphas.len(),
        });
    }
    let mut f = HeadFactors {
        d_odd: Vec::with_capacity(k + 1),
        d_even: Vec::with_capacity(k + 1),
        delta: Vec::with_capacity(k + 1),
        eta: Vec::with_capacity(k),
        sigma: Vec::with_capacity(k),
        lambda: Vec::with_capacity(k),
    };
    for l in 0..k {
        let d_odd = 1.0;
        let delta = alphas[l] / d_odd;
        let d_even = pivot(-1.0 - d_odd * delta * delta, 2 * l + 2)?;
        let eta = gammas[l] / d_odd;
        f.d_odd.push(d_odd);
        f.delta.push(delta);
        f.d_even.push(d_even);
        f.eta.push(eta);
        f.sigma.push(betas[l] / d_even);
        f.lambda.push(-d_odd * delta * eta / d_even);
    }
    let mut s_sigma = 0.0;
    let mut s_cross = 0.0;
    let mut s_fill = 0.0;
    for l in 0..k {
        let (de, sg, lm) = (f.d_even[l], f.sigma[l], f.lambda[l]);
        s_sigma += de * sg * sg;
        s_cross += de * lm * sg;
        s_fill += f.d_odd[l] * f.eta[l] * f.eta[l] + de * lm * lm;
    }
    let d_odd = pivot(1.0 - s_sigma, 2 * k + 1)?;
    let delta = (alphas[k] - s_cross) / d_odd;
    let d_even = pivot(-1.0 - s_fill - d_odd * delta * delta, 2 * k + 2)?;
    f.d_odd.push(d_odd);
    f.delta.push(delta);
    f.d_even.push(d_even);
    Ok(f)
}

/// Directions `g_{2k+1}` and `g_{2k+2}` (x and y parts) of a restarted cycle,
/// from the head columns `ũ₁..ũ_{k+1}`, `ṽ₁..ṽ_{k+1}`.
pub fn head_directions(
    u: &[DVector<f64>],
    v: &[DVector<f64>],
    f: &HeadFactors,
) -> ([DVector<f64>; 2], [DVector<f64>; 2]) {
    let k = f.k();
    let mut gx1 = u[k].clone();
    let mut gy1 = DVector::zeros(v[k].len());
    let mut sx = DVector::zeros(u[k].len());
    let mut sy = DVector::zeros(v[k].len());
    for l in 0..k {
        gx1.axpy(f.sigma[l] * f.delta[l], &u[l], 1.0);
        gy1.axpy(-f.sigma[l], &v[l], 1.0);
        sx.axpy(f.eta[l] - f.lambda[l] * f.delta[l], &u[l], 1.0);
        sy.axpy(f.lambda[l], &v[l], 1.0);
    }
    let delta = f.delta[k];
    let gx2 = &gx1 * (-delta) - sx;
    let mut gy2 = v[k].clone();
    gy2.axpy(-delta, &gy1, 1.0);
    gy2 -= sy;
    ([gx1, gx2], [gy1, gy2])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TricgDrConfig {
    pub p: usize,
    pub k: usize,
    pub tol: f64,
    pub eps_svd: f64,
    pub maxcycle: usize,
    /// Iteration budget of the non-restarting stage.
    pub maxit: usize,
    pub reorth: bool,
    pub explicit_residual: bool,
}

impl Default for TricgDrConfig {
    fn default() -> Self {
        TricgDrConfig {
            p: 100,
            k: 20,
            tol: 1e-8,
            eps_svd: 1e-10,
            maxcycle: 10,
            maxit: 80_000,
            reorth: true,
            explicit_residual: false,
        }
    }
}

impl TricgDrConfig {
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.p == 0 || self.k >= self.p || self.p > m.min(n) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= k < p <= min(m, n); got k = {}, p = {}, min(m, n) = {}",
                self.k,
                self.p,
                m.min(n)
            )));
        }
        if self.maxcycle == 0 {
            return Err(Error::InvalidConfig("maxcycle must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a TriCG-DR solve.
#[derive(Debug, Clone)]
pub struct DrOutcome {
    pub solution: Solution,
    /// Deflation space for later right-hand sides.
    pub recycle: RecycleContext,
    /// Triplet residuals of the last Ritz extraction.
    pub triplet_residuals: Vec<f64>,
    /// Whether the non-restarting stage was reached.
    pub triplets_converged: bool,
}

/// Solves `K·[x; y] = [b; c]` by TriCG-DR(p, k).
pub fn tricg_dr_solve(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>, config: &TricgDrConfig) -> Result<DrOutcome> {
    tricg_dr_observed(sys, b, c, config, None)
}

/// [`tricg_dr_solve`] with a callback after each iteration.
pub fn tricg_dr_observed(
    sys: &SqdSystem,
    b: &DVector<f64>,
    c: &DVector<f64>,
    config: &TricgDrConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<DrOutcome> {
    check_rhs(sys, b, c)?;
    config.validate(sys.rows(), sys.cols())?;
    let (Normalized::Unit { beta: beta1, u, image: mu }, Normalized::Unit { beta: gamma1, u: v, image: nv }) =
        (normalize(&sys.m, b)?, normalize(&sys.n, c)?)
    else {
        return Err(Error::Breakdown { step: 0 });
    };
    let (m, n) = (sys.rows(), sys.cols());
    let k = config.k;
    let mut ub = BasisBlock::default();
    let mut vb = BasisBlock::default();
    ub.push(u, mu);
    vb.push(v, nv);
    let mut proc = DrProcess::start(ub, vb, beta1, gamma1);

    // With nothing to deflate there is nothing to converge: iterate without restarts.
    let mut conv_sv = k == 0;
    if conv_sv {
        let (u, v) = (proc.u.clone(), proc.v.clone());
        proc.restart(u, v, Default::default(), true);
    }
    let restart_reorth = if config.reorth { Reorth::Full } else { Reorth::Off };

    let mut history: Vec<ConvergenceRecord> = Vec::new();
    let mut matvecs = 0usize;
    let mut total = 0usize;
    let mut nr_iters = 0usize;
    let (mut seed_beta, mut seed_gamma) = (beta1, gamma1);
    let mut x = DVector::zeros(m);
    let mut y = DVector::zeros(n);
    let mut last_ritz: Option<(RestartTail, RitzTriplets)> = None;

    let mut emit = |it: usize, cycle: usize, stage: Stage, residual: f64, mv: usize, x: &DVector<f64>, y: &DVector<f64>| {
        let explicit = config.explicit_residual.then(|| sys.residual_norm(b, c, x, y));
        history.push(ConvergenceRecord {
            iteration: it,
            matvecs: mv,
            residual,
            cycle,
            stage,
            explicit_residual: explicit,
        });
        if let Some(obs) = observer.as_mut() {
            obs(&IterateView {
                iteration: it,
                cycle,
                stage,
                residual,
                x,
                y,
            });
        }
    };
    let r0 = residual_norm(&IterState::new(0, 0), beta1, gamma1);
    let first_stage = if conv_sv { Stage::NonRestarting } else { Stage::Restarting };
    emit(0, 1, first_stage, r0, 0, &x, &y);

    let mut status = None;
    let mut cycles = 1;
    if r0 <= config.tol {
        status = Some(Status::Converged);
    }
    let mut cycle = 0;
    while status.is_none() {
        cycle += 1;
        cycles = cycle;
        let stage = if conv_sv { Stage::NonRestarting } else { Stage::Restarting };
        let reorth = if conv_sv { Reorth::Leading(proc.k()) } else { restart_reorth };
        let kc = proc.k();

        // Continuation step from the head of the cycle.
        let s = proc.step(sys, reorth)?;
        matvecs += 2;
        total += 1;
        if conv_sv {
            nr_iters += 1;
        }
        let mut alphas = proc.t.head.clone();
        alphas.push(s.alpha);
        let head = match head_ldl(&alphas, &proc.t.coupling_row, &proc.t.coupling_col) {
            Ok(h) => h,
            Err(Error::PivotCollapse { index, value }) => {
                log::warn!("TriCG-DR head pivot d_{index} = {value:e} collapsed");
                status = Some(Status::Breakdown);
                break;
            }
            Err(e) => return Err(e),
        };
        let (gx, gy) = head_directions(&proc.u.vecs[..=kc], &proc.v.vecs[..=kc], &head);
        let mut ldl = head.ldl_state();
        let (p1, p2) = leading_pi(seed_beta, seed_gamma, ldl.delta, ldl.d[2], ldl.d[3]);
        let mut iter = IterState::from_start(std::mem::take(&mut x), std::mem::take(&mut y));
        iter.j = kc + 1;
        iter.pi = [0.0, 0.0, p1, p2];
        iter.gx = gx;
        iter.gy = gy;
        iter.apply_directions(ldl.delta);
        let mut residual = residual_norm(&iter, s.beta_next, s.gamma_next);
        emit(total, cycle, stage, residual, matvecs, &iter.x, &iter.y);
        let mut broken = s.broken;

        let cycle_done = |proc: &DrProcess, nr: usize| {
            if conv_sv {
                nr >= config.maxit
            } else {
                proc.t.dim() >= config.p
            }
        };
        while residual > config.tol && !broken && !cycle_done(&proc, nr_iters) {
            let (u_j, v_j) = {
                let (u, v) = proc.current();
                (u.clone(), v.clone())
            };
            let (beta_j, gamma_j) = proc.current_coeffs();
            let s = proc.step(sys, reorth)?;
            matvecs += 2;
            total += 1;
            if conv_sv {
                nr_iters += 1;
            }
            ldl = match ldl_advance(&ldl, s.alpha, beta_j, gamma_j) {
                Ok(l) => l,
                Err(Error::PivotCollapse { index, value }) => {
                    log::warn!("TriCG-DR pivot d_{index} = {value:e} collapsed");
                    broken = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            iterate_advance(&mut iter, &ldl, &u_j, &v_j, beta_j, gamma_j);
            residual = residual_norm(&iter, s.beta_next, s.gamma_next);
            emit(total, cycle, stage, residual, matvecs, &iter.x, &iter.y);
            broken = s.broken;
        }
        x = iter.x;
        y = iter.y;

        if residual <= config.tol {
            status = Some(Status::Converged);
        } else if broken {
            status = Some(Status::Breakdown);
        } else if conv_sv {
            status = Some(Status::MaxIterations);
        } else if cycle == config.maxcycle {
            status = Some(Status::MaxCycles);
        }
        if status.is_some() {
            if !conv_sv && !broken {
                let (ritz, u, v, head) = fold_current(&proc, k)?;
                last_ritz = Some((RestartTail::from_fold(&u, &v, &head), ritz));
            }
            break;
        }

        // Restart.
        let (beta_next, gamma_next) = proc.t.trailing();
        seed_beta = -beta_next * iter.xi[1];
        seed_gamma = -gamma_next * iter.xi[0];
        let (ritz, u, v, head) = fold_current(&proc, k)?;
        let converged = check_convergence(&ritz.residuals, config.eps_svd);
        log::debug!(
            "TriCG-DR cycle {cycle}: residual {residual:e}, {converged}/{k} triplets converged, max triplet residual {:e}",
            ritz.residuals.iter().copied().fold(0.0, f64::max)
        );
        if converged == k {
            conv_sv = true;
        }
        let tail = RestartTail::from_fold(&u, &v, &head);
        proc.restart(u, v, head, conv_sv);
        last_ritz = Some((tail, ritz));
    }

    let status = status.unwrap_or(Status::Converged);
    let (recycle, triplet_residuals) = match last_ritz {
        Some((tail, ritz)) => {
            let eps = ritz.residuals.iter().copied().fold(0.0, f64::max);
            let basis = DeflationBasis::from_parts(sys, ritz.u, ritz.v, ritz.sigma, eps)?;
            (RecycleContext::new(basis, tail)?, ritz.residuals)
        }
        None => (RecycleContext::empty(m, n), vec![]),
    };
    let final_explicit = Some(sys.residual_norm(b, c, &x, &y));
    Ok(DrOutcome {
        solution: Solution {
            x,
            y,
            report: SolveReport {
                status,
                iterations: total,
                matvecs,
                cycles,
                history,
                final_explicit_residual: final_explicit,
            },
        },
        recycle,
        triplet_residuals,
        triplets_converged: conv_sv && k > 0,
    })
}

fn fold_current(proc: &DrProcess, k: usize) -> Result<(RitzTriplets, BasisBlock, BasisBlock, ArrowTriDiag)> {
    let (beta_next, gamma_next) = proc.t.trailing();
    let j = proc.t.dim();
    let ritz = ritz_extract(&proc.t.densify(), &proc.u, &proc.v, k, beta_next, gamma_next)?;
    let (u, v, head) = restart_fold(
        &ritz,
        (&proc.u.vecs[j], &proc.u.images[j]),
        (&proc.v.vecs[j], &proc.v.images[j]),
        beta_next,
        gamma_next,
    );
    Ok((ritz, u, v, head))
}
