//! Partial elliptic SVD by the gSSY process with deflated restarting.
//!
//! Each cycle extends the basis to `p` columns, takes the SVD of the projected
//! matrix, keeps the `k` largest Ritz triplets and folds them together with
//! the last basis pair into the head of the next cycle. The projected matrix
//! of a restarted cycle is arrow shaped: a diagonal head, one coupling row and
//! column, and a tridiagonal tail.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gssy::{expand, finish, gssy_init, BasisBlock, Reorth, RelationResiduals, TriDiag};
use crate::opcore::dense_svd;
use crate::report::Status;
use crate::system::SqdSystem;

/// Projected matrix of a (possibly restarted) cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArrowTriDiag {
    /// `α̃₁..α̃_k`, the folded singular values.
    pub head: Vec<f64>,
    /// `β̃₂..β̃_{k+1}`: row `k+1`, columns `1..k`.
    pub coupling_row: Vec<f64>,
    /// `γ̃₂..γ̃_{k+1}`: column `k+1`, rows `1..k`.
    pub coupling_col: Vec<f64>,
    /// `α̃_{k+1}..α̃_j`
    pub alphas: Vec<f64>,
    /// `β_{k+2}..β_{j+1}` (sub-diagonal of the tail and the trailing entry)
    pub betas: Vec<f64>,
    /// `γ_{k+2}..γ_{j+1}`
    pub gammas: Vec<f64>,
}

impl ArrowTriDiag {
    /// The tridiagonal matrix of an unrestarted run (`k = 0`).
    pub fn from_tridiag(t: &TriDiag) -> Self {
        ArrowTriDiag {
            alphas: t.alphas.clone(),
            betas: t.betas[1..].to_vec(),
            gammas: t.gammas[1..].to_vec(),
            ..Default::default()
        }
    }

    /// A fresh head with no tail yet.
    pub fn with_head(head: Vec<f64>, coupling_row: Vec<f64>, coupling_col: Vec<f64>) -> Self {
        ArrowTriDiag {
            head,
            coupling_row,
            coupling_col,
            ..Default::default()
        }
    }

    pub fn k(&self) -> usize {
        self.head.len()
    }

    /// Current dimension `j`.
    pub fn dim(&self) -> usize {
        self.head.len() + self.alphas.len()
    }

    pub fn push(&mut self, alpha: f64, beta_next: f64, gamma_next: f64) {
        self.alphas.push(alpha);
        self.betas.push(beta_next);
        self.gammas.push(gamma_next);
    }

    /// `(j+1) × (j+1)` matrix holding `T̃_j`, its trailing row `β_{j+1}·e_jᵀ`
    /// and column `γ_{j+1}·e_j` (or the couplings when the tail is empty).
    /// The last diagonal entry is zero.
    pub fn dense_extended(&self) -> DMatrix<f64> {
        let k = self.k();
        let j = self.dim();
        let mut t = DMatrix::zeros(j + 1, j + 1);
        for i in 0..k {
            t[(i, i)] = self.head[i];
            t[(i, k)] = self.coupling_col[i];
            t[(k, i)] = self.coupling_row[i];
        }
        for (i, &a) in self.alphas.iter().enumerate() {
            let idx = k + i;
            t[(idx, idx)] = a;
            t[(idx + 1, idx)] = self.betas[i];
            t[(idx, idx + 1)] = self.gammas[i];
        }
        t
    }

    /// Dense `T̃_j`.
    pub fn densify(&self) -> DMatrix<f64> {
        let j = self.dim();
        self.dense_extended().view((0, 0), (j, j)).into_owned()
    }

    /// `β_{j+1}` and `γ_{j+1}` of the last step.
    pub fn trailing(&self) -> (f64, f64) {
        (
            self.betas.last().copied().unwrap_or(0.0),
            self.gammas.last().copied().unwrap_or(0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Largest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsvdConfig {
    pub p: usize,
    pub k: usize,
    pub eps_svd: f64,
    pub maxcycle: usize,
    pub selector: Selector,
}

impl EsvdConfig {
    pub fn new(p: usize, k: usize, eps_svd: f64, maxcycle: usize) -> Self {
        EsvdConfig {
            p,
            k,
            eps_svd,
            maxcycle,
            selector: Selector::Largest,
        }
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.k == 0 || self.k >= self.p || self.p > m.min(n) {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= k < p <= min(m, n); got k = {}, p = {}, min(m, n) = {}",
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

/// Ritz triplets of one cycle.
#[derive(Debug, Clone)]
pub struct RitzTriplets {
    pub u_hat: DMatrix<f64>,
    pub v_hat: DMatrix<f64>,
    pub sigma: Vec<f64>,
    /// `U_p·Û_k` with images.
    pub u: BasisBlock,
    /// `V_p·V̂_k` with images.
    pub v: BasisBlock,
    /// `max{β_{p+1}|e_pᵀv̂_i|, γ_{p+1}|e_pᵀû_i|}` per triplet.
    pub residuals: Vec<f64>,
}

/// SVD of the projected matrix and the `k` largest Ritz triplets.
///
/// `u`, `v` must hold at least `p = t.nrows()` columns; extra columns are
/// ignored.
pub fn ritz_extract(
    t: &DMatrix<f64>,
    u: &BasisBlock,
    v: &BasisBlock,
    k: usize,
    beta_next: f64,
    gamma_next: f64,
) -> Result<RitzTriplets> {
    let p = t.nrows();
    let k = k.min(p);
    let svd = dense_svd(t)?;
    let u_hat = svd.u.columns(0, k).into_owned();
    let v_hat = svd.v.columns(0, k).into_owned();
    let sigma: Vec<f64> = svd.sigma.iter().take(k).copied().collect();
    let residuals = (0..k)
        .map(|i| (beta_next * v_hat[(p - 1, i)].abs()).max(gamma_next * u_hat[(p - 1, i)].abs()))
        .collect();
    let lead = |b: &BasisBlock| BasisBlock {
        vecs: b.vecs[..p].to_vec(),
        images: b.images[..p].to_vec(),
    };
    Ok(RitzTriplets {
        u: lead(u).combine(&u_hat),
        v: lead(v).combine(&v_hat),
        u_hat,
        v_hat,
        sigma,
        residuals,
    })
}

/// Number of triplets whose residual is at most `eps_svd`.
pub fn check_convergence(residuals: &[f64], eps_svd: f64) -> usize {
    residuals.iter().filter(|&&r| r <= eps_svd).count()
}

/// The head of the next cycle: `[U_p·Û_k, u_{p+1}]`, `[V_p·V̂_k, v_{p+1}]`
/// and the arrow head with couplings `γ_{p+1}·Û_kᵀe_p`, `β_{p+1}·e_pᵀV̂_k`.
pub fn restart_fold(
    ritz: &RitzTriplets,
    u_next: (&DVector<f64>, &DVector<f64>),
    v_next: (&DVector<f64>, &DVector<f64>),
    beta_next: f64,
    gamma_next: f64,
) -> (BasisBlock, BasisBlock, ArrowTriDiag) {
    let p = ritz.u_hat.nrows();
    let k = ritz.sigma.len();
    let mut u = ritz.u.clone();
    let mut v = ritz.v.clone();
    u.push(u_next.0.clone(), u_next.1.clone());
    v.push(v_next.0.clone(), v_next.1.clone());
    let row = (0..k).map(|i| beta_next * ritz.v_hat[(p - 1, i)]).collect();
    let col = (0..k).map(|i| gamma_next * ritz.u_hat[(p - 1, i)]).collect();
    (u, v, ArrowTriDiag::with_head(ritz.sigma.clone(), row, col))
}

/// Outcome of one basis extension inside a cycle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DrStep {
    pub alpha: f64,
    pub beta_next: f64,
    pub gamma_next: f64,
    pub broken: bool,
}

/// Basis and projected matrix of the current cycle.
#[derive(Debug, Clone)]
pub(crate) struct DrProcess {
    pub u: BasisBlock,
    pub v: BasisBlock,
    pub t: ArrowTriDiag,
    /// Extensions taken in this cycle.
    pub steps: usize,
    /// `β_j`, `γ_j` of the newest column pair.
    beta_cur: f64,
    gamma_cur: f64,
    /// Keep only the head and the two newest columns, and stop recording `T̃`.
    window: bool,
}

impl DrProcess {
    pub fn start(u: BasisBlock, v: BasisBlock, beta1: f64, gamma1: f64) -> Self {
        DrProcess {
            u,
            v,
            t: ArrowTriDiag::default(),
            steps: 0,
            beta_cur: beta1,
            gamma_cur: gamma1,
            window: false,
        }
    }

    pub fn k(&self) -> usize {
        self.t.k()
    }

    /// Replaces the basis by a folded head and begins a new cycle.
    pub fn restart(&mut self, u: BasisBlock, v: BasisBlock, head: ArrowTriDiag, window: bool) {
        self.u = u;
        self.v = v;
        self.t = head;
        self.steps = 0;
        self.window = window;
    }

    /// Current (newest) basis pair `u_j`, `v_j`.
    pub fn current(&self) -> (&DVector<f64>, &DVector<f64>) {
        (self.u.vecs.last().unwrap(), self.v.vecs.last().unwrap())
    }

    /// `β_j`, `γ_j` belonging to the current pair.
    pub fn current_coeffs(&self) -> (f64, f64) {
        (self.beta_cur, self.gamma_cur)
    }

    /// One extension: the arrow continuation on the first step of a cycle,
    /// the three-term recurrence afterwards.
    pub fn step(&mut self, sys: &SqdSystem, reorth: Reorth) -> Result<DrStep> {
        let last = self.u.len() - 1;
        let k = self.k();
        let mut uc: Vec<(f64, &DVector<f64>)> = Vec::new();
        let mut vc: Vec<(f64, &DVector<f64>)> = Vec::new();
        if self.steps == 0 {
            for l in 0..k {
                uc.push((self.t.coupling_col[l], &self.u.images[l]));
                vc.push((self.t.coupling_row[l], &self.v.images[l]));
            }
        } else {
            uc.push((self.gamma_cur, &self.u.images[last - 1]));
            vc.push((self.beta_cur, &self.v.images[last - 1]));
        }
        let e = expand(
            sys,
            &self.u.vecs[last],
            &self.u.images[last],
            &self.v.vecs[last],
            &self.v.images[last],
            &uc,
            &vc,
        );
        let alpha = e.alpha;
        let (nu, nv) = finish(sys, e, &self.u, &self.v, reorth)?;
        let step = DrStep {
            alpha,
            beta_next: nu.beta(),
            gamma_next: nv.beta(),
            broken: nu.is_breakdown() || nv.is_breakdown(),
        };
        if !self.window {
            self.t.push(alpha, step.beta_next, step.gamma_next);
        }
        self.steps += 1;
        if let (
            crate::opcore::Normalized::Unit { u, image, .. },
            crate::opcore::Normalized::Unit { u: v, image: nvi, .. },
        ) = (nu, nv)
        {
            self.u.push(u, image);
            self.v.push(v, nvi);
            self.beta_cur = step.beta_next;
            self.gamma_cur = step.gamma_next;
            if self.window && self.u.len() > k + 2 {
                self.u.vecs.remove(k);
                self.u.images.remove(k);
                self.v.vecs.remove(k);
                self.v.images.remove(k);
            }
        }
        Ok(step)
    }
}

/// Residuals of `A·Ṽ_j = M·Ũ_{j+1}·T̃_{j+1,j}`, `Aᵀ·Ũ_j = N·Ṽ_{j+1}·T̃_{j,j+1}ᵀ`
/// and the orthonormality of the `j+1` columns.
pub fn verify_arrow_relations(sys: &SqdSystem, u: &BasisBlock, v: &BasisBlock, t: &ArrowTriDiag) -> RelationResiduals {
    let j = t.dim();
    let ext = t.dense_extended();
    let (m, n) = (sys.rows(), sys.cols());
    let uu = u.to_matrix(m);
    let vv = v.to_matrix(n);
    let mu = DMatrix::from_columns(&u.vecs.iter().map(|x| sys.m.apply(x)).collect::<Vec<_>>());
    let nv = DMatrix::from_columns(&v.vecs.iter().map(|x| sys.n.apply(x)).collect::<Vec<_>>());
    let mut av = DMatrix::zeros(m, j);
    let mut atu = DMatrix::zeros(n, j);
    for i in 0..j {
        av.set_column(i, &sys.a.mul_vec(&vv.column(i).into_owned()));
        atu.set_column(i, &sys.a.mul_t_vec(&uu.column(i).into_owned()));
    }
    let lower = ext.view((0, 0), (j + 1, j));
    let upper = ext.view((0, 0), (j, j + 1));
    let r_av = (av - &mu * lower).norm();
    let r_atu = (atu - &nv * upper.transpose()).norm();
    let eye = DMatrix::<f64>::identity(j + 1, j + 1);
    RelationResiduals {
        r_av,
        r_atu,
        r_orth_u: (uu.transpose() * &mu - &eye).abs().max(),
        r_orth_v: (vv.transpose() * &nv - &eye).abs().max(),
    }
}

/// Approximate `k` largest elliptic singular triplets.
#[derive(Debug, Clone)]
pub struct EsvdResult {
    /// `Ũ_k` (M-orthonormal) with images `M·Ũ_k`.
    pub u: BasisBlock,
    /// `Ṽ_k` (N-orthonormal) with images `N·Ṽ_k`.
    pub v: BasisBlock,
    pub sigma: Vec<f64>,
    pub residuals: Vec<f64>,
    pub cycles: usize,
    pub converged: usize,
    pub status: Status,
    /// Triplet residuals after each cycle.
    pub cycle_residuals: Vec<Vec<f64>>,
    /// Operator applications (`A` and `Aᵀ` products).
    pub matvecs: usize,
    /// Next basis pair and couplings, absent after a breakdown.
    pub tail: Option<RestartTail>,
}

/// The pair `u_{p+1}`, `v_{p+1}` following a set of Ritz triplets, with the
/// couplings `β_{p+1}·e_pᵀV̂_k` (row) and `γ_{p+1}·Û_kᵀe_p` (column).
#[derive(Debug, Clone)]
pub struct RestartTail {
    pub u_next: DVector<f64>,
    pub mu_next: DVector<f64>,
    pub v_next: DVector<f64>,
    pub nv_next: DVector<f64>,
    pub coupling_row: Vec<f64>,
    pub coupling_col: Vec<f64>,
}

impl RestartTail {
    /// Splits the output of [`restart_fold`].
    pub fn from_fold(u: &BasisBlock, v: &BasisBlock, head: &ArrowTriDiag) -> Self {
        RestartTail {
            u_next: u.vecs.last().unwrap().clone(),
            mu_next: u.images.last().unwrap().clone(),
            v_next: v.vecs.last().unwrap().clone(),
            nv_next: v.images.last().unwrap().clone(),
            coupling_row: head.coupling_row.clone(),
            coupling_col: head.coupling_col.clone(),
        }
    }

    /// Zero pair and couplings: exact triplets need no tail.
    pub fn zeros(m: usize, n: usize, k: usize) -> Self {
        RestartTail {
            u_next: DVector::zeros(m),
            mu_next: DVector::zeros(m),
            v_next: DVector::zeros(n),
            nv_next: DVector::zeros(n),
            coupling_row: vec![0.0; k],
            coupling_col: vec![0.0; k],
        }
    }
}

impl EsvdResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// `b = e/√m`, `c = e/√n`: the default start vectors of a standalone run.
pub fn default_start(m: usize, n: usize) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_element(m, 1.0 / (m as f64).sqrt()),
        DVector::from_element(n, 1.0 / (n as f64).sqrt()),
    )
}

/// Runs gSSY-DR(p, k) from the start vectors `b`, `c`.
pub fn gssy_dr_run(sys: &SqdSystem, b: &DVector<f64>, c: &DVector<f64>, config: &EsvdConfig) -> Result<EsvdResult> {
    config.validate(sys.rows(), sys.cols())?;
    let init = gssy_init(sys, b, c, true)?;
    let (beta1, gamma1) = (init.tridiag().betas[0], init.tridiag().gammas[0]);
    let mut proc = DrProcess::start(init.basis().u.clone(), init.basis().v.clone(), beta1, gamma1);
    let mut cycle_residuals = Vec::new();
    let mut matvecs = 0;

    for cycle in 1..=config.maxcycle {
        let mut broken = false;
        while proc.t.dim() < config.p {
            let s = proc.step(sys, Reorth::Full)?;
            matvecs += 2;
            if s.broken {
                broken = true;
                break;
            }
        }
        let (beta_next, gamma_next) = proc.t.trailing();
        let ritz = ritz_extract(&proc.t.densify(), &proc.u, &proc.v, config.k, beta_next, gamma_next)?;
        let converged = check_convergence(&ritz.residuals, config.eps_svd);
        log::debug!(
            "gSSY-DR cycle {cycle}: {converged}/{} triplets converged, max residual {:e}",
            ritz.sigma.len(),
            ritz.residuals.iter().copied().fold(0.0, f64::max)
        );
        cycle_residuals.push(ritz.residuals.clone());
        let done = converged == config.k;
        if done || broken || cycle == config.maxcycle {
            let tail = (!broken).then(|| {
                let p = config.p;
                let (u, v, head) = restart_fold(
                    &ritz,
                    (&proc.u.vecs[p], &proc.u.images[p]),
                    (&proc.v.vecs[p], &proc.v.images[p]),
                    beta_next,
                    gamma_next,
                );
                RestartTail::from_fold(&u, &v, &head)
            });
            let status = if done {
                Status::Converged
            } else if broken {
                Status::Breakdown
            } else {
                Status::MaxCycles
            };
            return Ok(EsvdResult {
                u: ritz.u,
                v: ritz.v,
                sigma: ritz.sigma,
                residuals: ritz.residuals,
                cycles: cycle,
                converged,
                status,
                cycle_residuals,
                matvecs,
                tail,
            });
        }
        let p = config.p;
        let (u, v, head) = restart_fold(
            &ritz,
            (&proc.u.vecs[p], &proc.u.images[p]),
            (&proc.v.vecs[p], &proc.v.images[p]),
            beta_next,
            gamma_next,
        );
        proc.restart(u, v, head, false);
    }
    unreachable!("the final cycle always returns")
}
