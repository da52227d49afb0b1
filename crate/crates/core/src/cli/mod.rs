//! The `sqd` command line: `solve`, `esvd`, `multirhs`, `verify` and
//! `reproduce`.
//!
//! Exit codes: 0 converged, 2 iteration or cycle budget exhausted,
//! 3 breakdown, 4 bad input. `verify` exits 1 when a check fails.

mod problem;
mod reproduce;
mod summary;
mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use problem::{LoadedProblem, ProblemArgs, RhsSpec};
pub use reproduce::Experiment;
pub use summary::Summary;

use crate::error::{Error, Result};
use crate::esvd::{gssy_dr_run, EsvdConfig};
use crate::multirhs::{dtricg_solve, multi_rhs_driver, RecycleContext};
use crate::probio::write_history_csv;
use crate::report::{SolveReport, Status};
use crate::tricg::{tricg_solve, TricgConfig};
use crate::tricgdr::{tricg_dr_solve, TricgDrConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sqd", version, about = "Krylov solvers for symmetric quasi-definite systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one system and write its convergence history.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Approximate the largest elliptic singular triplets by gSSY-DR.
    Esvd {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunConfig,
    },
    /// TriCG-DR on the first right-hand side, D-TriCG on the others.
    Multirhs {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        run: RunConfig,
        /// Number of generated right-hand sides.
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Check solver invariants on seeded random instances.
    Verify {
        /// Random instances (the only mode).
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        instances: usize,
    },
    /// Rerun one of the reference experiments.
    Reproduce {
        #[arg(value_enum)]
        experiment: Experiment,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Output directory.
        #[arg(long, default_value = "sqd-out")]
        out: PathBuf,
        #[arg(long)]
        explicit_residual: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Tricg,
    TricgDr,
    DTricg,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Tricg => "tricg",
            Solver::TricgDr => "tricg-dr",
            Solver::DTricg => "d-tricg",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toggle {
    On,
    Off,
}

/// Solver parameters.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    #[arg(long, value_enum, default_value_t = Solver::Tricg)]
    pub solver: Solver,
    /// Cycle length; defaults to k + 80.
    #[arg(short = 'p')]
    pub p: Option<usize>,
    /// Number of deflated triplets.
    #[arg(short = 'k', default_value_t = 20)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "eps-svd", default_value_t = 1e-10)]
    pub eps_svd: f64,
    #[arg(long, default_value_t = 10)]
    pub maxcycle: usize,
    #[arg(long, default_value_t = 80_000)]
    pub maxit: usize,
    /// Full reorthogonalization; on by default except for plain TriCG solves.
    #[arg(long, value_enum)]
    pub reorth: Option<Toggle>,
    /// History CSV (solve), triplet CSV (esvd) or output directory (multirhs).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add the explicitly computed residual to the history.
    #[arg(long)]
    pub explicit_residual: bool,
}

impl RunConfig {
    pub fn p(&self) -> usize {
        self.p.unwrap_or(self.k + 80)
    }

    pub fn reorth(&self) -> bool {
        match self.reorth {
            Some(t) => t == Toggle::On,
            None => self.solver != Solver::Tricg,
        }
    }

    pub fn tricg_config(&self) -> TricgConfig {
        TricgConfig {
            tol: self.tol,
            maxit: self.maxit,
            reorth: self.reorth(),
            explicit_residual: self.explicit_residual,
        }
    }

    /// TriCG-DR settings for `multirhs`, where reorthogonalization
    /// defaults to on whatever `--solver` says.
    pub fn recycling_config(&self) -> TricgDrConfig {
        TricgDrConfig {
            reorth: self.reorth != Some(Toggle::Off),
            ..self.dr_config()
        }
    }

    pub fn dr_config(&self) -> TricgDrConfig {
        TricgDrConfig {
            p: self.p(),
            k: self.k,
            tol: self.tol,
            eps_svd: self.eps_svd,
            maxcycle: self.maxcycle,
            maxit: self.maxit,
            reorth: self.reorth(),
            explicit_residual: self.explicit_residual,
        }
    }

    pub fn esvd_config(&self) -> EsvdConfig {
        EsvdConfig::new(self.p(), self.k, self.eps_svd, self.maxcycle)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SQD_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Solve { problem, run } => solve(problem, run),
        Command::Esvd { problem, run } => esvd(problem, run),
        Command::Multirhs { problem, run, count } => multirhs(problem, run, *count),
        Command::Verify { seed, instances, .. } => verify::run_suite(*seed, *instances),
        Command::Reproduce {
            experiment,
            problem,
            out,
            explicit_residual,
        } => reproduce::reproduce(*experiment, problem, out, *explicit_residual),
    }
}

pub fn status_code(status: Status) -> i32 {
    match status {
        Status::Converged => EXIT_OK,
        Status::MaxIterations | Status::MaxCycles => EXIT_BUDGET,
        Status::Breakdown => EXIT_BREAKDOWN,
    }
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Breakdown { .. } | Error::PivotCollapse { .. } | Error::Singular { .. } | Error::SvdNoConvergence { .. } => {
            EXIT_BREAKDOWN
        }
        _ => EXIT_INPUT,
    }
}

fn write_history(path: &Path, report: &SolveReport) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_history_csv(path, &report.history)
}

fn solve(problem: &ProblemArgs, run: &RunConfig) -> Result<i32> {
    let lp = problem.load(1)?;
    let sys = &lp.system;
    let (b, c) = &lp.rhs[0];
    let report = match run.solver {
        Solver::Tricg => tricg_solve(sys, b, c, &run.tricg_config())?.report,
        Solver::TricgDr => {
            let out = tricg_dr_solve(sys, b, c, &run.dr_config())?;
            log::info!(
                "{} triplets, converged: {}",
                out.recycle.k(),
                out.triplets_converged
            );
            out.solution.report
        }
        Solver::DTricg => {
            let e = gssy_dr_run(sys, b, c, &run.esvd_config())?;
            log::info!("gSSY-DR: {} cycles, max triplet residual {:e}", e.cycles, e.max_residual());
            let ctx = RecycleContext::from_esvd(sys, &e)?;
            dtricg_solve(sys, &ctx, b, c, &run.tricg_config())?.report
        }
    };
    let out = run.out.clone().unwrap_or_else(|| PathBuf::from("history.csv"));
    write_history(&out, &report)?;
    println!("{}", Summary::from_report(run.solver.name(), &report, problem.seed));
    Ok(status_code(report.status))
}

fn esvd(problem: &ProblemArgs, run: &RunConfig) -> Result<i32> {
    let lp = problem.load(1)?;
    let (b, c) = &lp.rhs[0];
    let res = gssy_dr_run(&lp.system, b, c, &run.esvd_config())?;
    for (i, r) in res.cycle_residuals.iter().enumerate() {
        let worst = r.iter().copied().fold(0.0, f64::max);
        let conv = r.iter().filter(|&&x| x <= run.eps_svd).count();
        println!("cycle {} converged={}/{} max_residual={:.6e}", i + 1, conv, r.len(), worst);
    }
    if let Some(path) = &run.out {
        let mut csv = String::from("index,sigma,residual\n");
        for (i, (s, r)) in res.sigma.iter().zip(&res.residuals).enumerate() {
            let _ = writeln!(csv, "{},{:.16e},{:.16e}", i + 1, s, r);
        }
        fs::write(path, csv)?;
    }
    let summary = Summary {
        solver: "gssy-dr".into(),
        status: res.status,
        iterations: res.matvecs / 2,
        matvecs: res.matvecs,
        residual: res.max_residual(),
        cycles: res.cycles,
        seed: problem.seed,
    };
    println!("{summary}");
    Ok(status_code(res.status))
}

fn multirhs(problem: &ProblemArgs, run: &RunConfig, count: usize) -> Result<i32> {
    let lp = problem.load(count)?;
    let (solves, ctx) = multi_rhs_driver(&lp.system, &lp.rhs, &run.recycling_config())?;
    log::info!("deflation space of {} triplets (eps {:e})", ctx.k(), ctx.basis.eps);
    let dir = run.out.clone().unwrap_or_else(|| PathBuf::from("sqd-out"));
    fs::create_dir_all(&dir)?;
    let mut code = EXIT_OK;
    let (mut iters, mut matvecs, mut worst) = (0, 0, 0.0f64);
    for (i, s) in solves.iter().enumerate() {
        let rep = s.report();
        let name = if i == 0 { "tricg-dr" } else { "d-tricg" };
        write_history(&dir.join(format!("rhs-{}.csv", i + 1)), rep)?;
        println!("{}", Summary::from_report(name, rep, problem.seed));
        code = code.max(status_code(rep.status));
        iters += rep.iterations;
        matvecs += rep.matvecs;
        worst = worst.max(rep.final_residual());
    }
    let total = Summary {
        solver: "multirhs".into(),
        status: solves
            .iter()
            .map(|s| s.report().status)
            .max_by_key(|&s| status_code(s))
            .unwrap_or(Status::Converged),
        iterations: iters,
        matvecs,
        residual: worst,
        cycles: solves[0].report().cycles,
        seed: problem.seed,
    };
    println!("{total}");
    Ok(code)
}
