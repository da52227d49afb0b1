use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use clap::ValueEnum;

use super::{status_code, write_history, ProblemArgs, RhsSpec, Summary, EXIT_OK};
use crate::error::{Error, Result};
use crate::esvd::{gssy_dr_run, EsvdConfig};
use crate::multirhs::{dtricg_solve, multi_rhs_driver, RecycleContext};
use crate::probio::{gen_synth1, gen_synth3, random_rhs_list};
use crate::report::SolveReport;
use crate::tricg::{tricg_solve, TricgConfig};
use crate::tricgdr::{tricg_dr_solve, TricgDrConfig};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// synth1: TriCG against TriCG-DR(k + 80, k) for k = 20, 40, 60.
    Exp1,
    /// SuiteSparse matrices given by --matrix, with M = N = I and ones right-hand sides.
    Exp2,
    /// synth3: gSSY-DR bases for k = 20, 40 and D-TriCG on five random right-hand sides.
    Exp3,
    /// A sequence of systems from --matrix/--mass/--stiffness and --rhs file:.
    StokesFiles,
}

/// `(p, k)` used for the SuiteSparse matrices, keyed by file stem.
pub fn exp2_parameters(stem: &str) -> Option<(usize, usize)> {
    match stem {
        "gupta3" => Some((240, 120)),
        "g7jac060sc" => Some((60, 20)),
        "rajat27" => Some((100, 40)),
        "TSOPF_RS_b300_c2" => Some((120, 40)),
        _ => None,
    }
}

/// CSVs plus the summary lines of one experiment.
struct Bundle {
    dir: PathBuf,
    seed: u64,
    lines: Vec<String>,
    code: i32,
}

impl Bundle {
    fn new(dir: &Path, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            seed,
            lines: vec![],
            code: EXIT_OK,
        })
    }

    fn record(&mut self, file: &str, solver: &str, report: &SolveReport) -> Result<()> {
        write_history(&self.dir.join(format!("{file}.csv")), report)?;
        self.note(Summary::from_report(solver, report, self.seed).to_string());
        self.code = self.code.max(status_code(report.status));
        Ok(())
    }

    fn note(&mut self, line: String) {
        println!("{line}");
        self.lines.push(line);
    }

    fn finish(self) -> Result<i32> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        fs::write(self.dir.join("summary.txt"), text)?;
        Ok(self.code)
    }
}

pub fn reproduce(exp: Experiment, problem: &ProblemArgs, out: &Path, explicit: bool) -> Result<i32> {
    match exp {
        Experiment::Exp1 => exp1(problem.seed, out, explicit),
        Experiment::Exp2 => exp2(problem, out, explicit),
        Experiment::Exp3 => exp3(problem.seed, out, explicit),
        Experiment::StokesFiles => stokes(problem, out, explicit),
    }
}

fn exp1(seed: u64, out: &Path, explicit: bool) -> Result<i32> {
    let p = gen_synth1(seed);
    let mut bundle = Bundle::new(out, seed)?;
    let plain = TricgConfig {
        tol: 1e-8,
        maxit: 40_000,
        reorth: false,
        explicit_residual: explicit,
    };
    let ks = [20usize, 40, 60];
    let (tricg, dr) = thread::scope(|s| {
        let t = s.spawn(|| tricg_solve(&p.system, &p.b, &p.c, &plain));
        let runs: Vec<_> = ks
            .iter()
            .map(|&k| {
                let cfg = TricgDrConfig {
                    p: k + 80,
                    k,
                    tol: 1e-8,
                    eps_svd: 1e-10,
                    maxcycle: 80,
                    maxit: 40_000,
                    reorth: true,
                    explicit_residual: explicit,
                };
                let p = &p;
                s.spawn(move || tricg_dr_solve(&p.system, &p.b, &p.c, &cfg))
            })
            .collect();
        (
            t.join().expect("solver thread"),
            runs.into_iter().map(|h| h.join().expect("solver thread")).collect::<Vec<_>>(),
        )
    });
    bundle.record("exp1-tricg", "tricg", &tricg?.report)?;
    for (k, r) in ks.iter().zip(dr) {
        let r = r?;
        bundle.record(&format!("exp1-tricg-dr-k{k}"), &format!("tricg-dr-p{}-k{k}", k + 80), &r.solution.report)?;
    }
    bundle.finish()
}

fn exp2(problem: &ProblemArgs, out: &Path, explicit: bool) -> Result<i32> {
    if problem.matrix.is_empty() {
        return Err(Error::InvalidConfig(
            "exp2 needs --matrix <path> for gupta3, g7jac060sc, rajat27 and/or TSOPF_RS_b300_c2".into(),
        ));
    }
    for path in &problem.matrix {
        if !path.exists() {
            return Err(Error::MissingFile(path.clone()));
        }
    }
    let mut bundle = Bundle::new(out, problem.seed)?;
    for path in &problem.matrix {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let (p, k) = exp2_parameters(&stem)
            .ok_or_else(|| Error::InvalidConfig(format!("no (p, k) known for matrix {stem:?}")))?;
        let single = ProblemArgs {
            matrix: vec![path.clone()],
            mass: None,
            stiffness: None,
            rhs: Some(RhsSpec::Ones),
            ..problem.clone()
        };
        let lp = single.load(1)?;
        let (b, c) = &lp.rhs[0];
        let plain = TricgConfig {
            tol: 1e-8,
            maxit: 80_000,
            reorth: false,
            explicit_residual: explicit,
        };
        let cfg = TricgDrConfig {
            p,
            k,
            tol: 1e-8,
            eps_svd: 1e-10,
            maxcycle: 10,
            maxit: 80_000,
            reorth: true,
            explicit_residual: explicit,
        };
        let t = tricg_solve(&lp.system, b, c, &plain)?;
        bundle.record(&format!("exp2-{stem}-tricg"), "tricg", &t.report)?;
        let d = tricg_dr_solve(&lp.system, b, c, &cfg)?;
        bundle.record(&format!("exp2-{stem}-tricg-dr"), &format!("tricg-dr-p{p}-k{k}"), &d.solution.report)?;
    }
    bundle.finish()
}

fn exp3(seed: u64, out: &Path, explicit: bool) -> Result<i32> {
    let p = gen_synth3(seed);
    let sys = &p.system;
    let rhs = random_rhs_list(sys.rows(), sys.cols(), 5, seed);
    let mut bundle = Bundle::new(out, seed)?;
    let cfg = TricgConfig {
        tol: 1e-8,
        maxit: 4000,
        reorth: false,
        explicit_residual: explicit,
    };
    for (i, (b, c)) in rhs.iter().enumerate() {
        let t = tricg_solve(sys, b, c, &cfg)?;
        bundle.record(&format!("exp3-tricg-rhs{}", i + 1), "tricg", &t.report)?;
    }
    for k in [20usize, 40] {
        let e = gssy_dr_run(sys, &p.b, &p.c, &EsvdConfig::new(k + 40, k, 1e-12, 10))?;
        bundle.note(format!(
            "esvd k={k} p={} status={} cycles={} max_residual={:.6e}",
            k + 40,
            e.status,
            e.cycles,
            e.max_residual()
        ));
        let ctx = RecycleContext::from_esvd(sys, &e)?;
        let dcfg = TricgConfig { reorth: true, ..cfg };
        for (i, (b, c)) in rhs.iter().enumerate() {
            let s = dtricg_solve(sys, &ctx, b, c, &dcfg)?;
            bundle.record(&format!("exp3-dtricg-k{k}-rhs{}", i + 1), &format!("d-tricg-k{k}"), &s.report)?;
        }
    }
    bundle.finish()
}

fn stokes(problem: &ProblemArgs, out: &Path, explicit: bool) -> Result<i32> {
    let (Some(a), Some(_), Some(_)) = (problem.matrix.first(), &problem.mass, &problem.stiffness) else {
        return Err(Error::InvalidConfig(
            "stokes-files needs --matrix, --mass, --stiffness and --rhs file:<path>".into(),
        ));
    };
    if !matches!(problem.rhs, Some(RhsSpec::File(_))) {
        return Err(Error::InvalidConfig("stokes-files needs --rhs file:<path>".into()));
    }
    if !a.exists() {
        return Err(Error::MissingFile(a.clone()));
    }
    let lp = problem.load(1)?;
    let mut bundle = Bundle::new(out, problem.seed)?;
    let plain = TricgConfig {
        tol: 1e-10,
        maxit: 2000,
        reorth: false,
        explicit_residual: explicit,
    };
    let mut plain_mv = 0;
    for (i, (b, c)) in lp.rhs.iter().enumerate() {
        let t = tricg_solve(&lp.system, b, c, &plain)?;
        plain_mv += t.report.matvecs;
        bundle.record(&format!("stokes-tricg-rhs{}", i + 1), "tricg", &t.report)?;
    }
    let cfg = TricgDrConfig {
        p: 200,
        k: 100,
        tol: 1e-10,
        eps_svd: 1e-10,
        maxcycle: 10,
        maxit: 2000,
        reorth: true,
        explicit_residual: explicit,
    };
    let (solves, _) = multi_rhs_driver(&lp.system, &lp.rhs, &cfg)?;
    let mut dr_mv = 0;
    for (i, s) in solves.iter().enumerate() {
        dr_mv += s.report().matvecs;
        let name = if i == 0 { "tricg-dr-p200-k100" } else { "d-tricg-k100" };
        bundle.record(&format!("stokes-recycled-rhs{}", i + 1), name, s.report())?;
    }
    bundle.note(format!("total matvecs tricg={plain_mv} recycled={dr_mv}"));
    bundle.finish()
}
