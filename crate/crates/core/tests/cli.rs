use std::fs;
use std::path::Path;
use std::process::Command;

use sqdsolve::cli::Summary;
use sqdsolve::Status;

fn sqd(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sqd"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn summary(stdout: &str) -> Summary {
    stdout.lines().rev().find(|l| l.starts_with("summary ")).unwrap().parse().unwrap()
}

#[test]
fn solve_writes_history_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = sqd(&["solve", "--random", "--size", "40x36", "--out", "h.csv"], dir.path());
    assert_eq!(code, 0);
    let s = summary(&out);
    assert_eq!(s.status, Status::Converged);
    assert_eq!(s.matvecs, 2 * s.iterations);
    assert_eq!(s.to_string().parse::<Summary>().unwrap(), s);
    let csv = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert!(csv.starts_with("iteration,matvecs,residual,cycle,stage\n"));
    assert_eq!(csv.lines().count(), s.iterations + 2);
}

#[test]
fn identical_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &'static str| {
        vec!["solve", "--random", "--size", "50x50", "--seed", "3", "--solver", "tricg-dr", "-p", "12", "-k", "3", "--out", o]
    };
    assert_eq!(sqd(&args("a.csv"), dir.path()).0, 0);
    assert_eq!(sqd(&args("b.csv"), dir.path()).0, 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(sqd(&["solve", "--bogus"], d).0, 4);
    assert_eq!(sqd(&["solve"], d).0, 4);
    assert_eq!(sqd(&["--help"], d).0, 0);
    let (code, _, err) = sqd(&["solve", "--matrix", "missing.mtx"], d);
    assert_eq!(code, 4);
    assert!(err.contains("missing.mtx"));
    assert_eq!(sqd(&["solve", "--random", "--maxit", "2", "--tol", "1e-14"], d).0, 2);
    assert_eq!(sqd(&["reproduce", "exp2", "--out", "o"], d).0, 4);
    let (code, _, err) = sqd(&["reproduce", "exp2", "--matrix", "gupta3.mtx", "--out", "o"], d);
    assert_eq!(code, 4);
    assert!(err.contains("gupta3.mtx"));
}

#[test]
fn matrix_files_and_rhs_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let n = 12;
    let mut a = format!("%%MatrixMarket matrix coordinate real general\n{n} {n} {}\n", 3 * n - 2);
    let mut m = format!("%%MatrixMarket matrix coordinate real symmetric\n{n} {n} {n}\n");
    for i in 1..=n {
        a += &format!("{i} {i} {}\n", i as f64);
        if i > 1 {
            a += &format!("{i} {} 0.5\n{} {i} -0.25\n", i - 1, i - 1);
        }
        m += &format!("{i} {i} {}\n", 1.0 + 0.1 * i as f64);
    }
    fs::write(d.join("a.mtx"), a).unwrap();
    fs::write(d.join("m.mtx"), m).unwrap();
    let line = |s: usize| (0..2 * n).map(|i| ((i * 7 + s) % 5) as f64 - 2.0).map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
    fs::write(d.join("rhs.txt"), format!("{}\n{}\n", line(1), line(3))).unwrap();
    let (code, out, err) = sqd(
        &["multirhs", "--matrix", "a.mtx", "--mass", "m.mtx", "--rhs", "file:rhs.txt", "-p", "10", "-k", "2", "--maxcycle", "40", "--out", "mr"],
        d,
    );
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(out.lines().filter(|l| l.starts_with("summary ")).count(), 3);
    assert!(d.join("mr/rhs-1.csv").exists() && d.join("mr/rhs-2.csv").exists());
    assert_eq!(summary(&out).solver, "multirhs");
}

#[test]
fn verify_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = sqd(&["verify", "--random", "--seed", "7"], dir.path());
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("failures=0"));
}

#[test]
fn esvd_reports_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = sqd(
        &["esvd", "--random", "--size", "60x50", "-p", "20", "-k", "4", "--maxcycle", "50", "--out", "t.csv"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let s = summary(&out);
    assert_eq!(s.solver, "gssy-dr");
    assert_eq!(out.lines().filter(|l| l.starts_with("cycle ")).count(), s.cycles);
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}
