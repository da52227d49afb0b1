mod common;

use common::{dense_a, dense_m, dense_n, elliptic_singular_values, random_problem};
use sqdsolve::esvd::{default_start, gssy_dr_run, EsvdConfig};
use sqdsolve::gssy::orthonormality_error;
use sqdsolve::probio::random_sqd;
use sqdsolve::Status;

#[test]
fn leading_triplets_match_dense() {
    for seed in 0..3 {
        let p = random_sqd(70, 55, true, 40 + seed).unwrap();
        let sys = &p.system;
        let res = gssy_dr_run(sys, &p.b, &p.c, &EsvdConfig::new(20, 5, 1e-10, 50)).unwrap();
        assert_eq!(res.status, Status::Converged);
        let exact = elliptic_singular_values(sys);
        for (s, e) in res.sigma.iter().zip(&exact) {
            assert!((s - e).abs() <= 1e-8 * e, "seed {seed}: {s} vs {e}");
        }
    }
}

#[test]
fn triplets_satisfy_their_definition() {
    let p = random_sqd(60, 50, true, 9).unwrap();
    let sys = &p.system;
    let (b, c) = default_start(60, 50);
    let res = gssy_dr_run(sys, &b, &c, &EsvdConfig::new(25, 6, 1e-10, 50)).unwrap();
    let (a, m, n) = (dense_a(sys), dense_m(sys), dense_n(sys));
    for i in 0..6 {
        let (u, v, s) = (&res.u.vecs[i], &res.v.vecs[i], res.sigma[i]);
        let r1 = (&a * v - &m * u * s).norm();
        let r2 = (a.transpose() * u - &n * v * s).norm();
        assert!(r1.max(r2) <= 1e-8 * s, "triplet {i}: {r1:e} {r2:e}");
    }
    let um = nalgebra::DMatrix::from_columns(&res.u.vecs);
    let vm = nalgebra::DMatrix::from_columns(&res.v.vecs);
    assert!(orthonormality_error(&sys.m, &um) <= 1e-10);
    assert!(orthonormality_error(&sys.n, &vm) <= 1e-10);
}

#[test]
fn residual_history_reaches_tolerance() {
    let p = random_problem(2, 60, false);
    let k = 4;
    let pp = 14.min(p.system.rows().min(p.system.cols()));
    let res = gssy_dr_run(&p.system, &p.b, &p.c, &EsvdConfig::new(pp, k, 1e-9, 80)).unwrap();
    assert_eq!(res.cycle_residuals.len(), res.cycles);
    assert!(res.cycle_residuals.last().unwrap().iter().all(|&r| r <= 1e-9));
    assert_eq!(res.converged, k);
}

#[test]
fn rejects_bad_window() {
    let p = random_problem(1, 30, false);
    let m = p.system.rows().min(p.system.cols());
    assert!(gssy_dr_run(&p.system, &p.b, &p.c, &EsvdConfig::new(5, 5, 1e-10, 5)).is_err());
    assert!(gssy_dr_run(&p.system, &p.b, &p.c, &EsvdConfig::new(m + 1, 2, 1e-10, 5)).is_err());
    assert!(gssy_dr_run(&p.system, &p.b, &p.c, &EsvdConfig::new(6, 2, 1e-10, 0)).is_err());
}
