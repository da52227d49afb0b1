mod common;

use common::{cat, rel};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sqdsolve::cli::Summary;
use sqdsolve::gssy::gssy_init;
use sqdsolve::multirhs::{initial_residual, warm_start, RecycleContext};
use sqdsolve::opcore::{dense_svd, SparseMatrix};
use sqdsolve::probio::{parse_matrix_market, random_sqd};
use sqdsolve::system::{split, stack};
use sqdsolve::tricg::{tricg_solve, TricgConfig};
use sqdsolve::tricgdr::head_ldl;
use sqdsolve::{DeflationBasis, Status};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-5.0f64..5.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn sized_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..9, 1usize..9).prop_flat_map(|(r, c)| matrix(r, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn initial_residual_is_start_norm(m in 4usize..20, extra in 0usize..6, seed in 0u64..1000) {
        let p = random_sqd(m + extra, m, seed % 2 == 0, seed).unwrap();
        let proc = gssy_init(&p.system, &p.b, &p.c, false).unwrap();
        let (b1, g1) = (proc.tridiag().betas[0], proc.tridiag().gammas[0]);
        let sol = tricg_solve(&p.system, &p.b, &p.c, &TricgConfig { maxit: 1, ..Default::default() }).unwrap();
        prop_assert_eq!(sol.report.history[0].residual, (b1 * b1 + g1 * g1).sqrt());
    }

    #[test]
    fn sparse_products_match_dense(a in sized_matrix(), seed in 0u64..100) {
        let s = SparseMatrix::from_dense(&a);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let x = DVector::from_fn(a.ncols(), |i, _| ((i as u64 * 31 + seed) % 7) as f64 - 3.0);
        let y = DVector::from_fn(a.nrows(), |i, _| ((i as u64 * 17 + seed) % 5) as f64 - 2.0);
        prop_assert!((s.mul_vec(&x) - &a * &x).amax() <= 1e-12);
        prop_assert!((s.mul_t_vec(&y) - a.transpose() * &y).amax() <= 1e-12);
        prop_assert!((s.mul_vec(&x).dot(&y) - x.dot(&s.mul_t_vec(&y))).abs() <= 1e-10);
    }

    #[test]
    fn jacobi_svd_reconstructs(a in sized_matrix()) {
        let s = dense_svd(&a).unwrap();
        let scale = a.amax().max(1.0);
        prop_assert!((s.reconstruct() - &a).amax() <= 1e-12 * scale);
        prop_assert!(s.sigma.iter().zip(s.sigma.iter().skip(1)).all(|(x, y)| x >= y));
        let oracle = a.singular_values();
        let mut o: Vec<f64> = oracle.iter().copied().collect();
        o.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in s.sigma.iter().zip(&o) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn stack_split_round_trip(v in proptest::collection::vec(-1e3f64..1e3, 1..30), cut in 0usize..30) {
        let z = DVector::from_vec(v);
        let m = cut.min(z.len());
        let (x, y) = split(&z, m);
        prop_assert_eq!(stack(&x, &y), z);
    }

    #[test]
    fn matrix_market_text_round_trip(a in sized_matrix()) {
        let s = SparseMatrix::from_dense(&a);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let mut text = format!("%%MatrixMarket matrix coordinate real general\n{} {} {}\n", s.rows(), s.cols(), s.nnz());
        for (r, c, v) in s.triplets() {
            text += &format!("{} {} {:e}\n", r + 1, c + 1, v);
        }
        let back = parse_matrix_market(&text, "p").unwrap();
        prop_assert_eq!(back.to_dense(), s.to_dense());
    }

    #[test]
    fn summary_round_trip(it in 0usize..100000, r in 1e-300f64..1e10, cycles in 0usize..100, seed in any::<u64>(), st in 0usize..4) {
        let status = [Status::Converged, Status::MaxIterations, Status::MaxCycles, Status::Breakdown][st];
        let s = Summary { solver: "tricg-dr".into(), status, iterations: it, matvecs: 2 * it, residual: r, cycles, seed };
        prop_assert_eq!(s.to_string().parse::<Summary>().unwrap(), s);
    }

    #[test]
    fn head_factorization_is_consistent(
        alphas in proptest::collection::vec(-3.0f64..3.0, 4),
        couple in proptest::collection::vec(-0.3f64..0.3, 6),
    ) {
        let f = head_ldl(&alphas, &couple[..3], &couple[3..]).unwrap();
        let (l, d) = common::dense_ldl(&arrow(&alphas, &couple[..3], &couple[3..]));
        for i in 0..4 {
            prop_assert!((f.d_odd[i] - d[2 * i]).abs() <= 1e-10 * d[2 * i].abs().max(1.0));
            prop_assert!((f.d_even[i] - d[2 * i + 1]).abs() <= 1e-10 * d[2 * i + 1].abs().max(1.0));
            prop_assert!((f.delta[i] - l[(2 * i + 1, 2 * i)]).abs() <= 1e-10 * l[(2 * i + 1, 2 * i)].abs().max(1.0));
        }
    }
}

fn arrow(alphas: &[f64], betas: &[f64], gammas: &[f64]) -> DMatrix<f64> {
    let k = betas.len();
    let mut s = DMatrix::zeros(2 * k + 2, 2 * k + 2);
    for l in 0..=k {
        s[(2 * l, 2 * l)] = 1.0;
        s[(2 * l + 1, 2 * l + 1)] = -1.0;
        s[(2 * l, 2 * l + 1)] = alphas[l];
        s[(2 * l + 1, 2 * l)] = alphas[l];
    }
    for l in 0..k {
        s[(2 * k, 2 * l + 1)] = betas[l];
        s[(2 * l + 1, 2 * k)] = betas[l];
        s[(2 * l, 2 * k + 1)] = gammas[l];
        s[(2 * k + 1, 2 * l)] = gammas[l];
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projected_residual_identities(m in 12usize..30, k in 1usize..5, seed in 0u64..1000) {
        let p = random_sqd(m, m - m / 5, true, seed).unwrap();
        let sys = &p.system;
        let basis = DeflationBasis::exact(sys, k).unwrap();
        let (r, s) = basis.apply_cal_p(&p.b, &p.c);
        let (r2, s2) = basis.apply_cal_p(&r, &s);
        prop_assert!(rel(&cat(&r2, &s2), &cat(&r, &s)) <= 1e-10);
        let ctx = RecycleContext::from_exact(sys, basis);
        let ws = warm_start(&ctx, &p.b, &p.c).unwrap();
        let (r0, s0) = initial_residual(&ctx, &p.b, &p.c, &ws.dx, &ws.dy);
        let (re, se) = sys.residual(&p.b, &p.c, &ws.x0, &ws.y0);
        prop_assert!(rel(&cat(&r0, &s0), &cat(&re, &se)) <= 1e-10);
        for (u, mu) in ctx.basis.u.vecs.iter().zip(&ctx.basis.u.images) {
            let _ = mu;
            prop_assert!(u.dot(&r0).abs() <= 1e-10 * p.b.norm());
        }
    }
}
