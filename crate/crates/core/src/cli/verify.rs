use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EXIT_CHECK_FAILED, EXIT_OK};
use crate::deflate::DeflationBasis;
use crate::error::Result;
use crate::gssy::{gssy_init, verify_relations};
use crate::multirhs::{initial_residual, warm_start, RecycleContext};
use crate::opcore::dense_solve;
use crate::probio::random_sqd;
use crate::system::stack;
use crate::tricg::{tricg_solve, TricgConfig};
use crate::tricgdr::{tricg_dr_solve, TricgDrConfig};

struct Check {
    failures: usize,
}

impl Check {
    fn report(&mut self, name: &str, instance: usize, value: f64, limit: f64) {
        let ok = value <= limit;
        if !ok {
            self.failures += 1;
        }
        println!(
            "check {name} instance={instance} value={value:.3e} limit={limit:.1e} {}",
            if ok { "pass" } else { "FAIL" }
        );
    }
}

/// Process relations, TriCG against a dense solve, the `k = 0` reduction of
/// TriCG-DR and the warm-start residual identity on random problems.
pub fn run_suite(seed: u64, instances: usize) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut check = Check { failures: 0 };
    for i in 0..instances {
        let m: usize = rng.random_range(12..=50);
        let n = rng.random_range((3 * m).div_ceil(4)..=m);
        let p = random_sqd(m, n, true, rng.random())?;
        let sys = &p.system;
        let f = stack(&p.b, &p.c);

        let mut proc = gssy_init(sys, &p.b, &p.c, true)?;
        for _ in 0..15.min(n - 1) {
            proc.step()?;
        }
        let rel = verify_relations(sys, proc.basis(), proc.tridiag());
        check.report("gssy-relations", i, rel.max(), 1e-10 * sys.a.frobenius_norm().max(1.0));

        let cfg = TricgConfig {
            tol: 1e-10,
            explicit_residual: true,
            ..Default::default()
        };
        let sol = tricg_solve(sys, &p.b, &p.c, &cfg)?;
        let exact = dense_solve(&sys.dense_k(), &f)?;
        let err = (stack(&sol.x, &sol.y) - &exact).norm() / exact.norm();
        check.report("tricg-dense", i, err, 1e-8);
        let r0 = sol.report.history[0].residual;
        let gap = sol
            .report
            .history
            .iter()
            .map(|h| (h.residual - h.explicit_residual.unwrap_or(f64::NAN)).abs() / r0)
            .fold(0.0, f64::max);
        check.report("tricg-residual", i, gap, 1e-8);

        let dr = tricg_dr_solve(
            sys,
            &p.b,
            &p.c,
            &TricgDrConfig {
                k: 0,
                p: 1,
                tol: 1e-10,
                reorth: false,
                ..Default::default()
            },
        )?;
        let diff = (stack(&dr.solution.x, &dr.solution.y) - stack(&sol.x, &sol.y)).norm() / exact.norm();
        check.report("tricg-dr-k0", i, diff, 1e-12);

        let k = 3.min(n - 1);
        let basis = DeflationBasis::exact(sys, k)?;
        let ctx = RecycleContext::from_exact(sys, basis);
        let ws = warm_start(&ctx, &p.b, &p.c)?;
        let (r, s) = initial_residual(&ctx, &p.b, &p.c, &ws.dx, &ws.dy);
        let (re, se) = sys.residual(&p.b, &p.c, &ws.x0, &ws.y0);
        let gap = (stack(&r, &s) - stack(&re, &se)).norm() / f.norm();
        check.report("warm-start-residual", i, gap, 1e-9);
    }
    println!("verify seed={seed} instances={instances} failures={}", check.failures);
    Ok(if check.failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}
