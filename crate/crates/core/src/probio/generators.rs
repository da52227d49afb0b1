use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::opcore::{SparseMatrix, SpdOperator};
use crate::system::SqdSystem;

/// A system together with one right-hand side.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub system: SqdSystem,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
}

/// `n` equispaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![b],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
        }
    }
}

/// Diagonal of 2000 points on `[0, 800]` followed by 60 points on `[1e3, 1e5]`.
pub fn synth1_matrix() -> SparseMatrix {
    let mut d = linspace(0.0, 800.0, 2000);
    d.extend(linspace(1e3, 1e5, 60));
    SparseMatrix::from_diagonal(&d).expect("nonzero diagonal")
}

/// Diagonal of 1960 points on `[0, 100]` followed by 40 points on `[1000, 1020]`.
pub fn synth3_matrix() -> SparseMatrix {
    let mut d = linspace(0.0, 100.0, 1960);
    d.extend(linspace(1000.0, 1020.0, 40));
    SparseMatrix::from_diagonal(&d).expect("nonzero diagonal")
}

/// The first synthetic problem with `M = N = I` and a seeded random right-hand side.
pub fn gen_synth1(seed: u64) -> Problem {
    let a = synth1_matrix();
    let (b, c) = random_rhs(a.rows(), a.cols(), seed);
    Problem {
        name: "synth1".into(),
        system: SqdSystem::with_identity(a),
        b,
        c,
    }
}

/// The third synthetic problem with `M = N = I` and a seeded random right-hand side.
pub fn gen_synth3(seed: u64) -> Problem {
    let a = synth3_matrix();
    let (b, c) = random_rhs(a.rows(), a.cols(), seed);
    Problem {
        name: "synth3".into(),
        system: SqdSystem::with_identity(a),
        b,
        c,
    }
}

/// `b = e/√m`, `c = e/√n`.
pub fn gen_ones_rhs(m: usize, n: usize) -> (DVector<f64>, DVector<f64>) {
    (
        DVector::from_element(m, 1.0 / (m as f64).sqrt()),
        DVector::from_element(n, 1.0 / (n as f64).sqrt()),
    )
}

fn normal_vec(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Standard normal `b`, `c` from a ChaCha8 stream seeded with `seed`.
pub fn random_rhs(m: usize, n: usize, seed: u64) -> (DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = normal_vec(&mut rng, m);
    let c = normal_vec(&mut rng, n);
    (b, c)
}

/// `count` right-hand sides drawn from one seeded stream.
pub fn random_rhs_list(m: usize, n: usize, count: usize, seed: u64) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let b = normal_vec(&mut rng, m);
            let c = normal_vec(&mut rng, n);
            (b, c)
        })
        .collect()
}

/// Dense SPD matrix `GᵀG/dim + shift·I` with standard normal `G`.
pub fn random_spd(dim: usize, shift: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut s = g.transpose() * &g / dim as f64;
    for i in 0..dim {
        s[(i, i)] += shift;
    }
    // exact symmetry
    (&s + s.transpose()) * 0.5
}

/// Random `m × n` problem with standard normal `A` and right-hand side; with
/// `general_spd` the weights `M`, `N` are random dense SPD matrices, else
/// identities.
pub fn random_sqd(m: usize, n: usize, general_spd: bool, seed: u64) -> Result<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let a = SparseMatrix::from_dense(&a)?;
    let system = if general_spd {
        let mm = random_spd(m, 0.5, &mut rng);
        let nn = random_spd(n, 0.5, &mut rng);
        SqdSystem::new(SpdOperator::dense(mm)?, SpdOperator::dense(nn)?, a)?
    } else {
        SqdSystem::with_identity(a)
    };
    let b = normal_vec(&mut rng, m);
    let c = normal_vec(&mut rng, n);
    Ok(Problem {
        name: format!("random-{m}x{n}-{seed}"),
        system,
        b,
        c,
    })
}
