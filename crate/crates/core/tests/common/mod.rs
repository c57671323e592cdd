#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sympeig::symplectic::{generate, Generator, SymplecticMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(q: usize, rng: &mut ChaCha8Rng, scale: f64) -> DVector<f64> {
    DVector::from_fn(q, |_, _| rng.random_range(-scale..scale))
}

/// `m × n` matrix of rank at most `rank` with entries of order one.
pub fn random_rank_deficient(m: usize, n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, rank, |_, _| rng.random_range(-1.0..1.0));
    let b = DMatrix::from_fn(rank, n, |_, _| rng.random_range(-1.0..1.0));
    a * b
}

pub fn random_symplectic(q: usize, seed: u64, factors: usize) -> SymplecticMatrix {
    generate(&Generator::Random {
        q,
        seed,
        n_factors: factors,
    })
    .unwrap()
}

/// Random matrix whose `F` block is well conditioned.
pub fn random_with_invertible_f(q: usize, seed: u64) -> SymplecticMatrix {
    for k in 0.. {
        let m = random_symplectic(q, seed.wrapping_mul(7919).wrapping_add(k), 4);
        let sv = sympeig::subspace::singular_values(&m.f());
        if sv[q - 1] > 0.2 && sv[0] < 5.0 {
            return m;
        }
    }
    unreachable!()
}

/// Orthogonal matrix from the Cayley transform of a skew matrix; built
/// without the library's generator.
pub fn cayley_orthogonal(q: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(q, q, |_, _| rng.random_range(-1.0..1.0));
    let k = &a - a.transpose();
    let id = DMatrix::<f64>::identity(q, q);
    (&id - &k).try_inverse().unwrap() * (&id + &k)
}

/// `[[a, b], [c, d]]` assembled by hand.
pub fn block(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let q = a.nrows();
    let mut w = DMatrix::zeros(2 * q, 2 * q);
    w.view_mut((0, 0), (q, q)).copy_from(a);
    w.view_mut((0, q), (q, q)).copy_from(b);
    w.view_mut((q, 0), (q, q)).copy_from(c);
    w.view_mut((q, q), (q, q)).copy_from(d);
    w
}

/// `[[I/√2, I/√2], [−I/√2, I/√2]]`: equal mixing of position and momentum.
pub fn mixing(q: usize) -> SymplecticMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let id = DMatrix::<f64>::identity(q, q) * s;
    SymplecticMatrix::new(block(&id, &id, &(-&id), &id)).unwrap()
}

/// Relative Frobenius distance.
pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}
