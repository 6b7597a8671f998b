//! Seeded sampling helpers. Everything downstream of a fixed seed is
//! bit-reproducible, including under the parallel feature (work is split by
//! index, never by thread).

use crate::algebra::{AlgebraElement, AlgebraLevel};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream for a work item; used so parallel loops do
/// not share a generator.
pub fn stream_rng(seed: u64, stream: u64) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal via Box-Muller.
pub fn gaussian(rng: &mut Prng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vec(n: usize, rng: &mut Prng) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Prng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random element with independent standard normal coefficients.
pub fn random_element(level: AlgebraLevel, rng: &mut Prng) -> AlgebraElement {
    AlgebraElement::new(level, gaussian_vec(level.dim(), rng)).unwrap()
}

/// Random unit imaginary element, suitable as a complex-structure generator.
pub fn random_imaginary_unit(level: AlgebraLevel, rng: &mut Prng) -> AlgebraElement {
    loop {
        let x = random_element(level, rng).imaginary_part();
        if x.norm() > 1e-6 {
            return x.normalized();
        }
    }
}

/// Random m x k matrix with orthonormal columns (QR of a Gaussian matrix,
/// signs fixed so the factorization is deterministic).
pub fn random_orthonormal_frame(m: usize, k: usize, rng: &mut Prng) -> DMatrix<f64> {
    assert!(k <= m);
    loop {
        let a = gaussian_matrix(m, k, rng);
        let qr = a.clone().qr();
        let mut q = qr.q();
        let r = qr.r();
        let mut ok = true;
        for j in 0..k {
            if r[(j, j)].abs() < 1e-10 {
                ok = false;
                break;
            }
            if r[(j, j)] < 0.0 {
                for i in 0..m {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if ok {
            return q;
        }
    }
}
