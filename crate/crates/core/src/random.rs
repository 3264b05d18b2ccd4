//! Seeded random matrices for generators and tests.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMat, GramMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex<R: Rng>(rng: &mut R) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex(rng))
}

/// Positive-definite Gram with eigenvalues roughly in `[0.3, 3]`.
pub fn pd_gram<R: Rng>(rng: &mut R, dim: usize) -> GramMatrix {
    let a = matrix(rng, dim, dim);
    let scale = 1.0 / (dim.max(1) as f64);
    let g = (&a * a.adjoint()).map(|z| z * scale) + CMat::identity(dim, dim).map(|z| z * 0.3);
    GramMatrix::from_hermitian(g)
}

/// Unitary times a positive diagonal in `[0.5, 2]`; condition number at most 4.
pub fn invertible<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    if dim == 0 {
        return CMat::zeros(0, 0);
    }
    let q = matrix(rng, dim, dim).qr().q();
    let d = CMat::from_fn(dim, dim, |i, j| {
        if i == j {
            c(rng.gen_range(0.5..2.0), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    q * d
}
