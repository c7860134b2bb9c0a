//! Seeded random ensembles: Haar states and unitaries, Ginibre mixed states, GUE matrices.

use crate::linalg::{c64, CMatrix, CVector, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The single generator type used everywhere randomness is needed.
pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed, used to hand sub-tasks their own stream.
pub fn child_seed(rng: &mut impl Rng) -> u64 {
    rng.random()
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-random unit vector.
pub fn haar_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v / c64(norm, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with the diagonal phases of R removed.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density matrix `G G† / Tr` with `G` a `dim × rank` Ginibre matrix.
pub fn ginibre_density(dim: usize, rank: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    m / c64(tr, 0.0)
}

/// GUE-like Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}
