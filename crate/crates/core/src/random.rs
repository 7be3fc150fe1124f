//! Seeded random states, unitaries and stochastic matrices.
//!
//! Everything is driven by [`ChaCha8Rng`] so that a `u64` seed fully determines the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::qstate::{CMatrix, CVector, DensityMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic per-task seed derived from a base seed and an index (splitmix64 mix).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng)).normalize()
}

pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::pure(&haar_vector(dim, rng))
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction on `R`'s diagonal.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    isometry(dim, dim, rng)
}

/// Random isometry `cols → rows` (orthonormal columns); requires `rows >= cols`.
pub fn isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rows, cols, rng);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..cols {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank random state (Hilbert-Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    random_density_with_rank(dim, dim, rng)
}

pub fn random_density_with_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_trusted(m / tr)
}

/// Flat-Dirichlet probability vector.
pub fn dirichlet<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Row-stochastic matrix `p(b|a)`, one Dirichlet row per input symbol.
pub fn stochastic_matrix<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..inputs).map(|_| dirichlet(outputs, rng)).collect()
}
