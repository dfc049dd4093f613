//! Seeded random instances: Gaussian matrices, Haar unitaries, density
//! matrices and positive-definite points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::spectral_convex::hermitian::{qr_positive, HermitianBlock};
use crate::CMat;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian (independent real and imaginary parts, each of
/// variance 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * gaussian(rng), s * gaussian(rng))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianBlock {
    let g = random_complex_matrix(n, n, rng);
    HermitianBlock::from_matrix_unchecked((&g + g.adjoint()).map(|z| z * 0.5))
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    qr_positive(&random_complex_matrix(n, n, rng)).0
}

/// Full-rank density matrix `G G^† / tr(G G^†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianBlock {
    let g = random_complex_matrix(n, n, rng);
    let p = HermitianBlock::from_matrix_unchecked(&g * g.adjoint());
    let t = p.trace();
    p.scale(1.0 / t)
}

/// Positive-definite matrix `exp(H)` with `H` Hermitian of entry scale `spread`.
pub fn random_pd<R: Rng + ?Sized>(n: usize, spread: f64, rng: &mut R) -> HermitianBlock {
    random_hermitian(n, rng).scale(spread).map_spectrum(f64::exp)
}
