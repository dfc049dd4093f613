use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::{CMat, Error, Result};

/// Relative tolerance of the Hermitian-symmetry check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// An `n x n` complex Hermitian matrix.
///
/// The stored matrix is always exactly Hermitian: inputs that pass the
/// symmetry check are replaced by `(H + H^†) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianBlock {
    m: CMat,
}

/// Eigendecomposition `H = basis * diag(values) * basis^†` with `values`
/// sorted nonincreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct EighResult {
    pub values: Vec<f64>,
    pub basis: CMat,
}

fn symmetrize(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    })
}

impl HermitianBlock {
    /// Validates `m` against the symmetry invariant
    /// `max |H_ij - conj(H_ji)| <= 1e-12 (1 + max |H|)`.
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian block must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch("Hermitian block of dimension 0".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian block entry".into()));
        }
        let n = m.nrows();
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        let tolerance = HERMITIAN_TOL * (1.0 + scale);
        if asym > tolerance {
            return Err(Error::NotHermitian { asymmetry: asym, tolerance });
        }
        Ok(Self { m: symmetrize(&m) })
    }

    /// Symmetrizes `m` without validation. Used for matrices Hermitian by
    /// construction (products like `A A^†`, `x^{1/2} y x^{1/2}`).
    pub fn from_matrix_unchecked(m: CMat) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m: symmetrize(&m) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: CMat::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n) }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self { m: CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(d[i], 0.0) } else { Complex64::new(0.0, 0.0) }) }
    }

    /// `k * diag(d) * k^†`.
    pub fn from_spectral(basis: &CMat, d: &[f64]) -> Self {
        let n = d.len();
        let mut scaled = basis.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= d[j];
            }
        }
        Self::from_matrix_unchecked(&scaled * basis.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// Real Frobenius pairing `Re tr(A B)`.
    pub fn inner(&self, other: &HermitianBlock) -> f64 {
        // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: self.m.map(|z| z * c) }
    }

    pub fn add(&self, other: &HermitianBlock) -> Self {
        Self { m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &HermitianBlock) -> Self {
        Self { m: &self.m - &other.m }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &HermitianBlock) -> Self {
        Self { m: &self.m + other.m.map(|z| z * c) }
    }

    /// `k H k^†`.
    pub fn conjugate_by(&self, k: &CMat) -> Self {
        Self::from_matrix_unchecked(k * &self.m * k.adjoint())
    }

    /// `a H a` for Hermitian `a` (congruence by a Hermitian factor).
    pub fn congruence(&self, a: &HermitianBlock) -> Self {
        Self::from_matrix_unchecked(&a.m * &self.m * &a.m)
    }

    pub fn eigh(&self) -> EighResult {
        eigh_matrix(&self.m)
    }

    /// Applies a scalar function to the spectrum: `k diag(f(λ)) k^†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        self.eigh().map(f)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigh().values.last().expect("nonempty block")
    }
}

impl EighResult {
    pub fn reconstruct(&self) -> HermitianBlock {
        HermitianBlock::from_spectral(&self.basis, &self.values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianBlock {
        let d: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        HermitianBlock::from_spectral(&self.basis, &d)
    }
}

/// Eigendecomposition of a Hermitian matrix with nonincreasing eigenvalues
/// and phase-canonical eigenvectors (first non-negligible component real
/// positive).
pub fn eigh_matrix(m: &CMat) -> EighResult {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut basis = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let scale = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let lead = col.iter().find(|z| z.norm() > 1e-8 * scale).copied().unwrap_or(Complex64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        for i in 0..n {
            basis[(i, dst)] = col[i] * phase;
        }
    }
    EighResult { values, basis }
}

/// QR factorization `g = k b` with `k` unitary and `b` upper triangular with
/// positive real diagonal.
pub fn qr_positive(g: &CMat) -> (CMat, CMat) {
    let n = g.nrows();
    let qr = g.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        let d = r[(i, i)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        // g = q r = (q D)(D^† r) with D = diag(phase)
        for row in 0..n {
            q[(row, i)] *= phase;
        }
        for col in 0..n {
            r[(i, col)] *= phase.conj();
        }
    }
    (q, r)
}

/// `max |k^† k - I|`.
pub fn unitarity_defect(k: &CMat) -> f64 {
    let n = k.ncols();
    let p = k.adjoint() * k;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, seeded_rng};

    #[test]
    fn identity_eigh() {
        let r = HermitianBlock::identity(3).eigh();
        assert_eq!(r.values, vec![1.0, 1.0, 1.0]);
        assert!((&r.basis - CMat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn diagonal_eigh_sorts_and_permutes() {
        let r = HermitianBlock::from_real_diagonal(&[1.0, 3.0, 2.0]).eigh();
        assert_eq!(r.values, vec![3.0, 2.0, 1.0]);
        for j in 0..3 {
            let col = r.basis.column(j);
            let ones = col.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-14).count();
            assert_eq!(ones, 1);
        }
        assert!((r.basis[(1, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = seeded_rng(7);
        for _ in 0..20 {
            let h = random_hermitian(5, &mut rng);
            let r = h.eigh();
            assert!(unitarity_defect(&r.basis) < 1e-10);
            let back = r.reconstruct();
            let rel = back.sub(&h).frobenius_norm() / h.frobenius_norm();
            assert!(rel < 1e-10, "residual {rel}");
            assert!(r.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigh_is_deterministic() {
        let mut rng = seeded_rng(3);
        let h = random_hermitian(4, &mut rng);
        assert_eq!(h.eigh(), h.eigh());
    }

    #[test]
    fn non_hermitian_rejected_with_magnitude() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = Complex64::new(0.5, 0.0);
        match HermitianBlock::new(m) {
            Err(Error::NotHermitian { asymmetry, .. }) => assert!((asymmetry - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn qr_positive_diagonal() {
        let mut rng = seeded_rng(11);
        let g = crate::random::random_complex_matrix(4, 4, &mut rng);
        let (k, b) = qr_positive(&g);
        assert!(unitarity_defect(&k) < 1e-12);
        for i in 0..4 {
            assert!(b[(i, i)].re > 0.0 && b[(i, i)].im.abs() < 1e-14);
            for j in 0..i {
                assert!(b[(i, j)].norm() < 1e-14);
            }
        }
        assert!((&k * &b - &g).norm() < 1e-12);
    }
}
