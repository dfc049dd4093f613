//! Dense complex tensors, the `GL_n1 x ... x GL_nd` action, moment maps and
//! the Kempf–Ness function.

mod problem;

pub use problem::KempfNessProblem;

use num_complex::Complex64;

use crate::pd_geometry::{BoundaryCertificate, ProductPDPoint, TangentBlock};
use crate::spectral_convex::HermitianBlock;
use crate::{CMat, Error, Result};

/// Default support tolerance of the recession function, relative to the
/// largest entry of the rotated tensor.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Guard on `|det g_i|` for group elements.
pub const DET_GUARD: f64 = 1e-12;

/// A `d`-way complex array stored in row-major order (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<Complex64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("tensor dims must be nonempty and positive, got {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!("dims {dims:?} need {len} entries, got {}", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("tensor entry".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), data: vec![Complex64::new(0.0, 0.0); dims.iter().product()] }
    }

    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let mut t = Self::zeros(dims);
        let mut idx = vec![0; dims.len()];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        t
    }

    /// The unit tensor `<n> = sum_i e_i ⊗ ... ⊗ e_i` of order `d`.
    pub fn unit(n: usize, d: usize) -> Self {
        Self::from_fn(&vec![n; d], |idx| {
            if idx.iter().all(|&j| j == idx[0]) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `u_1 ⊗ ... ⊗ u_d`.
    pub fn rank_one(factors: &[Vec<Complex64>]) -> Self {
        let dims: Vec<usize> = factors.iter().map(|u| u.len()).collect();
        Self::from_fn(&dims, |idx| idx.iter().zip(factors).map(|(&j, u)| u[j]).product())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&j, &n)| acc * n + j)
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { dims: self.dims.clone(), data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `v / |v|`; errors on the zero tensor.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::Degenerate("zero tensor".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Hermitian inner product `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &DenseTensor) -> Complex64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    fn stride(&self, mode: usize) -> usize {
        self.dims[mode + 1..].iter().product()
    }

    /// Applies the matrix `a` (size `n_mode x n_mode`) along `mode`.
    pub fn mode_product(&self, mode: usize, a: &CMat) -> Result<Self> {
        let n = self.dims[mode];
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "mode {mode} has size {n}, matrix is {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let inner = self.stride(mode);
        let outer = self.data.len() / (n * inner);
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for o in 0..outer {
            let base = o * n * inner;
            for r in 0..n {
                let dst = base + r * inner;
                for c in 0..n {
                    let coeff = a[(r, c)];
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = base + c * inner;
                    for s in 0..inner {
                        out[dst + s] += coeff * self.data[src + s];
                    }
                }
            }
        }
        Ok(Self { dims: self.dims.clone(), data: out })
    }
}

/// An element of `GL_n1 x ... x GL_nd` (or of a sub-product acting on
/// selected modes).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    factors: Vec<CMat>,
}

impl GroupElement {
    /// Validates squareness and `|det g_i| > 1e-12`.
    pub fn new(factors: Vec<CMat>) -> Result<Self> {
        for (i, g) in factors.iter().enumerate() {
            if g.nrows() != g.ncols() || g.nrows() == 0 {
                return Err(Error::DimensionMismatch(format!("group factor {i} is {}x{}", g.nrows(), g.ncols())));
            }
            let det = g.determinant().norm();
            if !(det > DET_GUARD) {
                return Err(Error::Degenerate(format!("group factor {i} has |det| = {det:.3e}")));
            }
        }
        Ok(Self { factors })
    }

    pub(crate) fn from_factors_unchecked(factors: Vec<CMat>) -> Self {
        Self { factors }
    }

    pub fn identity(dims: &[usize]) -> Self {
        Self { factors: dims.iter().map(|&n| CMat::identity(n, n)).collect() }
    }

    pub fn factors(&self) -> &[CMat] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|g| g.nrows()).collect()
    }

    /// `x = g^† g` as a point of the product PD manifold.
    pub fn gram(&self) -> Result<ProductPDPoint> {
        ProductPDPoint::from_blocks(
            self.factors.iter().map(|g| HermitianBlock::from_matrix_unchecked(g.adjoint() * g)).collect(),
        )
    }
}

/// `(g_1, ..., g_d) · v`: `g_i` applied along mode `i`.
pub fn act(g: &GroupElement, v: &DenseTensor) -> Result<DenseTensor> {
    if g.factors.len() != v.order() {
        return Err(Error::DimensionMismatch(format!(
            "group element has {} factors, tensor has order {}",
            g.factors.len(),
            v.order()
        )));
    }
    act_on_modes(g.factors(), &(0..v.order()).collect::<Vec<_>>(), v)
}

/// Applies `mats[k]` along mode `modes[k]`.
pub fn act_on_modes(mats: &[CMat], modes: &[usize], v: &DenseTensor) -> Result<DenseTensor> {
    let mut w = v.clone();
    for (a, &mode) in mats.iter().zip(modes) {
        if mode >= v.order() {
            return Err(Error::DimensionMismatch(format!("mode {mode} out of range for order {}", v.order())));
        }
        w = w.mode_product(mode, a)?;
    }
    Ok(w)
}

/// Mode-`i` flattening: an `n_i x prod_{l != i} n_l` matrix with row `j_i`;
/// columns enumerate the remaining indices in row-major order.
pub fn flattening(v: &DenseTensor, mode: usize) -> CMat {
    let n = v.dims[mode];
    let inner = v.stride(mode);
    let outer = v.data.len() / (n * inner);
    let mut m = CMat::zeros(n, outer * inner);
    for o in 0..outer {
        for r in 0..n {
            let src = o * n * inner + r * inner;
            for s in 0..inner {
                m[(r, o * inner + s)] = v.data[src + s];
            }
        }
    }
    m
}

/// `μ_i = A_i A_i^† / |v|^2` for the listed modes.
pub fn moment_map_modes(v: &DenseTensor, modes: &[usize]) -> Result<Vec<HermitianBlock>> {
    let nsq = v.norm_sqr();
    if !(nsq > 0.0) {
        return Err(Error::Degenerate("moment map of the zero tensor".into()));
    }
    Ok(modes
        .iter()
        .map(|&i| {
            let a = flattening(v, i);
            HermitianBlock::from_matrix_unchecked((&a * a.adjoint()).map(|z| z / nsq))
        })
        .collect())
}

/// The moment map `(μ_1(v), ..., μ_d(v))`; each block is a density matrix.
pub fn moment_map(v: &DenseTensor) -> Result<Vec<HermitianBlock>> {
    moment_map_modes(v, &(0..v.order()).collect::<Vec<_>>())
}

/// Per-block spectra, nonincreasing.
pub fn spectrum(mu: &[HermitianBlock]) -> Vec<Vec<f64>> {
    mu.iter().map(|b| b.eigh().values).collect()
}

fn check_point_dims(v: &DenseTensor, x: &ProductPDPoint, modes: &[usize]) -> Result<()> {
    let sig = x.signature();
    let want: Vec<usize> = modes.iter().map(|&m| v.dims[m]).collect();
    if sig.euclid_dim != 0 || sig.block_dims != want {
        return Err(Error::DimensionMismatch(format!(
            "point signature (euclid {}, blocks {:?}) does not match tensor modes {:?}",
            sig.euclid_dim, sig.block_dims, want
        )));
    }
    Ok(())
}

fn sqrt_action(v: &DenseTensor, x: &ProductPDPoint, modes: &[usize]) -> Result<DenseTensor> {
    check_point_dims(v, x, modes)?;
    let mats: Vec<CMat> = (0..modes.len()).map(|i| x.sqrt_block(i).as_matrix().clone()).collect();
    act_on_modes(&mats, modes, v)
}

/// `log <v, x·v>` (natural log) where `x` acts on `modes`.
pub fn kempf_ness_modes(v: &DenseTensor, x: &ProductPDPoint, modes: &[usize]) -> Result<f64> {
    let w = sqrt_action(v, x, modes)?;
    let nsq = w.norm_sqr();
    if !(nsq > 0.0) {
        return Err(Error::Degenerate("Kempf–Ness function of the zero tensor".into()));
    }
    Ok(nsq.ln())
}

/// `Φ_v(x) = log <v, x·v>`.
pub fn kempf_ness(v: &DenseTensor, x: &ProductPDPoint) -> Result<f64> {
    kempf_ness_modes(v, x, &(0..v.order()).collect::<Vec<_>>())
}

/// Base-transported differential `μ(x^{1/2}·v)` restricted to `modes`.
pub fn kempf_ness_differential_modes(v: &DenseTensor, x: &ProductPDPoint, modes: &[usize]) -> Result<TangentBlock> {
    let w = sqrt_action(v, x, modes)?;
    Ok(TangentBlock::from_blocks(moment_map_modes(&w, modes)?))
}

/// `τ_{x→I} dΦ_v(x) = μ(x^{1/2}·v)`.
pub fn kempf_ness_differential(v: &DenseTensor, x: &ProductPDPoint) -> Result<TangentBlock> {
    kempf_ness_differential_modes(v, x, &(0..v.order()).collect::<Vec<_>>())
}

/// Recession function of the Kempf–Ness function on the given modes.
///
/// With `Y_i = k_i diag(λ_i) k_i^†`, rotate `w = (k_1^†, ..., k_d^†)·v` and
/// return the largest `sum_i λ_i[j_i]` over entries with
/// `|w_j| > support_tol * max |w|`.
pub fn recession_modes(v: &DenseTensor, xi: &BoundaryCertificate, modes: &[usize], support_tol: f64) -> Result<f64> {
    if xi.blocks.len() != modes.len() || !xi.euclid_dir.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "certificate with {} blocks (euclid {}) for {} active modes",
            xi.blocks.len(),
            xi.euclid_dir.len(),
            modes.len()
        )));
    }
    for (b, &m) in xi.blocks.iter().zip(modes) {
        if b.weights.len() != v.dims[m] || b.basis.nrows() != v.dims[m] {
            return Err(Error::DimensionMismatch(format!("certificate block for mode {m} has wrong size")));
        }
    }
    let mats: Vec<CMat> = xi.blocks.iter().map(|b| b.basis.adjoint()).collect();
    let w = act_on_modes(&mats, modes, v)?;
    let cutoff = support_tol * w.max_abs();
    // per-mode weight table; inactive modes contribute 0
    let mut lambda: Vec<Option<&[f64]>> = vec![None; v.order()];
    for (b, &m) in xi.blocks.iter().zip(modes) {
        lambda[m] = Some(&b.weights);
    }
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; v.order()];
    for z in w.data() {
        if z.norm() > cutoff {
            let s: f64 = idx.iter().enumerate().map(|(m, &j)| lambda[m].map_or(0.0, |l| l[j])).sum();
            best = best.max(s);
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < v.dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Internal("empty support in recession function".into()));
    }
    Ok(best)
}

/// `Φ_v^∞(ξ)` on all modes.
pub fn recession(v: &DenseTensor, xi: &BoundaryCertificate) -> Result<f64> {
    recession_modes(v, xi, &(0..v.order()).collect::<Vec<_>>(), SUPPORT_TOL)
}

/// `Φ_v^∞(Y)` for a base tangent direction `Y`.
pub fn recession_tangent(v: &DenseTensor, y: &TangentBlock) -> Result<f64> {
    recession(v, &BoundaryCertificate::from_tangent(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd_geometry::geodesic;
    use crate::random::{complex_gaussian, random_hermitian, random_pd, random_unitary, seeded_rng};
    use crate::spectral_convex::Signature;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn e(n: usize, i: usize) -> Vec<Complex64> {
        (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect()
    }

    fn random_tensor(dims: &[usize], seed: u64) -> DenseTensor {
        let mut rng = seeded_rng(seed);
        DenseTensor::from_fn(dims, |_| complex_gaussian(&mut rng))
    }

    #[test]
    fn identity_action_and_rank_one() {
        let v = random_tensor(&[2, 3, 2], 1);
        assert_eq!(act(&GroupElement::identity(&[2, 3, 2]), &v).unwrap(), v);
        let mut rng = seeded_rng(2);
        let us: Vec<Vec<Complex64>> = [2, 3].iter().map(|&n| (0..n).map(|_| complex_gaussian(&mut rng)).collect()).collect();
        let gs: Vec<CMat> = [2, 3].iter().map(|&n| crate::random::random_complex_matrix(n, n, &mut rng)).collect();
        let lhs = act(&GroupElement::new(gs.clone()).unwrap(), &DenseTensor::rank_one(&us)).unwrap();
        let moved: Vec<Vec<Complex64>> = us
            .iter()
            .zip(&gs)
            .map(|(u, g)| (g * nalgebra::DVector::from_vec(u.clone())).iter().copied().collect())
            .collect();
        let rhs = DenseTensor::rank_one(&moved);
        let err: f64 = lhs.data().iter().zip(rhs.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn flattening_examples() {
        let v = DenseTensor::rank_one(&[e(2, 0), e(2, 0)]);
        let f = flattening(&v, 0);
        assert_eq!(f[(0, 0)], c(1.0));
        assert!(f.iter().filter(|z| z.norm() > 0.0).count() == 1);
        assert!((flattening(&DenseTensor::unit(2, 2), 1) - CMat::identity(2, 2)).norm() < 1e-15);
        let v = random_tensor(&[3, 2, 4], 3);
        for m in 0..3 {
            assert!((flattening(&v, m).norm() - v.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn flattening_intertwines_action() {
        // flattening(g·v, i) = g_i A_i (⊗_{l≠i} g_l)^T
        let v = random_tensor(&[2, 3, 2], 4);
        let mut rng = seeded_rng(5);
        let gs: Vec<CMat> = [2, 3, 2].iter().map(|&n| crate::random::random_complex_matrix(n, n, &mut rng)).collect();
        let w = act(&GroupElement::new(gs.clone()).unwrap(), &v).unwrap();
        for i in 0..3 {
            let others: Vec<&CMat> = (0..3).filter(|&l| l != i).map(|l| &gs[l]).collect();
            let kron = others[0].kronecker(others[1]);
            let want = &gs[i] * flattening(&v, i) * kron.transpose();
            assert!((flattening(&w, i) - want).norm() < 1e-10);
        }
    }

    #[test]
    fn moment_map_examples() {
        let v = DenseTensor::rank_one(&[e(2, 0), e(3, 0), e(2, 0)]);
        for mu in moment_map(&v).unwrap() {
            assert!((mu.as_matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);
            assert!((mu.trace() - 1.0).abs() < 1e-15);
        }
        for mu in moment_map(&DenseTensor::unit(2, 3)).unwrap() {
            assert!(mu.sub(&HermitianBlock::identity(2).scale(0.5)).max_abs() < 1e-15);
        }
        assert!(moment_map(&DenseTensor::zeros(&[2, 2])).is_err());
    }

    #[test]
    fn moment_map_equivariance() {
        let v = random_tensor(&[3, 2, 2], 6);
        let mut rng = seeded_rng(7);
        let ks: Vec<CMat> = [3, 2, 2].iter().map(|&n| random_unitary(n, &mut rng)).collect();
        let mu = moment_map(&v).unwrap();
        let mu_k = moment_map(&act(&GroupElement::new(ks.clone()).unwrap(), &v).unwrap()).unwrap();
        for ((a, b), k) in mu.iter().zip(&mu_k).zip(&ks) {
            assert!(a.conjugate_by(k).sub(b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn kempf_ness_examples() {
        let v = random_tensor(&[2, 2], 8);
        let id = ProductPDPoint::base(&Signature::blocks(&[2, 2]));
        assert!((kempf_ness(&v, &id).unwrap() - v.norm_sqr().ln()).abs() < 1e-13);
        let v = DenseTensor::rank_one(&[e(2, 0), e(2, 0)]);
        let (a, b) = (3.0, 0.25);
        let x = ProductPDPoint::from_blocks(vec![
            HermitianBlock::from_real_diagonal(&[a, 1.0]),
            HermitianBlock::from_real_diagonal(&[b, 1.0]),
        ])
        .unwrap();
        assert!((kempf_ness(&v, &x).unwrap() - (a * b).ln()).abs() < 1e-14);
    }

    #[test]
    fn differential_scale_invariant_and_matches_fd() {
        let v = random_tensor(&[2, 3, 2], 9);
        let mut rng = seeded_rng(10);
        let x = ProductPDPoint::from_blocks([2, 3, 2].iter().map(|&n| random_pd(n, 0.5, &mut rng)).collect()).unwrap();
        let d1 = kempf_ness_differential(&v, &x).unwrap();
        let d2 = kempf_ness_differential(&v.scale(2.0), &x).unwrap();
        assert!(d1.sub(&d2).norm() < 1e-14);
        let h = TangentBlock::from_blocks([2, 3, 2].iter().map(|&n| random_hermitian(n, &mut rng)).collect());
        let eps = 1e-5;
        let fd = (kempf_ness(&v, &geodesic(&x, &h, eps).unwrap()).unwrap()
            - kempf_ness(&v, &geodesic(&x, &h, -eps).unwrap()).unwrap())
            / (2.0 * eps);
        let th = crate::pd_geometry::transport_to_base(&x, &h).unwrap();
        let analytic = d1.pair(&th);
        assert!((fd - analytic).abs() < 1e-6 * (1.0 + analytic.abs()));
    }

    #[test]
    fn recession_examples() {
        let v = DenseTensor::rank_one(&[e(2, 0), e(2, 0), e(2, 0)]);
        let y = TangentBlock::from_blocks(vec![
            HermitianBlock::from_real_diagonal(&[0.3, 1.0]),
            HermitianBlock::from_real_diagonal(&[-2.0, 0.5]),
            HermitianBlock::from_real_diagonal(&[0.7, 0.1]),
        ]);
        assert!((recession_tangent(&v, &y).unwrap() - (0.3 - 2.0 + 0.7)).abs() < 1e-14);
        let u = DenseTensor::unit(2, 3);
        let want = f64::max(0.3 - 2.0 + 0.7, 1.0 + 0.5 + 0.1);
        assert!((recession_tangent(&u, &y).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn recession_orientation_matches_limit() {
        // with nondiagonal Y, only the k^† rotation reproduces Φ(exp(tY))/t
        let v = random_tensor(&[2, 2], 11).normalized().unwrap();
        let mut rng = seeded_rng(12);
        let y = TangentBlock::from_blocks(vec![random_hermitian(2, &mut rng), random_hermitian(2, &mut rng)]);
        // exp(tY/2)·v directly: the PD point exp(tY) is too ill-conditioned to store
        let phi = |t: f64| {
            let mats: Vec<CMat> = y.blocks.iter().map(|b| b.scale(0.5 * t).map_spectrum(f64::exp).into_matrix()).collect();
            act_on_modes(&mats, &[0, 1], &v).unwrap().norm_sqr().ln()
        };
        // slope from two far points cancels the constant term
        let slope = (phi(60.0) - phi(40.0)) / 20.0;
        assert!((recession_tangent(&v, &y).unwrap() - slope).abs() < 1e-6);
    }

    #[test]
    fn group_element_guard() {
        assert!(GroupElement::new(vec![CMat::zeros(2, 2)]).is_err());
        assert!(GroupElement::new(vec![CMat::identity(2, 2)]).is_ok());
    }

    #[test]
    fn spectrum_sorts() {
        let s = spectrum(&[HermitianBlock::from_real_diagonal(&[0.3, 0.7])]);
        assert_eq!(s, vec![vec![0.7, 0.3]]);
    }
}
