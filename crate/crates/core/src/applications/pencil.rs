use rand::Rng;

use crate::random::{random_complex_matrix, seeded_rng};
use crate::tensor_action::DenseTensor;
use crate::{CMat, Complex64, Error, Result};

/// Relative singular-value threshold for numerical ranks.
pub const RANK_TOL: f64 = 1e-10;

/// A linear symbolic matrix `A = sum_k A_k x_k` with `n x n` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPencil {
    n: usize,
    matrices: Vec<CMat>,
}

impl MatrixPencil {
    pub fn new(matrices: Vec<CMat>) -> Result<Self> {
        let n = matrices.first().map(|a| a.nrows()).ok_or_else(|| Error::Parameter("pencil needs at least one matrix".into()))?;
        if n == 0 {
            return Err(Error::DimensionMismatch("pencil matrices must be nonempty".into()));
        }
        for (k, a) in matrices.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch(format!("matrix {k} is {}x{}, expected {n}x{n}", a.nrows(), a.ncols())));
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(format!("pencil matrix {k}")));
            }
        }
        if matrices.iter().all(|a| a.iter().all(|z| *z == Complex64::new(0.0, 0.0))) {
            return Err(Error::Degenerate("all pencil matrices are zero".into()));
        }
        Ok(Self { n, matrices })
    }

    /// `x_1 I_n`.
    pub fn identity(n: usize) -> Self {
        Self { n, matrices: vec![CMat::identity(n, n)] }
    }

    /// `[[0, x1, x2], [-x1, 0, x3], [-x2, -x3, 0]]`.
    pub fn skew3() -> Self {
        let mut mats = Vec::new();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut a = CMat::zeros(3, 3);
            a[(i, j)] = Complex64::new(1.0, 0.0);
            a[(j, i)] = Complex64::new(-1.0, 0.0);
            mats.push(a);
        }
        Self { n: 3, matrices: mats }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    /// The `n x n x m` tensor with entries `(A_k)_{ij}` at `(i, j, k)`.
    pub fn to_tensor(&self) -> DenseTensor {
        DenseTensor::from_fn(&[self.n, self.n, self.m()], |idx| self.matrices[idx[2]][(idx[0], idx[1])])
    }

    pub fn from_tensor(t: &DenseTensor) -> Result<Self> {
        let d = t.dims();
        if d.len() != 3 || d[0] != d[1] {
            return Err(Error::DimensionMismatch(format!("pencil tensor must be n x n x m, got {d:?}")));
        }
        let mats = (0..d[2]).map(|k| CMat::from_fn(d[0], d[0], |i, j| t.get(&[i, j, k]))).collect();
        Self::new(mats)
    }

    /// `(L A_1 R, ..., L A_m R)`.
    pub fn transform(&self, l: &CMat, r: &CMat) -> Self {
        Self { n: self.n, matrices: self.matrices.iter().map(|a| l * a * r).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrices.iter().map(|a| a.norm_squared()).sum::<f64>().sqrt()
    }
}

pub(crate) fn numerical_rank(m: &CMat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let s = m.singular_values();
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > RANK_TOL * top).count()
}

/// Dimensions of the common kernels `∩ ker A_k` (right) and `∩ ker A_k^†`
/// (left).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelCheck {
    pub left_kernel_dim: usize,
    pub right_kernel_dim: usize,
}

impl KernelCheck {
    /// The nc-rank formula needs one of the two common kernels trivial.
    pub fn is_ok(&self) -> bool {
        self.left_kernel_dim == 0 || self.right_kernel_dim == 0
    }
}

pub fn check_common_kernel(a: &MatrixPencil) -> KernelCheck {
    let n = a.n;
    let m = a.m();
    let mut right = CMat::zeros(n * m, n);
    let mut left = CMat::zeros(n * m, n);
    for (k, ak) in a.matrices.iter().enumerate() {
        right.view_mut((k * n, 0), (n, n)).copy_from(ak);
        left.view_mut((k * n, 0), (n, n)).copy_from(&ak.adjoint());
    }
    KernelCheck { left_kernel_dim: n - numerical_rank(&left), right_kernel_dim: n - numerical_rank(&right) }
}

/// Independent nc-rank oracle: `rank(sum_k A_k ⊗ T_k) / d` for Gaussian
/// `d x d` substitutions `T_k`, rounded, maximized over three seeds.
pub fn ncrank_blowup_oracle(a: &MatrixPencil, d: usize, seed: u64) -> usize {
    let nd = a.n * d;
    (0..3u64)
        .map(|s| {
            let mut rng = seeded_rng(seed.wrapping_mul(3).wrapping_add(s));
            let mut b = CMat::zeros(nd, nd);
            for ak in &a.matrices {
                let t = random_complex_matrix(d, d, &mut rng);
                b += ak.kronecker(&t);
            }
            (numerical_rank(&b) as f64 / d as f64).round() as usize
        })
        .max()
        .unwrap_or(0)
}

/// Random pencil `A_k = L^T M_k R` where every `M_k` vanishes on a common
/// `a x b` top-left block (`a, b <= n-1`), so that `ncrk <= 2n - a - b`.
/// Instances with a nontrivial common kernel on either side are rejected
/// and redrawn.
pub fn random_pencil(n: usize, m: usize, seed: u64) -> Result<MatrixPencil> {
    if n == 0 || m == 0 {
        return Err(Error::Parameter(format!("pencil size must be positive, got n={n}, m={m}")));
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..1000 {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let l = random_complex_matrix(n, n, &mut rng);
        let r = random_complex_matrix(n, n, &mut rng);
        let mats: Vec<CMat> = (0..m)
            .map(|_| {
                let mut mk = random_complex_matrix(n, n, &mut rng);
                for i in 0..a {
                    for j in 0..b {
                        mk[(i, j)] = Complex64::new(0.0, 0.0);
                    }
                }
                l.transpose() * mk * &r
            })
            .collect();
        let p = MatrixPencil { n, matrices: mats };
        let kc = check_common_kernel(&p);
        if kc.left_kernel_dim == 0 && kc.right_kernel_dim == 0 {
            return Ok(p);
        }
    }
    Err(Error::Degenerate(format!("no kernel-free pencil found for n={n}, m={m}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_examples() {
        assert_eq!(ncrank_blowup_oracle(&MatrixPencil::identity(2), 2, 0), 2);
        let mut e = CMat::zeros(3, 3);
        e[(0, 1)] = Complex64::new(1.0, 0.0);
        assert_eq!(ncrank_blowup_oracle(&MatrixPencil::new(vec![e]).unwrap(), 3, 0), 1);
        assert_eq!(ncrank_blowup_oracle(&MatrixPencil::skew3(), 3, 0), 3);
    }

    #[test]
    fn kernel_examples() {
        assert!(check_common_kernel(&MatrixPencil::identity(3)).is_ok());
        let mut e = CMat::zeros(2, 2);
        e[(0, 0)] = Complex64::new(1.0, 0.0);
        let kc = check_common_kernel(&MatrixPencil::new(vec![e]).unwrap());
        assert_eq!(kc, KernelCheck { left_kernel_dim: 1, right_kernel_dim: 1 });
        assert!(!kc.is_ok());
        for seed in 0..5 {
            assert!(check_common_kernel(&random_pencil(3, 2, seed).unwrap()).is_ok());
        }
    }

    #[test]
    fn tensor_roundtrip() {
        let p = random_pencil(3, 2, 7).unwrap();
        let t = p.to_tensor();
        assert_eq!(t.get(&[1, 2, 1]), p.matrices()[1][(1, 2)]);
        assert_eq!(MatrixPencil::from_tensor(&t).unwrap(), p);
    }

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(random_pencil(4, 3, 9).unwrap(), random_pencil(4, 3, 9).unwrap());
    }
}
