use crate::spectral_convex::hermitian::unitarity_defect;
use crate::spectral_convex::{HermitianBlock, Signature, TangentBlock};
use crate::{CMat, Error, Result};

/// One PD factor of a boundary point: a unitary basis whose leading columns
/// span a flag, with nonincreasing weights.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagWeights {
    pub basis: CMat,
    pub weights: Vec<f64>,
}

/// A point at infinity of the product manifold in flag + weight form. The
/// associated base direction is `Y = (euclid_dir, k_i diag(λ_i) k_i^†)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCertificate {
    pub euclid_dir: Vec<f64>,
    pub blocks: Vec<FlagWeights>,
}

impl FlagWeights {
    pub fn to_block(&self) -> HermitianBlock {
        HermitianBlock::from_spectral(&self.basis, &self.weights)
    }
}

impl BoundaryCertificate {
    pub fn zero(sig: &Signature) -> Self {
        Self {
            euclid_dir: vec![0.0; sig.euclid_dim],
            blocks: sig
                .block_dims
                .iter()
                .map(|&n| FlagWeights { basis: CMat::identity(n, n), weights: vec![0.0; n] })
                .collect(),
        }
    }

    /// Reads `(k, λ)` off an eigendecomposition of each block of `y`.
    pub fn from_tangent(y: &TangentBlock) -> Self {
        Self {
            euclid_dir: y.euclid.clone(),
            blocks: y
                .blocks
                .iter()
                .map(|b| {
                    let e = b.eigh();
                    FlagWeights { basis: e.basis, weights: e.values }
                })
                .collect(),
        }
    }

    pub fn to_tangent(&self) -> TangentBlock {
        TangentBlock::new(self.euclid_dir.clone(), self.blocks.iter().map(FlagWeights::to_block).collect())
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.euclid_dir.len(), self.blocks.iter().map(|b| b.weights.len()).collect())
    }

    /// Positive rescaling of the weights (boundary points are rays, so this
    /// moves along the cone over the boundary).
    pub fn scale(&self, c: f64) -> Self {
        Self {
            euclid_dir: self.euclid_dir.iter().map(|v| v * c).collect(),
            blocks: self
                .blocks
                .iter()
                .map(|b| FlagWeights { basis: b.basis.clone(), weights: b.weights.iter().map(|w| w * c).collect() })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.euclid_dir.iter().all(|v| *v == 0.0) && self.blocks.iter().all(|b| b.weights.iter().all(|w| *w == 0.0))
    }

    /// Unitary bases (1e-10), nonincreasing finite weights, square shapes.
    pub fn validate(&self) -> Result<()> {
        if self.euclid_dir.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("certificate Euclidean direction".into()));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            let n = b.weights.len();
            if n == 0 || b.basis.nrows() != n || b.basis.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "certificate block {i}: basis {}x{} with {n} weights",
                    b.basis.nrows(),
                    b.basis.ncols()
                )));
            }
            if b.weights.iter().any(|w| !w.is_finite()) || b.basis.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(format!("certificate block {i}")));
            }
            if b.weights.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::Parameter(format!("certificate block {i}: weights must be nonincreasing")));
            }
            let defect = unitarity_defect(&b.basis);
            if defect > 1e-10 {
                return Err(Error::Parameter(format!("certificate block {i}: basis not unitary (defect {defect:.3e})")));
            }
        }
        Ok(())
    }
}
