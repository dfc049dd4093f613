use super::hermitian::HermitianBlock;
use super::oracle::Signature;
use crate::{Error, Result};

/// An element of `R^n0 x H_n1 x ... x H_nd`: a tangent vector or a covector.
///
/// The base point is implicit; functions taking a `TangentBlock` document
/// whether it lives at the identity base or at a given point `x`. The pairing
/// is `<y, x> + sum_i Re tr(Y_i X_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentBlock {
    pub euclid: Vec<f64>,
    pub blocks: Vec<HermitianBlock>,
}

impl TangentBlock {
    pub fn new(euclid: Vec<f64>, blocks: Vec<HermitianBlock>) -> Self {
        Self { euclid, blocks }
    }

    pub fn from_blocks(blocks: Vec<HermitianBlock>) -> Self {
        Self { euclid: Vec::new(), blocks }
    }

    pub fn zeros(sig: &Signature) -> Self {
        Self {
            euclid: vec![0.0; sig.euclid_dim],
            blocks: sig.block_dims.iter().map(|&n| HermitianBlock::zeros(n)).collect(),
        }
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.euclid.len(), self.blocks.iter().map(|b| b.dim()).collect())
    }

    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        let own = self.signature();
        if &own != sig {
            return Err(Error::DimensionMismatch(format!(
                "expected euclid {} blocks {:?}, got euclid {} blocks {:?}",
                sig.euclid_dim, sig.block_dims, own.euclid_dim, own.block_dims
            )));
        }
        Ok(())
    }

    pub fn pair(&self, other: &TangentBlock) -> f64 {
        let e: f64 = self.euclid.iter().zip(&other.euclid).map(|(a, b)| a * b).sum();
        e + self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.inner(b)).sum::<f64>()
    }

    /// Norm of the base pairing (Frobenius on blocks).
    pub fn norm(&self) -> f64 {
        self.pair(self).max(0.0).sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            euclid: self.euclid.iter().map(|v| v * c).collect(),
            blocks: self.blocks.iter().map(|b| b.scale(c)).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &TangentBlock) -> Self {
        Self {
            euclid: self.euclid.iter().zip(&other.euclid).map(|(a, b)| a + c * b).collect(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.axpy(c, b)).collect(),
        }
    }

    pub fn sub(&self, other: &TangentBlock) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn is_finite(&self) -> bool {
        self.euclid.iter().all(|v| v.is_finite())
            && self.blocks.iter().all(|b| b.as_matrix().iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Removes the trace part of every block (the flat direction of each
    /// full PD factor). Euclidean coordinates are kept.
    pub fn traceless(&self) -> Self {
        Self {
            euclid: self.euclid.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let n = b.dim();
                    b.axpy(-b.trace() / n as f64, &HermitianBlock::identity(n))
                })
                .collect(),
        }
    }
}
