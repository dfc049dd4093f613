//! Geometry of `M = R^n0 x P_n1 x ... x P_nd` with the metric
//! `<X, Y>_x = tr(x^-1 X x^-1 Y)` on each PD factor.
//!
//! Square roots, logarithms and exponentials all go through Hermitian
//! eigendecompositions; each point caches `x^{1/2}` and `x^{-1/2}`.

mod boundary;

pub use boundary::{BoundaryCertificate, FlagWeights};
pub use crate::spectral_convex::TangentBlock;

use crate::spectral_convex::{qr_positive, EighResult, HermitianBlock, Signature};
use crate::{Error, Result};

/// Relative tolerance on the smallest eigenvalue of validated PD blocks.
pub const PD_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
struct BlockFactors {
    eig: EighResult,
    sqrt: HermitianBlock,
    inv_sqrt: HermitianBlock,
}

impl BlockFactors {
    fn of(eig: EighResult) -> Self {
        let sqrt = eig.map(f64::sqrt);
        let inv_sqrt = eig.map(|v| 1.0 / v.sqrt());
        Self { eig, sqrt, inv_sqrt }
    }
}

/// A point of the product manifold. PD blocks are stored together with their
/// eigendecomposition and square-root factors.
#[derive(Clone, Debug)]
pub struct ProductPDPoint {
    euclid: Vec<f64>,
    blocks: Vec<HermitianBlock>,
    factors: Vec<BlockFactors>,
}

impl PartialEq for ProductPDPoint {
    fn eq(&self, other: &Self) -> bool {
        self.euclid == other.euclid && self.blocks == other.blocks
    }
}

impl ProductPDPoint {
    /// Validates positive definiteness: `min eig > 1e-12 * max eig`.
    pub fn new(euclid: Vec<f64>, blocks: Vec<HermitianBlock>) -> Result<Self> {
        Self::build(euclid, blocks, PD_TOL)
    }

    pub fn from_blocks(blocks: Vec<HermitianBlock>) -> Result<Self> {
        Self::new(Vec::new(), blocks)
    }

    /// Internal constructor for points produced by the geometry itself
    /// (positive by construction); only strict positivity is required.
    fn from_computed(euclid: Vec<f64>, blocks: Vec<HermitianBlock>) -> Result<Self> {
        Self::build(euclid, blocks, 0.0)
    }

    fn build(euclid: Vec<f64>, blocks: Vec<HermitianBlock>, rel_tol: f64) -> Result<Self> {
        if euclid.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Euclidean coordinate of point".into()));
        }
        let mut factors = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let eig = b.eigh();
            let max_eig = eig.values[0];
            let min_eig = *eig.values.last().expect("nonempty block");
            if !(min_eig.is_finite() && max_eig.is_finite()) {
                return Err(Error::NonFinite("eigenvalue of PD block".into()));
            }
            if !(min_eig > rel_tol * max_eig && min_eig > 0.0) {
                return Err(Error::NotPositiveDefinite { min_eig, max_eig });
            }
            factors.push(BlockFactors::of(eig));
        }
        Ok(Self { euclid, blocks, factors })
    }

    /// The base point `(0, I, ..., I)`.
    pub fn base(sig: &Signature) -> Self {
        let blocks: Vec<HermitianBlock> = sig.block_dims.iter().map(|&n| HermitianBlock::identity(n)).collect();
        Self::new(vec![0.0; sig.euclid_dim], blocks).expect("identity is positive definite")
    }

    pub fn signature(&self) -> Signature {
        Signature::new(self.euclid.len(), self.blocks.iter().map(|b| b.dim()).collect())
    }

    pub fn euclid(&self) -> &[f64] {
        &self.euclid
    }

    pub fn blocks(&self) -> &[HermitianBlock] {
        &self.blocks
    }

    pub fn block_eigh(&self, i: usize) -> &EighResult {
        &self.factors[i].eig
    }

    pub fn sqrt_block(&self, i: usize) -> &HermitianBlock {
        &self.factors[i].sqrt
    }

    pub fn inv_sqrt_block(&self, i: usize) -> &HermitianBlock {
        &self.factors[i].inv_sqrt
    }

    /// Largest condition number over the PD blocks.
    pub fn condition_number(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.eig.values[0] / f.eig.values.last().unwrap())
            .fold(1.0, f64::max)
    }

    fn check_tangent(&self, h: &TangentBlock) -> Result<()> {
        h.check_signature(&self.signature())
    }
}

fn check_same_signature(x: &ProductPDPoint, y: &ProductPDPoint) -> Result<()> {
    if x.signature() != y.signature() {
        return Err(Error::DimensionMismatch(format!("points with signatures {:?} and {:?}", x.signature(), y.signature())));
    }
    Ok(())
}

/// `x^{1/2} exp(t x^{-1/2} H x^{-1/2}) x^{1/2}` per block, `y + t v` on the
/// flat factor. `h` is a tangent vector at `x`.
pub fn geodesic(x: &ProductPDPoint, h: &TangentBlock, t: f64) -> Result<ProductPDPoint> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("geodesic time {t}")));
    }
    x.check_tangent(h)?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    let euclid = x.euclid.iter().zip(&h.euclid).map(|(a, b)| a + t * b).collect();
    let blocks = h
        .blocks
        .iter()
        .enumerate()
        .map(|(i, hb)| {
            let m = hb.congruence(x.inv_sqrt_block(i));
            m.map_spectrum(|v| (t * v).exp()).congruence(x.sqrt_block(i))
        })
        .collect();
    ProductPDPoint::from_computed(euclid, blocks)
}

/// Velocity of `s -> geodesic(x, h, s)` at `s = t`, a tangent vector there.
pub fn geodesic_velocity(x: &ProductPDPoint, h: &TangentBlock, t: f64) -> Result<TangentBlock> {
    x.check_tangent(h)?;
    let blocks = h
        .blocks
        .iter()
        .enumerate()
        .map(|(i, hb)| {
            let m = hb.congruence(x.inv_sqrt_block(i));
            // M e^{tM} = e^{tM/2} M e^{tM/2}
            m.map_spectrum(|v| v * (t * v).exp()).congruence(x.sqrt_block(i))
        })
        .collect();
    Ok(TangentBlock::new(h.euclid.clone(), blocks))
}

/// `x^{-1/2} H x^{-1/2}`: parallel transport of a tangent vector from `x`
/// to the base point.
pub fn transport_to_base(x: &ProductPDPoint, h: &TangentBlock) -> Result<TangentBlock> {
    x.check_tangent(h)?;
    Ok(TangentBlock::new(
        h.euclid.clone(),
        h.blocks.iter().enumerate().map(|(i, b)| b.congruence(x.inv_sqrt_block(i))).collect(),
    ))
}

/// `x^{1/2} H x^{1/2}`: inverse of [`transport_to_base`].
pub fn transport_from_base(x: &ProductPDPoint, h: &TangentBlock) -> Result<TangentBlock> {
    x.check_tangent(h)?;
    Ok(TangentBlock::new(
        h.euclid.clone(),
        h.blocks.iter().enumerate().map(|(i, b)| b.congruence(x.sqrt_block(i))).collect(),
    ))
}

/// `x^{1/2} D x^{1/2}`: transport of a covector at `x` to the base point, so
/// that pairings with transported vectors are preserved.
pub fn covector_to_base(x: &ProductPDPoint, d: &TangentBlock) -> Result<TangentBlock> {
    transport_from_base(x, d)
}

/// `x^{-1/2} D x^{-1/2}`: a base covector carried back to `x`.
pub fn covector_from_base(x: &ProductPDPoint, d: &TangentBlock) -> Result<TangentBlock> {
    transport_to_base(x, d)
}

/// Norm of a tangent vector at `x`.
pub fn riemannian_norm(x: &ProductPDPoint, h: &TangentBlock) -> Result<f64> {
    Ok(transport_to_base(x, h)?.norm())
}

/// Principal logarithm per block: the tangent vector at the base point whose
/// geodesic reaches `x` at time 1.
pub fn log_map(x: &ProductPDPoint) -> TangentBlock {
    TangentBlock::new(x.euclid.clone(), x.factors.iter().map(|f| f.eig.map(f64::ln)).collect())
}

/// Inverse of `geodesic(x, ., 1)`: a tangent vector at `x` pointing to `y`.
pub fn log_map_at(x: &ProductPDPoint, y: &ProductPDPoint) -> Result<TangentBlock> {
    check_same_signature(x, y)?;
    let euclid = y.euclid.iter().zip(&x.euclid).map(|(a, b)| a - b).collect();
    let blocks = y
        .blocks
        .iter()
        .enumerate()
        .map(|(i, yb)| yb.congruence(x.inv_sqrt_block(i)).map_spectrum(f64::ln).congruence(x.sqrt_block(i)))
        .collect();
    Ok(TangentBlock::new(euclid, blocks))
}

/// Riemannian distance: `|log(x^{-1/2} y x^{-1/2})|_F` per block and the
/// Euclidean distance on the flat factor, combined in quadrature.
pub fn distance(x: &ProductPDPoint, y: &ProductPDPoint) -> Result<f64> {
    check_same_signature(x, y)?;
    let mut total: f64 = x.euclid.iter().zip(&y.euclid).map(|(a, b)| (a - b) * (a - b)).sum();
    for (i, yb) in y.blocks.iter().enumerate() {
        let vals = yb.congruence(x.inv_sqrt_block(i)).eigh().values;
        total += vals.iter().map(|v| v.ln().powi(2)).sum::<f64>();
    }
    Ok(total.sqrt())
}

/// Normal form of the asymptotic class of `t -> geodesic(x, h, t)`.
///
/// Per block: `x^{-1/2} H x^{-1/2} = u diag(λ) u^†` with `λ` nonincreasing,
/// `x^{1/2} u = k b` (QR, positive diagonal); the ray
/// `t -> exp(t k diag(λ) k^†)` from the base point stays at bounded distance.
pub fn asymptotic_at_base(x: &ProductPDPoint, h: &TangentBlock) -> Result<BoundaryCertificate> {
    x.check_tangent(h)?;
    if h.norm() == 0.0 {
        return Err(Error::Degenerate("zero direction has no asymptotic class".into()));
    }
    let blocks = h
        .blocks
        .iter()
        .enumerate()
        .map(|(i, hb)| {
            let eig = hb.congruence(x.inv_sqrt_block(i)).eigh();
            let g = x.sqrt_block(i).as_matrix() * &eig.basis;
            let (k, _) = qr_positive(&g);
            FlagWeights { basis: k, weights: eig.values }
        })
        .collect();
    Ok(BoundaryCertificate { euclid_dir: h.euclid.clone(), blocks })
}
