//! Unitarily invariant convex functions on products of Hermitian matrices.
//!
//! A symmetric convex function `f` of concatenated spectra lifts to
//! `S(Y) = f(λ(Y_1), ..., λ(Y_d))`. Conjugates, subgradients and proximal maps
//! of `S` all reduce to those of `f` through one eigendecomposition per block.

pub mod hermitian;
pub mod oracle;
pub mod projection;
pub mod tangent;

use std::fmt;
use std::sync::Arc;

pub use hermitian::{eigh_matrix, qr_positive, EighResult, HermitianBlock};
pub use oracle::{
    Frobenius, IndicatorTraceBall, MoreauEnvelope, NegEntropyWeighted, OpNormMaxWeighted, Shifted, Signature,
    SymmetricFunction, TraceDistToUniform, TraceNormSumWeighted,
};
pub use tangent::TangentBlock;

use crate::{Error, Result};

/// Relative tolerance below which neighbouring eigenvalues count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Default Moreau parameter for nonsmooth objectives.
pub const DEFAULT_SMOOTHING: f64 = 0.1;

pub fn eigh(h: &HermitianBlock) -> EighResult {
    h.eigh()
}

/// A built-in objective and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveSpec {
    Frobenius,
    /// `max_i |Y_i|_op / alpha_i`.
    OpNormMaxWeighted { alpha: Vec<f64> },
    /// `sum_i alpha_i |Y_i|_tr`.
    TraceNormSumWeighted { alpha: Vec<f64> },
    /// `-sum_i theta_i H(Y_i)` in bits.
    NegEntropyWeighted { theta: Vec<f64> },
    /// `weight * sum_i |Y_i - I/n_i|_tr`.
    TraceDistToUniform { weight: f64 },
    /// Indicator of `sum_i |Y_i|_tr <= radius`.
    IndicatorTraceBall { radius: f64 },
}

impl ObjectiveSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Frobenius => "frobenius",
            Self::OpNormMaxWeighted { .. } => "op_norm_max_weighted",
            Self::TraceNormSumWeighted { .. } => "trace_norm_sum_weighted",
            Self::NegEntropyWeighted { .. } => "neg_entropy_weighted",
            Self::TraceDistToUniform { .. } => "trace_dist_to_uniform",
            Self::IndicatorTraceBall { .. } => "indicator_trace_ball",
        }
    }
}

/// The lifted objective `S` together with its vector oracle.
#[derive(Clone)]
pub struct SpectralObjective {
    oracle: Arc<dyn SymmetricFunction>,
    label: String,
}

impl fmt::Debug for SpectralObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralObjective")
            .field("label", &self.label)
            .field("signature", self.oracle.signature())
            .finish()
    }
}

/// Builds one of the built-in objectives on `sig`.
pub fn builtin_objective(spec: &ObjectiveSpec, sig: &Signature) -> Result<SpectralObjective> {
    let sig = sig.clone();
    let oracle: Arc<dyn SymmetricFunction> = match spec {
        ObjectiveSpec::Frobenius => Arc::new(Frobenius::new(sig)),
        ObjectiveSpec::OpNormMaxWeighted { alpha } => Arc::new(OpNormMaxWeighted::new(sig, alpha.clone())?),
        ObjectiveSpec::TraceNormSumWeighted { alpha } => Arc::new(TraceNormSumWeighted::new(sig, alpha.clone())?),
        ObjectiveSpec::NegEntropyWeighted { theta } => Arc::new(NegEntropyWeighted::new(sig, theta.clone())?),
        ObjectiveSpec::TraceDistToUniform { weight } => Arc::new(TraceDistToUniform::new(sig, *weight)?),
        ObjectiveSpec::IndicatorTraceBall { radius } => Arc::new(IndicatorTraceBall::new(sig, *radius)?),
    };
    Ok(SpectralObjective::new(oracle, spec.kind()))
}

/// Per-block eigendecompositions plus the concatenated spectral vector.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub euclid: Vec<f64>,
    pub eig: Vec<EighResult>,
}

impl SpectralDecomposition {
    pub fn of(y: &TangentBlock) -> Self {
        Self { euclid: y.euclid.clone(), eig: y.blocks.iter().map(|b| b.eigh()).collect() }
    }

    pub fn vector(&self) -> Vec<f64> {
        let mut p = self.euclid.clone();
        for e in &self.eig {
            p.extend_from_slice(&e.values);
        }
        p
    }

    /// Lifts a vector laid out like [`Self::vector`] back onto the bases.
    pub fn lift(&self, mu: &[f64]) -> TangentBlock {
        let e0 = self.euclid.len();
        let mut offset = e0;
        let blocks = self
            .eig
            .iter()
            .map(|e| {
                let n = e.values.len();
                let b = HermitianBlock::from_spectral(&e.basis, &mu[offset..offset + n]);
                offset += n;
                b
            })
            .collect();
        TangentBlock::new(mu[..e0].to_vec(), blocks)
    }

    /// Averages `mu` over every group of tied eigenvalues.
    pub fn average_over_ties(&self, mu: &mut [f64]) {
        let mut offset = self.euclid.len();
        for e in &self.eig {
            let n = e.values.len();
            let scale = 1.0 + e.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && (e.values[end - 1] - e.values[end]).abs() <= TIE_TOL * scale {
                    end += 1;
                }
                if end - start > 1 {
                    let r = offset + start..offset + end;
                    let mean = mu[r.clone()].iter().sum::<f64>() / (end - start) as f64;
                    mu[r].iter_mut().for_each(|v| *v = mean);
                }
                start = end;
            }
            offset += n;
        }
    }
}

impl SpectralObjective {
    pub fn new(oracle: Arc<dyn SymmetricFunction>, label: impl Into<String>) -> Self {
        Self { oracle, label: label.into() }
    }

    pub fn oracle(&self) -> &Arc<dyn SymmetricFunction> {
        &self.oracle
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn signature(&self) -> &Signature {
        self.oracle.signature()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.oracle.signature().block_dims
    }

    pub fn is_smooth(&self) -> bool {
        self.oracle.is_smooth()
    }

    fn decompose(&self, y: &TangentBlock) -> Result<SpectralDecomposition> {
        y.check_signature(self.signature())?;
        Ok(SpectralDecomposition::of(y))
    }

    pub fn lift_eval(&self, y: &TangentBlock) -> Result<f64> {
        Ok(self.oracle.eval(&self.decompose(y)?.vector()))
    }

    pub fn conjugate_eval(&self, x: &TangentBlock) -> Result<f64> {
        Ok(self.oracle.conjugate(&self.decompose(x)?.vector()))
    }

    /// `k diag(∂f(λ)) k^†` per block, averaged over eigenvalue ties.
    pub fn spectral_subgradient(&self, y: &TangentBlock) -> Result<TangentBlock> {
        Ok(self.value_and_subgradient(y)?.1)
    }

    /// Value and subgradient from a single eigendecomposition.
    pub fn value_and_subgradient(&self, y: &TangentBlock) -> Result<(f64, TangentBlock)> {
        let dec = self.decompose(y)?;
        let p = dec.vector();
        let value = self.oracle.eval(&p);
        if !value.is_finite() {
            return Err(Error::Domain(format!("{} is infinite at the given point", self.label)));
        }
        let mut mu = self.oracle.subgradient(&p)?;
        dec.average_over_ties(&mut mu);
        Ok((value, dec.lift(&mu)))
    }

    /// Spectral proximal map `argmin_Z S(Z) + |Z - Y|_F^2 / (2 lambda)`.
    pub fn prox(&self, y: &TangentBlock, lambda: f64) -> Result<TangentBlock> {
        let dec = self.decompose(y)?;
        let q = self.oracle.prox(&dec.vector(), lambda)?;
        Ok(dec.lift(&q))
    }

    /// Moreau envelope value and gradient `(Y - prox(Y)) / lambda`.
    pub fn moreau_eval_grad(&self, lambda: f64, y: &TangentBlock) -> Result<(f64, TangentBlock)> {
        let dec = self.decompose(y)?;
        let p = dec.vector();
        let q = self.oracle.prox(&p, lambda)?;
        let dist2: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
        let value = self.oracle.eval(&q) + dist2 / (2.0 * lambda);
        let g: Vec<f64> = p.iter().zip(&q).map(|(a, b)| (a - b) / lambda).collect();
        Ok((value, dec.lift(&g)))
    }

    /// The Moreau envelope `e_λ S` as an objective in its own right.
    pub fn smoothed(&self, lambda: f64) -> Result<SpectralObjective> {
        let env = MoreauEnvelope::new(self.oracle.clone(), lambda)?;
        Ok(SpectralObjective::new(Arc::new(env), format!("moreau({})", self.label)))
    }

    /// `S + c`.
    pub fn shifted(&self, c: f64) -> SpectralObjective {
        SpectralObjective::new(Arc::new(Shifted::new(self.oracle.clone(), c)), format!("{}+const", self.label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_unitary, seeded_rng};

    fn blocks(bs: Vec<HermitianBlock>) -> TangentBlock {
        TangentBlock::from_blocks(bs)
    }

    #[test]
    fn op_norm_of_diag() {
        let s = builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: vec![1.0] }, &Signature::blocks(&[2])).unwrap();
        let v = s.lift_eval(&blocks(vec![HermitianBlock::from_real_diagonal(&[2.0, -3.0])])).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        for n in 2..6 {
            let s = builtin_objective(&ObjectiveSpec::NegEntropyWeighted { theta: vec![1.0] }, &Signature::blocks(&[n]))
                .unwrap();
            let y = blocks(vec![HermitianBlock::identity(n).scale(1.0 / n as f64)]);
            assert!((s.lift_eval(&y).unwrap() + (n as f64).log2()).abs() < 1e-14);
            assert!((s.conjugate_eval(&TangentBlock::zeros(s.signature())).unwrap() - (n as f64).log2()).abs() < 1e-14);
        }
    }

    #[test]
    fn op_norm_conjugate_is_trace_ball_indicator() {
        let s = builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: vec![1.0] }, &Signature::blocks(&[2])).unwrap();
        let inside = blocks(vec![HermitianBlock::from_real_diagonal(&[0.3, -0.2])]);
        let outside = blocks(vec![HermitianBlock::from_real_diagonal(&[1.5, -0.5])]);
        assert_eq!(s.conjugate_eval(&inside).unwrap(), 0.0);
        assert_eq!(s.conjugate_eval(&outside).unwrap(), f64::INFINITY);
    }

    #[test]
    fn trace_norm_subgradient_sign_pattern() {
        let s = builtin_objective(&ObjectiveSpec::TraceNormSumWeighted { alpha: vec![1.0] }, &Signature::blocks(&[2]))
            .unwrap();
        let g = s.spectral_subgradient(&blocks(vec![HermitianBlock::from_real_diagonal(&[2.0, -1.0])])).unwrap();
        assert!(g.blocks[0].sub(&HermitianBlock::from_real_diagonal(&[1.0, -1.0])).max_abs() < 1e-14);
    }

    #[test]
    fn frobenius_half_square_gradient_is_identity_map() {
        let mut rng = seeded_rng(4);
        let y = blocks(vec![random_hermitian(3, &mut rng), random_hermitian(2, &mut rng)]);
        let s = builtin_objective(&ObjectiveSpec::Frobenius, &y.signature()).unwrap();
        let (q, g) = s.value_and_subgradient(&y).unwrap();
        assert!(g.scale(q).sub(&y).norm() < 1e-12);
    }

    #[test]
    fn trace_dist_zero_at_uniform() {
        let s = builtin_objective(&ObjectiveSpec::TraceDistToUniform { weight: 1.5 }, &Signature::blocks(&[3, 3])).unwrap();
        let u = HermitianBlock::identity(3).scale(1.0 / 3.0);
        assert!(s.lift_eval(&blocks(vec![u.clone(), u])).unwrap().abs() < 1e-15);
    }

    #[test]
    fn op_norm_weighted_direct_max() {
        let s = builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: vec![1.0, 1.0] }, &Signature::blocks(&[2, 2]))
            .unwrap();
        let y = blocks(vec![HermitianBlock::from_real_diagonal(&[0.7, 0.3]), HermitianBlock::from_real_diagonal(&[0.5, 0.5])]);
        assert!((s.lift_eval(&y).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = builtin_objective(&ObjectiveSpec::Frobenius, &Signature::blocks(&[2])).unwrap();
        let y = blocks(vec![HermitianBlock::identity(3)]);
        assert!(matches!(s.lift_eval(&y), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn tie_averaging_is_basis_independent() {
        // op norm at I: any unit mass on the top eigenvalue is valid; averaging gives I/n
        let s = builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: vec![1.0] }, &Signature::blocks(&[3])).unwrap();
        let mut rng = seeded_rng(9);
        let k = random_unitary(3, &mut rng);
        let y = blocks(vec![HermitianBlock::identity(3).conjugate_by(&k)]);
        let g = s.spectral_subgradient(&y).unwrap();
        assert!(g.blocks[0].sub(&HermitianBlock::identity(3).scale(1.0 / 3.0)).max_abs() < 1e-12);
    }

    #[test]
    fn envelope_below_function_and_monotone() {
        let mut rng = seeded_rng(21);
        let s = builtin_objective(&ObjectiveSpec::TraceNormSumWeighted { alpha: vec![1.0, 2.0] }, &Signature::blocks(&[3, 2]))
            .unwrap();
        for _ in 0..20 {
            let y = blocks(vec![random_hermitian(3, &mut rng), random_hermitian(2, &mut rng)]);
            let f = s.lift_eval(&y).unwrap();
            let e1 = s.moreau_eval_grad(0.1, &y).unwrap().0;
            let e2 = s.moreau_eval_grad(0.5, &y).unwrap().0;
            assert!(e1 <= f + 1e-12 && e2 <= e1 + 1e-12);
        }
    }
}
