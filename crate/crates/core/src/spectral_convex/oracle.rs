//! Symmetric convex functions on concatenated spectra and their built-in
//! instances.
//!
//! A vector `p` is laid out as `[euclid | block_1 | ... | block_d]` following
//! a [`Signature`]. Functions are symmetric under permutations inside each
//! block; Euclidean coordinates are never permuted.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use super::projection::{l2_norm, project_weighted_l1_ball, soft_threshold};
use crate::{Error, Result};

/// Entropy domain: eigenvalues in `[-1e-10, 0)` are clamped to zero.
pub const ENTROPY_CLAMP_TOL: f64 = 1e-10;
/// Tolerance on `sum p = 1` for the entropy domain.
pub const SIMPLEX_SUM_TOL: f64 = 1e-9;
/// Relative slack accepted by indicator functions of norm balls.
pub const BALL_TOL: f64 = 1e-10;

/// Dimensions of `R^n0 x H_n1 x ... x H_nd`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub euclid_dim: usize,
    pub block_dims: Vec<usize>,
}

impl Signature {
    pub fn new(euclid_dim: usize, block_dims: Vec<usize>) -> Self {
        Self { euclid_dim, block_dims }
    }

    pub fn blocks(block_dims: &[usize]) -> Self {
        Self { euclid_dim: 0, block_dims: block_dims.to_vec() }
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Length of the concatenated spectral vector.
    pub fn total_len(&self) -> usize {
        self.euclid_dim + self.block_dims.iter().sum::<usize>()
    }

    pub fn euclid_range(&self) -> Range<usize> {
        0..self.euclid_dim
    }

    pub fn block_range(&self, i: usize) -> Range<usize> {
        let start = self.euclid_dim + self.block_dims[..i].iter().sum::<usize>();
        start..start + self.block_dims[i]
    }

    /// Index of the block owning coordinate `j`, `None` for Euclidean ones.
    fn block_of(&self, j: usize) -> Option<usize> {
        if j < self.euclid_dim {
            return None;
        }
        let mut offset = self.euclid_dim;
        for (i, &n) in self.block_dims.iter().enumerate() {
            if j < offset + n {
                return Some(i);
            }
            offset += n;
        }
        None
    }
}

/// Oracle bundle of a symmetric convex function `f` on concatenated spectra.
///
/// `eval` and `conjugate` return `f64::INFINITY` outside the domain.
pub trait SymmetricFunction: Send + Sync + fmt::Debug {
    fn signature(&self) -> &Signature;

    fn eval(&self, p: &[f64]) -> f64;

    fn conjugate(&self, x: &[f64]) -> f64;

    /// Any element of `∂f(p)`.
    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>>;

    /// `argmin_q f(q) + |q - p|^2 / (2 lambda)`.
    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>>;

    /// Whether `f^2` is continuously differentiable on its domain.
    fn is_smooth(&self) -> bool;

    fn name(&self) -> String;
}

fn check_len(sig: &Signature, p: &[f64]) {
    assert_eq!(p.len(), sig.total_len(), "spectral vector length does not match signature");
}

fn require_blocks_only(sig: &Signature, kind: &str) -> Result<()> {
    if sig.euclid_dim != 0 {
        return Err(Error::Parameter(format!("{kind} is defined on Hermitian blocks only (euclid_dim must be 0)")));
    }
    if sig.block_dims.is_empty() || sig.block_dims.contains(&0) {
        return Err(Error::Parameter(format!("{kind} needs at least one nonempty block")));
    }
    Ok(())
}

fn check_weights(name: &str, w: &[f64], sig: &Signature) -> Result<()> {
    if w.len() != sig.num_blocks() {
        return Err(Error::Parameter(format!("{name} has length {} but there are {} blocks", w.len(), sig.num_blocks())));
    }
    if let Some(bad) = w.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::Parameter(format!("{name} entries must be positive and finite, got {bad}")));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Parameter(format!("smoothing weight must be positive, got {lambda}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

/// `f(p) = |p|_2`, the Frobenius norm after lifting. Self-dual up to the unit
/// ball indicator.
#[derive(Clone, Debug)]
pub struct Frobenius {
    sig: Signature,
}

impl Frobenius {
    pub fn new(sig: Signature) -> Self {
        Self { sig }
    }
}

impl SymmetricFunction for Frobenius {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        l2_norm(p)
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        if l2_norm(x) <= 1.0 + BALL_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.sig, p);
        let n = l2_norm(p);
        if n == 0.0 {
            return Ok(vec![0.0; p.len()]);
        }
        Ok(p.iter().map(|v| v / n).collect())
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        let n = l2_norm(p);
        if n <= lambda {
            return Ok(vec![0.0; p.len()]);
        }
        Ok(p.iter().map(|v| v * (1.0 - lambda / n)).collect())
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "frobenius".into()
    }
}

// ---------------------------------------------------------------------------

/// `f(p) = max_i |p^(i)|_inf / alpha_i`; lifts to `max_i |Y_i|_op / alpha_i`.
#[derive(Clone, Debug)]
pub struct OpNormMaxWeighted {
    sig: Signature,
    alpha: Vec<f64>,
    coord_weights: Vec<f64>,
}

impl OpNormMaxWeighted {
    pub fn new(sig: Signature, alpha: Vec<f64>) -> Result<Self> {
        require_blocks_only(&sig, "op_norm_max_weighted")?;
        check_weights("alpha", &alpha, &sig)?;
        let coord_weights = (0..sig.total_len()).map(|j| alpha[sig.block_of(j).unwrap()]).collect();
        Ok(Self { sig, alpha, coord_weights })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Dual norm `sum_i alpha_i |x^(i)|_1`.
    fn dual_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.coord_weights).map(|(v, w)| v.abs() * w).sum()
    }
}

impl SymmetricFunction for OpNormMaxWeighted {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        p.iter().zip(&self.coord_weights).map(|(v, w)| v.abs() / w).fold(0.0, f64::max)
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        if self.dual_norm(x) <= 1.0 + BALL_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.sig, p);
        let mut g = vec![0.0; p.len()];
        let mut best = 0.0;
        let mut arg = None;
        for (j, (v, w)) in p.iter().zip(&self.coord_weights).enumerate() {
            let r = v.abs() / w;
            if r > best {
                best = r;
                arg = Some(j);
            }
        }
        if let Some(j) = arg {
            g[j] = p[j].signum() / self.coord_weights[j];
        }
        Ok(g)
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        // Moreau decomposition: prox_{λf}(p) = p - λ proj_B(p / λ), B the dual unit ball
        let scaled: Vec<f64> = p.iter().map(|v| v / lambda).collect();
        let proj = project_weighted_l1_ball(&scaled, &self.coord_weights, 1.0);
        Ok(p.iter().zip(&proj).map(|(v, q)| v - lambda * q).collect())
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "op_norm_max_weighted".into()
    }
}

// ---------------------------------------------------------------------------

/// `f(p) = sum_i alpha_i |p^(i)|_1`; lifts to `sum_i alpha_i |Y_i|_tr`.
#[derive(Clone, Debug)]
pub struct TraceNormSumWeighted {
    sig: Signature,
    alpha: Vec<f64>,
    coord_weights: Vec<f64>,
}

impl TraceNormSumWeighted {
    pub fn new(sig: Signature, alpha: Vec<f64>) -> Result<Self> {
        require_blocks_only(&sig, "trace_norm_sum_weighted")?;
        check_weights("alpha", &alpha, &sig)?;
        let coord_weights = (0..sig.total_len()).map(|j| alpha[sig.block_of(j).unwrap()]).collect();
        Ok(Self { sig, alpha, coord_weights })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

impl SymmetricFunction for TraceNormSumWeighted {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        p.iter().zip(&self.coord_weights).map(|(v, w)| v.abs() * w).sum()
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        let worst = x.iter().zip(&self.coord_weights).map(|(v, w)| v.abs() / w).fold(0.0, f64::max);
        if worst <= 1.0 + BALL_TOL {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.sig, p);
        Ok(p.iter()
            .zip(&self.coord_weights)
            .map(|(v, w)| if *v == 0.0 { 0.0 } else { v.signum() * w })
            .collect())
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(p.iter().zip(&self.coord_weights).map(|(v, w)| soft_threshold(*v, lambda * w)).collect())
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "trace_norm_sum_weighted".into()
    }
}

// ---------------------------------------------------------------------------

/// Weighted negative entropy in bits:
/// `f(p) = sum_i theta_i sum_j p_ij log2 p_ij` when every block is a
/// probability vector, `+inf` otherwise. Lifts to `-sum_i theta_i H(Y_i)`.
#[derive(Clone, Debug)]
pub struct NegEntropyWeighted {
    sig: Signature,
    theta: Vec<f64>,
}

impl NegEntropyWeighted {
    pub fn new(sig: Signature, theta: Vec<f64>) -> Result<Self> {
        require_blocks_only(&sig, "neg_entropy_weighted")?;
        check_weights("theta", &theta, &sig)?;
        let total: f64 = theta.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("theta must sum to 1, got {total}")));
        }
        Ok(Self { sig, theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Clamped block, or `None` when outside the probability simplex.
    fn clamp_block(block: &[f64]) -> Option<Vec<f64>> {
        if block.iter().any(|v| !v.is_finite() || *v < -ENTROPY_CLAMP_TOL) {
            return None;
        }
        let q: Vec<f64> = block.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = q.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_SUM_TOL {
            return None;
        }
        Some(q)
    }

    /// Prox of `a * sum q ln q` (natural log, `a > 0`) over the simplex.
    ///
    /// For a shift `s`, each coordinate solves the scalar stationarity
    /// equation `a ln q + q = p_j - a + s` by Newton's method in `y = ln q`;
    /// the shift is then found by safeguarded Newton so that `sum q = 1`.
    fn prox_block(p: &[f64], a: f64) -> Vec<f64> {
        let solve = |c: f64| -> (f64, f64) {
            // a y + e^y = c, monotone convex in y; start right of the root
            let mut y = if c >= 1.0 { c.ln() } else { 0.0 };
            for _ in 0..200 {
                let ey = y.exp();
                let f = a * y + ey - c;
                let step = f / (a + ey);
                y -= step;
                if step.abs() <= 1e-15 * (1.0 + y.abs()) {
                    break;
                }
            }
            let q = y.exp();
            (q, q / (a + q))
        };
        let total = |s: f64| -> (f64, f64) {
            p.iter().fold((0.0, 0.0), |(g, dg), &pj| {
                let (q, dq) = solve(pj - a + s);
                (g + q, dg + dq)
            })
        };
        let (mut lo, mut hi) = (-1.0, 1.0);
        while total(lo).0 > 1.0 {
            lo = 2.0 * lo - 1.0;
        }
        while total(hi).0 < 1.0 {
            hi = 2.0 * hi + 1.0;
        }
        let mut s = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, dg) = total(s);
            let r = g - 1.0;
            if r.abs() <= 1e-15 {
                break;
            }
            if r > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let mut next = s - r / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-16 * (1.0 + s.abs()) {
                s = next;
                break;
            }
            s = next;
        }
        let q: Vec<f64> = p.iter().map(|&pj| solve(pj - a + s).0).collect();
        let sum: f64 = q.iter().sum();
        q.into_iter().map(|v| v / sum).collect()
    }
}

fn log2_sum_exp2(x: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = x.clone().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + x.map(|v| (v - m).exp2()).sum::<f64>().log2()
}

impl SymmetricFunction for NegEntropyWeighted {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        let mut total = 0.0;
        for (i, theta) in self.theta.iter().enumerate() {
            let Some(q) = Self::clamp_block(&p[self.sig.block_range(i)]) else {
                return f64::INFINITY;
            };
            total += theta * q.iter().filter(|v| **v > 0.0).map(|v| v * v.log2()).sum::<f64>();
        }
        total
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        self.theta
            .iter()
            .enumerate()
            .map(|(i, theta)| theta * log2_sum_exp2(x[self.sig.block_range(i)].iter().map(move |v| v / theta)))
            .sum()
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.sig, p);
        let mut g = vec![0.0; p.len()];
        for (i, theta) in self.theta.iter().enumerate() {
            let r = self.sig.block_range(i);
            let q = Self::clamp_block(&p[r.clone()]).ok_or_else(|| {
                Error::Domain(format!("block {i} is not a probability vector (entropy domain)"))
            })?;
            if q.iter().any(|v| *v <= 0.0) {
                return Err(Error::Domain(format!(
                    "block {i} has a zero eigenvalue; negative entropy has no finite subgradient there"
                )));
            }
            for (dst, v) in g[r].iter_mut().zip(&q) {
                *dst = theta * v.log2();
            }
        }
        Ok(g)
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        check_len(&self.sig, p);
        let mut out = vec![0.0; p.len()];
        for (i, theta) in self.theta.iter().enumerate() {
            let r = self.sig.block_range(i);
            // theta * sum q log2 q = (theta / ln 2) sum q ln q
            let a = lambda * theta / std::f64::consts::LN_2;
            let q = Self::prox_block(&p[r.clone()], a);
            out[r].copy_from_slice(&q);
        }
        Ok(out)
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "neg_entropy_weighted".into()
    }
}

// ---------------------------------------------------------------------------

/// `f(p) = weight * sum_i |p^(i) - 1/n_i|_1`; lifts to
/// `weight * sum_i |Y_i - I/n_i|_tr`.
#[derive(Clone, Debug)]
pub struct TraceDistToUniform {
    sig: Signature,
    weight: f64,
    centers: Vec<f64>,
}

impl TraceDistToUniform {
    pub fn new(sig: Signature, weight: f64) -> Result<Self> {
        require_blocks_only(&sig, "trace_dist_to_uniform")?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::Parameter(format!("weight must be positive, got {weight}")));
        }
        let centers = (0..sig.total_len()).map(|j| 1.0 / sig.block_dims[sig.block_of(j).unwrap()] as f64).collect();
        Ok(Self { sig, weight, centers })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl SymmetricFunction for TraceDistToUniform {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        self.weight * p.iter().zip(&self.centers).map(|(v, c)| (v - c).abs()).sum::<f64>()
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        if x.iter().any(|v| v.abs() > self.weight * (1.0 + BALL_TOL)) {
            return f64::INFINITY;
        }
        x.iter().zip(&self.centers).map(|(v, c)| v * c).sum()
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        check_len(&self.sig, p);
        Ok(p.iter()
            .zip(&self.centers)
            .map(|(v, c)| {
                let d = v - c;
                if d == 0.0 {
                    0.0
                } else {
                    self.weight * d.signum()
                }
            })
            .collect())
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(p.iter().zip(&self.centers).map(|(v, c)| c + soft_threshold(v - c, lambda * self.weight)).collect())
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "trace_dist_to_uniform".into()
    }
}

// ---------------------------------------------------------------------------

/// Indicator of `{p : |p|_1 <= radius}`; lifts to the trace-norm ball.
#[derive(Clone, Debug)]
pub struct IndicatorTraceBall {
    sig: Signature,
    radius: f64,
}

impl IndicatorTraceBall {
    pub fn new(sig: Signature, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { sig, radius })
    }
}

impl SymmetricFunction for IndicatorTraceBall {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn eval(&self, p: &[f64]) -> f64 {
        check_len(&self.sig, p);
        if p.iter().map(|v| v.abs()).sum::<f64>() <= self.radius * (1.0 + BALL_TOL) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        check_len(&self.sig, x);
        self.radius * x.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        if self.eval(p).is_infinite() {
            return Err(Error::Domain("point outside the trace-norm ball".into()));
        }
        Ok(vec![0.0; p.len()])
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(project_weighted_l1_ball(p, &vec![1.0; p.len()], self.radius))
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "indicator_trace_ball".into()
    }
}

// ---------------------------------------------------------------------------

/// Moreau envelope `e_λ f(p) = min_q f(q) + |p - q|^2 / (2λ)`.
///
/// Its conjugate is `f* + (λ/2)|.|^2` and its gradient `(p - prox(p)) / λ`.
#[derive(Clone, Debug)]
pub struct MoreauEnvelope {
    inner: Arc<dyn SymmetricFunction>,
    lambda: f64,
}

impl MoreauEnvelope {
    pub fn new(inner: Arc<dyn SymmetricFunction>, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { inner, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn inner(&self) -> &Arc<dyn SymmetricFunction> {
        &self.inner
    }

    fn value_and_prox(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let q = self.inner.prox(p, self.lambda)?;
        let dist2: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((self.inner.eval(&q) + dist2 / (2.0 * self.lambda), q))
    }
}

impl SymmetricFunction for MoreauEnvelope {
    fn signature(&self) -> &Signature {
        self.inner.signature()
    }

    fn eval(&self, p: &[f64]) -> f64 {
        match self.value_and_prox(p) {
            Ok((v, _)) => v,
            Err(_) => f64::NAN,
        }
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        let c = self.inner.conjugate(x);
        c + 0.5 * self.lambda * x.iter().map(|v| v * v).sum::<f64>()
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        let (_, q) = self.value_and_prox(p)?;
        Ok(p.iter().zip(&q).map(|(a, b)| (a - b) / self.lambda).collect())
    }

    fn prox(&self, p: &[f64], mu: f64) -> Result<Vec<f64>> {
        check_lambda(mu)?;
        // prox_{μ e_λ f}(p) = p + μ/(λ+μ) (prox_{(λ+μ) f}(p) - p)
        let q = self.inner.prox(p, self.lambda + mu)?;
        let t = mu / (self.lambda + mu);
        Ok(p.iter().zip(&q).map(|(a, b)| a + t * (b - a)).collect())
    }

    fn is_smooth(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("moreau[{}](lambda={})", self.inner.name(), self.lambda)
    }
}

/// `f + c`.
#[derive(Clone, Debug)]
pub struct Shifted {
    inner: Arc<dyn SymmetricFunction>,
    shift: f64,
}

impl Shifted {
    pub fn new(inner: Arc<dyn SymmetricFunction>, shift: f64) -> Self {
        Self { inner, shift }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl SymmetricFunction for Shifted {
    fn signature(&self) -> &Signature {
        self.inner.signature()
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.inner.eval(p) + self.shift
    }

    fn conjugate(&self, x: &[f64]) -> f64 {
        self.inner.conjugate(x) - self.shift
    }

    fn subgradient(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.inner.subgradient(p)
    }

    fn prox(&self, p: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.inner.prox(p, lambda)
    }

    fn is_smooth(&self) -> bool {
        self.inner.is_smooth()
    }

    fn name(&self) -> String {
        format!("{}+{}", self.inner.name(), self.shift)
    }
}
