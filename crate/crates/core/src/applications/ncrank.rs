//! Noncommutative rank via the left-right action on the pencil tensor.
//!
//! The solver minimizes `S = (n/2)(|μ_1 - I/n|_tr + |μ_2 - I/n|_tr)`, so
//! `ncrk = n - inf S`. Any iterate gives `ncrk >= ceil(n - S)`; upper bounds
//! come from boundary certificates, in particular from exact
//! Fortin–Reutenauer pairs `(X, Y)` with `u^T A_k v = 0` on `X x Y`, which
//! give `ncrk <= 2n - dim X - dim Y`.

use super::pencil::check_common_kernel;
use super::{candidate_certificates, certify_objective, ApplicationResult, MatrixPencil, CHECK_EVERY};
use crate::flow_solver::{FlowConfig, FlowStatus, GroupSolver};
use crate::pd_geometry::{BoundaryCertificate, FlagWeights};
use crate::spectral_convex::{builtin_objective, HermitianBlock, ObjectiveSpec, Signature};
use crate::tensor_action::{DenseTensor, GroupElement};
use crate::{CMat, Error, Result};

/// Relative residual `|X^T A_k Y| / |A|` accepted for a subspace pair.
pub const FR_RESIDUAL_TOL: f64 = 1e-10;

/// Weight gaps above this mark candidate flag prefixes.
pub const FLAG_GAP_TOL: f64 = 1e-4;

/// Slack on `n - S_best` before rounding up; covers the rounding noise left
/// in `g·v` at the conditioning limit.
pub const PRIMAL_MARGIN: f64 = 1e-6;

/// Restarts with shorter steps after a run hits the conditioning limit.
pub const MAX_RESTARTS: usize = 3;

/// Step-constant factor applied on each restart.
pub const STEP_BACKOFF: f64 = 0.3;
const FR_MAX_SWEEPS: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankStatus {
    /// Lower and upper bounds coincide.
    Certified,
    /// Bounds differ but the primal value is within half a step of a
    /// feasible rational value.
    Rounded,
    Unrounded,
}

impl RankStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RankStatus::Certified => "certified",
            RankStatus::Rounded => "rounded",
            RankStatus::Unrounded => "unrounded",
        }
    }
}

/// Subspaces `X = span(x)`, `Y = span(y)` (orthonormal columns) with
/// `u^T A_k v ≈ 0` for `u ∈ X`, `v ∈ Y`.
#[derive(Clone, Debug)]
pub struct FrPair {
    pub x: CMat,
    pub y: CMat,
    pub residual: f64,
}

impl FrPair {
    pub fn dims(&self) -> (usize, usize) {
        (self.x.ncols(), self.y.ncols())
    }

    /// `ncrk <= 2n - a - b`.
    pub fn rank_bound(&self) -> usize {
        let n = self.x.nrows();
        2 * n - self.x.ncols() - self.y.ncols()
    }

    /// Boundary point with weights `±n/2` split at the pair: bases
    /// `k_1 = [conj X | X^⊥]`, `k_2 = [conj Y | Y^⊥]`. Its dual value in
    /// `S` units is `a + b - n`.
    pub fn certificate(&self) -> BoundaryCertificate {
        let n = self.x.nrows();
        let h = n as f64 / 2.0;
        let block = |sub: &CMat| {
            let a = sub.ncols();
            let basis = complete_unitary(&sub.map(|z| z.conj()));
            let weights = (0..n).map(|j| if j < a { h } else { -h }).collect();
            FlagWeights { basis, weights }
        };
        BoundaryCertificate { euclid_dir: Vec::new(), blocks: vec![block(&self.x), block(&self.y)] }
    }
}

/// `[q | q^⊥]` for orthonormal columns `q`.
fn complete_unitary(q: &CMat) -> CMat {
    let n = q.nrows();
    let a = q.ncols();
    let proj = HermitianBlock::from_matrix_unchecked(CMat::identity(n, n) - q * q.adjoint());
    let e = proj.eigh();
    let mut k = CMat::zeros(n, n);
    k.view_mut((0, 0), (n, a)).copy_from(q);
    k.view_mut((0, a), (n, n - a)).copy_from(&e.basis.columns(0, n - a));
    k
}

/// Eigenvectors of the `count` smallest eigenvalues and their sum.
fn smallest(h: &CMat, count: usize) -> (CMat, f64) {
    let e = HermitianBlock::from_matrix_unchecked(h.clone()).eigh();
    let n = h.nrows();
    let tail: f64 = e.values[n - count..].iter().map(|v| v.max(0.0)).sum();
    (e.basis.columns(n - count, count).into_owned(), tail)
}

/// Alternating search for an `a x b` Fortin–Reutenauer pair from a seed
/// for `Y`: `X` spans the least-singular left directions of `[A_k Y]`, then
/// `Y` those of the stacked `X^T A_k`. Accepts when the residual drops below
/// [`FR_RESIDUAL_TOL`].
pub fn refine_fr_pair(pencil: &MatrixPencil, a: usize, b: usize, seed_y: &CMat) -> Option<FrPair> {
    let n = pencil.n();
    if a == 0 || b == 0 || a > n || b > n || seed_y.ncols() != b || seed_y.nrows() != n {
        return None;
    }
    let scale = pencil.frobenius_norm().powi(2);
    let mut y = seed_y.clone();
    let mut best = f64::INFINITY;
    let mut stale = 0;
    for _ in 0..FR_MAX_SWEEPS {
        let mut h = CMat::zeros(n, n);
        for ak in pencil.matrices() {
            let m = ak * &y;
            h += &m * m.adjoint();
        }
        let (s, _) = smallest(&h, a);
        // X = conj(s): u^T A_k v = s^† A_k v
        let mut k = CMat::zeros(n, n);
        for ak in pencil.matrices() {
            let r = s.adjoint() * ak;
            k += r.adjoint() * r;
        }
        let (ny, tail) = smallest(&k, b);
        y = ny;
        let residual = (tail / scale).sqrt();
        if residual <= FR_RESIDUAL_TOL {
            let x = s.map(|z| z.conj());
            let residual = pair_residual(pencil, &x, &y);
            return (residual <= FR_RESIDUAL_TOL).then_some(FrPair { x, y, residual });
        }
        if residual < 0.999 * best {
            best = residual;
            stale = 0;
        } else {
            stale += 1;
            if stale >= 20 {
                break;
            }
        }
    }
    None
}

/// `sqrt(sum_k |X^T A_k Y|_F^2) / |A|`.
fn pair_residual(pencil: &MatrixPencil, x: &CMat, y: &CMat) -> f64 {
    let num: f64 = pencil.matrices().iter().map(|ak| (x.transpose() * ak * y).norm_squared()).sum();
    (num / pencil.frobenius_norm().powi(2)).sqrt()
}

/// `(sum_k A_k^† A_k) / |A|^2`, i.e. the transpose of the second moment-map
/// block of the pencil tensor (whose row index is the column index `j`).
pub fn pencil_mu2(v: &DenseTensor) -> Result<HermitianBlock> {
    let mu = crate::tensor_action::moment_map_modes(v, &[1])?;
    Ok(HermitianBlock::from_matrix_unchecked(mu[0].as_matrix().transpose()))
}

/// Flag prefixes at weight gaps; nonincreasing weights assumed.
fn gap_prefixes(w: &[f64]) -> Vec<usize> {
    let spread = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    (1..w.len()).filter(|&j| w[j - 1] - w[j] > FLAG_GAP_TOL * spread.max(f64::MIN_POSITIVE)).collect()
}

/// Tries to certify `ncrk <= target` with a Fortin–Reutenauer pair seeded
/// from the flags of `xi`. Returns the best pair found.
fn search_pairs(pencil: &MatrixPencil, xi: &BoundaryCertificate, lo: usize, hi: usize) -> Option<FrPair> {
    let n = pencil.n();
    // only pairs that would improve the upper bound without beating the lower one
    let useful = |a: usize, b: usize| a + b > 2 * n - hi && a + b <= 2 * n - lo && !(a == n && b == n);
    let mut order: Vec<(usize, usize)> = Vec::new();
    let ga = gap_prefixes(&xi.blocks[0].weights);
    let gb = gap_prefixes(&xi.blocks[1].weights);
    for &a in &ga {
        for &b in &gb {
            if useful(a, b) {
                order.push((a, b));
            }
        }
    }
    order.sort_by(|p, q| (q.0 + q.1).cmp(&(p.0 + p.1)));
    let mut rest: Vec<(usize, usize)> =
        (1..=n).flat_map(|a| (1..=n).map(move |b| (a, b))).filter(|&(a, b)| useful(a, b) && !order.contains(&(a, b))).collect();
    rest.sort_by(|p, q| (q.0 + q.1).cmp(&(p.0 + p.1)));
    order.extend(rest);
    let k2 = &xi.blocks[1].basis;
    let k1 = &xi.blocks[0].basis;
    for (a, b) in order {
        let seed = k2.columns(0, b).map(|z| z.conj());
        if let Some(p) = refine_fr_pair(pencil, a, b, &seed) {
            return Some(p);
        }
        // the transposed pencil swaps the roles of X and Y
        let t = MatrixPencil::new(pencil.matrices().iter().map(|m| m.transpose()).collect()).ok()?;
        let seed = k1.columns(0, a).map(|z| z.conj());
        if let Some(p) = refine_fr_pair(&t, b, a, &seed) {
            return Some(FrPair { x: p.y, y: p.x, residual: p.residual });
        }
    }
    None
}

/// Numeric dual of a certificate after centering each block and scaling
/// the weights into the box `|λ| <= n/2`. Returns `(value in S units, ξ)`.
fn scaled_dual(v: &DenseTensor, xi: &BoundaryCertificate) -> Result<(f64, BoundaryCertificate)> {
    let n = v.dims()[0] as f64;
    let mut blocks = Vec::new();
    let mut top: f64 = 0.0;
    for b in &xi.blocks {
        let hi = b.weights[0];
        let lo = *b.weights.last().unwrap();
        let c = 0.5 * (hi + lo);
        top = top.max(0.5 * (hi - lo));
        blocks.push(FlagWeights { basis: b.basis.clone(), weights: b.weights.iter().map(|w| w - c).collect() });
    }
    let mut cert = BoundaryCertificate { euclid_dir: Vec::new(), blocks };
    if top > 0.0 {
        cert = cert.scale(0.5 * n / top);
    }
    let d = certify_objective(v, &[0, 1], &ObjectiveSpec::TraceDistToUniform { weight: n / 2.0 }, &cert)?;
    Ok((d, cert))
}

/// Noncommutative rank of a pencil with a certified bracket.
///
/// Runs the group-form method on the left-right action in chunks of
/// [`CHECK_EVERY`] iterations; after each chunk the lower bound
/// `ceil(n - S_best)` is compared with upper bounds from Fortin–Reutenauer
/// pairs and numeric certificates, stopping as soon as they meet. A run that
/// hits the conditioning limit first is restarted with steps shortened by
/// [`STEP_BACKOFF`] (at most [`MAX_RESTARTS`] times, sharing the iteration
/// budget); the trace is the last attempt's.
///
/// `primal_value` and `dual_value` are in units of
/// `|μ_1 - I/n|_tr + |μ_2 - I/n|_tr`, so `ncrk = n - (n/2)·value`.
pub fn ncrank(pencil: &MatrixPencil, config: &FlowConfig) -> Result<ApplicationResult> {
    let kc = check_common_kernel(pencil);
    if !kc.is_ok() {
        return Err(Error::Precondition(format!(
            "pencil has a common left kernel of dimension {} and a common right kernel of dimension {}; reduce it manually",
            kc.left_kernel_dim, kc.right_kernel_dim
        )));
    }
    let n = pencil.n();
    let nf = n as f64;
    let half = nf / 2.0;
    let v = pencil.to_tensor();
    let sig = Signature::blocks(&[n, n]);
    let q = builtin_objective(&ObjectiveSpec::TraceDistToUniform { weight: half }, &sig)?;
    let zero = BoundaryCertificate::zero(&sig);
    let mut best_dual = (0.0, zero);
    let mut hi = n;
    let lower = |s: f64| ((nf - s - PRIMAL_MARGIN).ceil().max(0.0) as usize).min(n);
    let mut attempt_config = config.clone();
    let mut used = 0;
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut run = None;
    for attempt in 0..=MAX_RESTARTS {
        attempt_config.max_iters = config.max_iters - used;
        let mut solver = GroupSolver::new(&v, &[0, 1], &q, &GroupElement::identity(&[n, n]), &attempt_config)?;
        loop {
            if lower(solver.best_objective()) >= hi {
                break;
            }
            let done = solver.run(CHECK_EVERY)?;
            let lo = lower(solver.best_objective());
            for c in candidate_certificates(&solver) {
                let (d, cert) = scaled_dual(&v, &c)?;
                if d > best_dual.0 {
                    best_dual = (d, cert);
                    hi = hi.min(((nf - d + 1e-9).floor().max(0.0) as usize).min(n));
                }
                if lo < hi {
                    if let Some(pair) = search_pairs(pencil, &c, lo, hi) {
                        let cert = pair.certificate();
                        let d = certify_objective(&v, &[0, 1], &ObjectiveSpec::TraceDistToUniform { weight: half }, &cert)?;
                        log::debug!("Fortin–Reutenauer pair {:?}, dual {d}", pair.dims());
                        if d > best_dual.0 {
                            best_dual = (d, cert);
                        }
                        hi = hi.min(pair.rank_bound());
                    }
                }
            }
            if done {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| solver.best_objective() < b.0) {
            best = Some((solver.best_objective(), solver.best_spectra().to_vec()));
        }
        used += solver.iterations();
        let r = solver.finish()?;
        let retry = r.trace.status == FlowStatus::ConditionLimit && lower(best.as_ref().unwrap().0) < hi && used < config.max_iters;
        run = Some(r);
        if !retry || attempt == MAX_RESTARTS {
            break;
        }
        // g became ill-conditioned before the bracket closed: the steps
        // overshot, so start over with shorter ones
        attempt_config.step_rule = attempt_config.step_rule.scaled(STEP_BACKOFF);
        log::info!("nc-rank: conditioning limit before the bracket closed; restarting with step {:?}", attempt_config.step_rule);
    }
    let (s_best, spectra) = best.expect("at least one attempt");
    let run = run.expect("at least one attempt");
    let lo = lower(s_best);
    let t_best = s_best / half;
    let (rank, status) = if lo == hi {
        (Some(lo), RankStatus::Certified)
    } else {
        let r = (nf - s_best).round().clamp(lo.min(hi) as f64, hi as f64);
        if (t_best - 2.0 * (nf - r) / nf).abs() < 1.0 / (2.0 * nf) {
            (Some(r as usize), RankStatus::Rounded)
        } else {
            (None, RankStatus::Unrounded)
        }
    };
    let dual = best_dual.0 / half;
    Ok(ApplicationResult {
        application: "ncrank",
        primal_value: t_best,
        dual_value: dual,
        gap: t_best - dual,
        certificate: Some(best_dual.1),
        spectra,
        iterations: used,
        status: run.trace.status,
        certificate_status: run.trace.certificate_status.clone(),
        rank,
        rank_status: Some(status),
        rank_bounds: Some((lo, hi)),
        trace: run.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::{application_config, ncrank_blowup_oracle, random_pencil};
    use crate::tensor_action::moment_map;
    use crate::Complex64;

    #[test]
    fn mu2_adapter_matches_pencil_formula() {
        let p = random_pencil(3, 2, 4).unwrap();
        let v = p.to_tensor();
        let mut want = CMat::zeros(3, 3);
        for a in p.matrices() {
            want += a.adjoint() * a;
        }
        want /= Complex64::new(p.frobenius_norm().powi(2), 0.0);
        let got = pencil_mu2(&v).unwrap();
        assert!((got.as_matrix() - &want).norm() < 1e-12);
        // and the raw second block is its transpose
        let mu = moment_map(&v).unwrap();
        assert!((mu[1].as_matrix() - want.transpose()).norm() < 1e-12);
    }

    #[test]
    fn identity_and_scalar_pencils() {
        let r = ncrank(&MatrixPencil::identity(3), &application_config()).unwrap();
        assert_eq!(r.rank, Some(3));
        assert_eq!(r.rank_status, Some(RankStatus::Certified));
        let a = CMat::from_element(1, 1, Complex64::new(2.0, -1.0));
        let r = ncrank(&MatrixPencil::new(vec![a]).unwrap(), &application_config()).unwrap();
        assert_eq!(r.rank, Some(1));
    }

    #[test]
    fn fr_pair_certificate_has_exact_dual() {
        // x1 E12 + x2 E13 on 3x3: rows 2,3 vanish -> left kernel, X = span(e2, e3), Y = C^3
        let mut a = CMat::zeros(3, 3);
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        let mut b = CMat::zeros(3, 3);
        b[(0, 1)] = Complex64::new(1.0, 0.0);
        let mut c = CMat::zeros(3, 3);
        c[(0, 2)] = Complex64::new(1.0, 0.0);
        let p = MatrixPencil::new(vec![a, b, c]).unwrap();
        let seed = CMat::identity(3, 3);
        let pair = refine_fr_pair(&p, 2, 3, &seed).unwrap();
        assert_eq!(pair.rank_bound(), 1);
        let d = certify_objective(&p.to_tensor(), &[0, 1], &ObjectiveSpec::TraceDistToUniform { weight: 1.5 }, &pair.certificate()).unwrap();
        assert!((d - 2.0).abs() < 1e-9, "{d}");
        let r = ncrank(&p, &application_config()).unwrap();
        assert_eq!(r.rank, Some(1));
    }

    #[test]
    fn skew_pencil_matches_oracle() {
        let p = MatrixPencil::skew3();
        let r = ncrank(&p, &FlowConfig { max_iters: 20_000, ..application_config() }).unwrap();
        assert_eq!(r.rank, Some(ncrank_blowup_oracle(&p, 3, 0)));
    }

    #[test]
    fn random_pencils_match_oracle() {
        for seed in 0..6 {
            let p = random_pencil(3, 2, seed).unwrap();
            let r = ncrank(&p, &FlowConfig { max_iters: 20_000, ..application_config() }).unwrap();
            let want = ncrank_blowup_oracle(&p, 3, seed);
            assert_eq!(r.rank, Some(want), "seed {seed}: bounds {:?} T {}", r.rank_bounds, r.primal_value);
            assert!(r.dual_value <= r.primal_value + 1e-8);
        }
    }
}
