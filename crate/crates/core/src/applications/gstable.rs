use super::{candidate_certificates, ApplicationResult, CHECK_EVERY};
use crate::flow_solver::{FlowConfig, FlowProblem, GroupSolver};
use crate::pd_geometry::{BoundaryCertificate, FlagWeights};
use crate::spectral_convex::{builtin_objective, ObjectiveSpec, Signature};
use crate::tensor_action::{DenseTensor, GroupElement, KempfNessProblem};
use crate::{CMat, Error, Result};

/// Dual value `-Φ_v^∞(X)` at the best scalar shift `X_i = Y_i + s_i I` of
/// the certificate, normalized to `sum_i α_i |X_i|_tr = 1`.
///
/// Returns the value (a lower bound on `1/rk`) and the normalized
/// certificate; `(-∞, ξ)` when every shift is degenerate.
pub fn gstable_dual(v: &DenseTensor, alpha: &[f64], xi: &BoundaryCertificate) -> Result<(f64, BoundaryCertificate)> {
    if alpha.len() != v.order() || xi.blocks.len() != v.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights and {} certificate blocks for order {}",
            alpha.len(),
            xi.blocks.len(),
            v.order()
        )));
    }
    let p = KempfNessProblem::new(v)?;
    let rec = p.recession(xi)?;
    let lam: Vec<&[f64]> = xi.blocks.iter().map(|b| b.weights.as_slice()).collect();
    let value = |s: &[f64]| -> f64 {
        let den: f64 = lam
            .iter()
            .zip(s)
            .zip(alpha)
            .map(|((l, si), a)| a * l.iter().map(|x| (x + si).abs()).sum::<f64>())
            .sum();
        if den > 0.0 {
            (-rec - s.iter().sum::<f64>()) / den
        } else {
            f64::NEG_INFINITY
        }
    };
    // the ratio is linear over convex piecewise linear in each s_i, so its
    // coordinatewise maxima sit at breakpoints s_i = -λ_ij
    let mut s = vec![0.0; lam.len()];
    let mut best = value(&s);
    for _ in 0..8 {
        let before = best;
        for i in 0..s.len() {
            let keep = s[i];
            let mut arg = keep;
            for &l in lam[i] {
                s[i] = -l;
                let val = value(&s);
                if val > best {
                    best = val;
                    arg = -l;
                }
            }
            s[i] = arg;
        }
        if best <= before {
            break;
        }
    }
    if best == f64::NEG_INFINITY {
        return Ok((best, xi.clone()));
    }
    let den: f64 =
        lam.iter().zip(&s).zip(alpha).map(|((l, si), a)| a * l.iter().map(|x| (x + si).abs()).sum::<f64>()).sum();
    let cert = BoundaryCertificate {
        euclid_dir: Vec::new(),
        blocks: xi
            .blocks
            .iter()
            .zip(&s)
            .map(|(b, si)| FlagWeights { basis: b.basis.clone(), weights: b.weights.iter().map(|x| (x + si) / den).collect() })
            .collect(),
    };
    Ok((best, cert))
}

/// `-I` on one block, zero elsewhere: certifies `rk <= α_i n_i`.
fn scalar_certificate(dims: &[usize], i: usize) -> BoundaryCertificate {
    BoundaryCertificate {
        euclid_dir: Vec::new(),
        blocks: dims
            .iter()
            .enumerate()
            .map(|(j, &n)| FlagWeights { basis: CMat::identity(n, n), weights: vec![if j == i { -1.0 } else { 0.0 }; n] })
            .collect(),
    }
}

/// G-stable rank `rk^G_α(v)`: minimizes `max_i |μ_i(g·v)|_op / α_i`.
///
/// `primal_value = 1/S_best` is a lower bound, `dual_value = 1/D` an upper
/// bound (`+∞` when no certificate has positive dual value).
pub fn g_stable_rank(v: &DenseTensor, alpha: &[f64], config: &FlowConfig) -> Result<ApplicationResult> {
    if alpha.len() != v.order() {
        return Err(Error::DimensionMismatch(format!("{} weights for a tensor of order {}", alpha.len(), v.order())));
    }
    let sig = Signature::blocks(v.dims());
    let q = builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: alpha.to_vec() }, &sig)?;
    let modes: Vec<usize> = (0..v.order()).collect();
    let mut solver = GroupSolver::new(v, &modes, &q, &GroupElement::identity(v.dims()), config)?;
    let mut best: Option<(f64, BoundaryCertificate)> = None;
    let consider = |c: &BoundaryCertificate, best: &mut Option<(f64, BoundaryCertificate)>| -> Result<()> {
        let (d, cert) = gstable_dual(v, alpha, c)?;
        if best.as_ref().is_none_or(|b| d > b.0) {
            *best = Some((d, cert));
        }
        Ok(())
    };
    for i in 0..v.order() {
        consider(&scalar_certificate(v.dims(), i), &mut best)?;
    }
    loop {
        let done = solver.run(CHECK_EVERY)?;
        for c in candidate_certificates(&solver) {
            consider(&c, &mut best)?;
        }
        if done {
            break;
        }
    }
    let (d, cert) = best.expect("scalar certificates are always considered");
    let primal = 1.0 / solver.best_objective();
    let dual = if d > 0.0 { 1.0 / d } else { f64::INFINITY };
    let spectra = solver.best_spectra().to_vec();
    let run = solver.finish()?;
    Ok(ApplicationResult {
        application: "g_stable_rank",
        primal_value: primal,
        dual_value: dual,
        gap: dual - primal,
        certificate: Some(cert),
        spectra,
        iterations: run.trace.iterations,
        status: run.trace.status,
        certificate_status: run.trace.certificate_status.clone(),
        rank: None,
        rank_status: None,
        rank_bounds: None,
        trace: run.trace,
    })
}
