use super::{candidate_certificates, minimize_scale, ApplicationResult, CHECK_EVERY};
use crate::flow_solver::{FlowConfig, FlowProblem, GroupSolver, Smoothing};
use crate::pd_geometry::BoundaryCertificate;
use crate::spectral_convex::{builtin_objective, ObjectiveSpec, Signature, SpectralDecomposition, DEFAULT_SMOOTHING};
use crate::tensor_action::{DenseTensor, GroupElement, KempfNessProblem};
use crate::{Error, Result};

/// Upper bound `Φ_v^∞(ξ) + sum_i θ_i log2 sum_j 2^{-λ_ij / θ_i}` on `E_θ(v)`.
pub fn qfunc_upper_bound(v: &DenseTensor, theta: &[f64], xi: &BoundaryCertificate) -> Result<f64> {
    let (rec, conj) = qfunc_parts(v, theta, xi)?;
    Ok(rec + conj(1.0))
}

/// `Φ_v^∞(ξ)` and `c -> S*(-c Y_ξ)`.
fn qfunc_parts(v: &DenseTensor, theta: &[f64], xi: &BoundaryCertificate) -> Result<(f64, impl Fn(f64) -> f64)> {
    let p = KempfNessProblem::new(v)?;
    let sig = p.signature();
    let s = builtin_objective(&ObjectiveSpec::NegEntropyWeighted { theta: theta.to_vec() }, &sig)?;
    let y = xi.to_tangent();
    y.check_signature(&sig)?;
    let rec = p.recession(xi)?;
    let lam = SpectralDecomposition::of(&y).vector();
    let oracle = s.oracle().clone();
    Ok((rec, move |c: f64| oracle.conjugate(&lam.iter().map(|l| -c * l).collect::<Vec<_>>())))
}

/// Best bound over positive rescalings of `ξ`; returns the bound and the
/// rescaled certificate.
fn qfunc_line_search(v: &DenseTensor, theta: &[f64], xi: &BoundaryCertificate) -> Result<(f64, BoundaryCertificate)> {
    let (rec, conj) = qfunc_parts(v, theta, xi)?;
    let (c, val) = minimize_scale(|c| c * rec + conj(c));
    Ok((val, xi.scale(c)))
}

/// Logarithmic quantum functional `E_θ(v) = max_g sum_i θ_i H(μ_i(g·v))`.
///
/// Minimizes `-sum θ_i H + C` (shifted to stay positive) in group form with
/// Moreau smoothing; the entropy has no subgradient on singular marginals,
/// so a missing smoothing setting is replaced by the default schedule.
pub fn quantum_functional(v: &DenseTensor, theta: &[f64], config: &FlowConfig) -> Result<ApplicationResult> {
    if theta.len() != v.order() {
        return Err(Error::DimensionMismatch(format!("{} weights for a tensor of order {}", theta.len(), v.order())));
    }
    let sig = Signature::blocks(v.dims());
    let s = builtin_objective(&ObjectiveSpec::NegEntropyWeighted { theta: theta.to_vec() }, &sig)?;
    let shift: f64 = theta.iter().zip(v.dims()).map(|(t, &n)| t * (n as f64).log2()).sum::<f64>() + 1.0;
    let q = s.shifted(shift);
    let mut cfg = config.clone();
    if cfg.smoothing.is_none() {
        cfg.smoothing = Some(Smoothing::scheduled(DEFAULT_SMOOTHING));
    }
    let modes: Vec<usize> = (0..v.order()).collect();
    let mut solver = GroupSolver::new(v, &modes, &q, &GroupElement::identity(v.dims()), &cfg)?;
    let zero = BoundaryCertificate::zero(&sig);
    let mut best = (qfunc_upper_bound(v, theta, &zero)?, zero);
    loop {
        let done = solver.run(CHECK_EVERY)?;
        for c in candidate_certificates(&solver) {
            let (val, cert) = qfunc_line_search(v, theta, &c)?;
            if val < best.0 {
                best = (val, cert);
            }
        }
        if done {
            break;
        }
    }
    let primal = shift - solver.best_objective();
    let spectra = solver.best_spectra().to_vec();
    let run = solver.finish()?;
    Ok(ApplicationResult {
        application: "quantum_functional",
        primal_value: primal,
        dual_value: best.0,
        gap: best.0 - primal,
        certificate: Some(best.1),
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
