//! Quantum functionals, G-stable rank and noncommutative rank: each is a
//! Kempf–Ness problem with a particular spectral objective, solved in group
//! form and bracketed by weak duality.

mod gstable;
mod ncrank;
mod pencil;
mod qfunc;

pub use gstable::{g_stable_rank, gstable_dual};
pub use ncrank::{ncrank, pencil_mu2, refine_fr_pair, FrPair, RankStatus, FLAG_GAP_TOL, FR_RESIDUAL_TOL, MAX_RESTARTS, PRIMAL_MARGIN, STEP_BACKOFF};
pub use pencil::{check_common_kernel, ncrank_blowup_oracle, random_pencil, KernelCheck, MatrixPencil, RANK_TOL};
pub use qfunc::{quantum_functional, qfunc_upper_bound};

use crate::flow_solver::{CertificateStatus, FlowConfig, FlowStatus, FlowTrace, GroupSolver, Smoothing};
use crate::pd_geometry::{BoundaryCertificate, FlagWeights};
use crate::spectral_convex::{builtin_objective, qr_positive, ObjectiveSpec, Signature, DEFAULT_SMOOTHING};
use crate::tensor_action::{DenseTensor, KempfNessProblem};
use crate::{flow_solver, Error, Result};

/// Iterations between certificate checks in the chunked drivers.
pub const CHECK_EVERY: usize = 500;

/// Which application a certificate is evaluated for.
#[derive(Clone, Debug, PartialEq)]
pub enum Application {
    QuantumFunctional { theta: Vec<f64> },
    GStableRank { alpha: Vec<f64> },
    NcRank,
}

impl Application {
    pub fn name(&self) -> &'static str {
        match self {
            Application::QuantumFunctional { .. } => "quantum_functional",
            Application::GStableRank { .. } => "g_stable_rank",
            Application::NcRank => "ncrank",
        }
    }
}

/// Primal estimate, dual bound and certificate of one application run.
///
/// `primal_value` and `dual_value` are in the application's own
/// orientation: for the quantum functional (`E_θ`) and the G-stable rank the
/// primal is a lower bound and the dual an upper bound; for the nc-rank both
/// are values of the trace-distance objective, the primal an upper and the
/// dual a lower bound on its infimum. `gap` is always the nonnegative
/// difference.
#[derive(Clone, Debug)]
pub struct ApplicationResult {
    pub application: &'static str,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub certificate: Option<BoundaryCertificate>,
    /// Spectra of the moment map at the best iterate.
    pub spectra: Vec<Vec<f64>>,
    pub iterations: usize,
    pub status: FlowStatus,
    pub certificate_status: CertificateStatus,
    /// nc-rank only.
    pub rank: Option<usize>,
    pub rank_status: Option<RankStatus>,
    pub rank_bounds: Option<(usize, usize)>,
    pub trace: FlowTrace,
}

impl ApplicationResult {
    /// `dual - primal` in the minimization orientation; weak duality says
    /// this never exceeds 0 (up to rounding).
    pub fn duality_violation(&self) -> f64 {
        match self.application {
            "ncrank" => self.dual_value - self.primal_value,
            _ => self.primal_value - self.dual_value,
        }
    }
}

/// Solver defaults for the applications: `10^4` iterations, steps
/// `1/sqrt(i+1)`, Moreau smoothing `0.1/sqrt(i+1)`.
pub fn application_config() -> FlowConfig {
    FlowConfig {
        max_iters: 10_000,
        smoothing: Some(Smoothing::scheduled(DEFAULT_SMOOTHING)),
        record_every: 10,
        ..FlowConfig::default()
    }
}

/// Candidate boundary points read off a group run: the flow certificate
/// `log(g^† g)/R` and the local steepest direction `-Z` at the current
/// iterate, carried back to the original frame through `g`.
pub(crate) fn candidate_certificates(solver: &GroupSolver) -> Vec<BoundaryCertificate> {
    let mut out = Vec::new();
    if let (_, Some(c), _) = solver.certificate() {
        out.push(c);
    }
    if let Some(c) = local_certificate(solver) {
        out.push(c);
    }
    out
}

fn local_certificate(solver: &GroupSolver) -> Option<BoundaryCertificate> {
    let y = solver.current_direction().scale(-1.0);
    if !(y.norm() > 0.0) || solver.is_frozen() {
        return None;
    }
    // the ray exp(tY) in the frame of g·v is g^† exp(tY) g for v: its flag
    // is spanned by the columns of g^† k_Y
    let g = solver.current_group();
    let blocks = y
        .blocks
        .iter()
        .zip(g.factors())
        .map(|(b, gi)| {
            let e = b.eigh();
            let (k, _) = qr_positive(&(gi.adjoint() * &e.basis));
            FlagWeights { basis: k, weights: e.values }
        })
        .collect();
    let c = BoundaryCertificate { euclid_dir: Vec::new(), blocks };
    c.validate().ok().map(|_| c)
}

/// Evaluates a certificate for `app` on the tensor `v`, in the orientation of
/// [`ApplicationResult::dual_value`]: an upper bound on `E_θ`, an upper bound
/// on the G-stable rank (`+∞` when vacuous), or a lower bound on the nc-rank
/// trace-distance objective (`v` being the pencil tensor).
pub fn certify(v: &DenseTensor, app: &Application, xi: &BoundaryCertificate) -> Result<f64> {
    xi.validate()?;
    match app {
        Application::QuantumFunctional { theta } => qfunc_upper_bound(v, theta, xi),
        Application::GStableRank { alpha } => {
            let d = certify_objective(v, &(0..v.order()).collect::<Vec<_>>(), &ObjectiveSpec::OpNormMaxWeighted { alpha: alpha.clone() }, xi)?;
            Ok(if d > 0.0 { 1.0 / d } else { f64::INFINITY })
        }
        Application::NcRank => {
            if v.order() != 3 || v.dims()[0] != v.dims()[1] {
                return Err(Error::DimensionMismatch(format!("pencil tensor must be n x n x m, got {:?}", v.dims())));
            }
            let n = v.dims()[0] as f64;
            let d = certify_objective(v, &[0, 1], &ObjectiveSpec::TraceDistToUniform { weight: n / 2.0 }, xi)?;
            Ok(d / (n / 2.0))
        }
    }
}

/// Raw weak-duality value `-Φ_v^∞(ξ) - S*(-Y_ξ)` for an objective on the
/// given modes.
pub fn certify_objective(v: &DenseTensor, modes: &[usize], spec: &ObjectiveSpec, xi: &BoundaryCertificate) -> Result<f64> {
    let p = KempfNessProblem::with_modes(v, modes.to_vec())?;
    let sig = Signature::blocks(&modes.iter().map(|&m| v.dims()[m]).collect::<Vec<_>>());
    let q = builtin_objective(spec, &sig)?;
    flow_solver::dual_value(&p, &q, xi)
}

/// Minimizes a convex function of a scale `c >= 0` (bracket by doubling,
/// then golden section). Returns `(c, value)`.
pub(crate) fn minimize_scale(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let f0 = f(0.0);
    let mut hi = 1.0;
    let mut prev = f(hi);
    if !(prev < f0) {
        hi = 1.0;
    } else {
        for _ in 0..60 {
            let next = f(2.0 * hi);
            if !(next < prev) {
                break;
            }
            prev = next;
            hi *= 2.0;
        }
        hi *= 2.0;
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-12 * b.max(1e-300) {
            break;
        }
    }
    let mut best = (0.0, f0);
    for (s, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_search_finds_quadratic_minimum() {
        let (c, v) = minimize_scale(|c| (c - 37.0).powi(2) + 1.0);
        assert!((c - 37.0).abs() < 1e-5 && (v - 1.0).abs() < 1e-9);
        let (c, _) = minimize_scale(|c| c + 1.0);
        assert_eq!(c, 0.0);
    }
}
