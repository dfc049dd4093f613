//! Q-gradient flows and Q-subgradient methods for minimizing `Q(df_x)` over
//! the product PD manifold, with boundary certificates from the asymptotic
//! direction `u = log x(T) / R(T)`.

mod config;
mod group;

pub use config::{FlowConfig, Smoothing, StepRule};
pub use group::{group_subgradient_method, GroupRun, GroupSolver};

use crate::pd_geometry::{
    asymptotic_at_base, geodesic, log_map_at, transport_from_base, BoundaryCertificate, ProductPDPoint, TangentBlock,
};
use crate::spectral_convex::{Signature, SpectralObjective};
use crate::{Error, Result};

/// Per-step slack allowed before the integrator halves its step.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// A geodesically convex `f` seen through its base-transported differential.
pub trait FlowProblem: Send + Sync {
    fn signature(&self) -> Signature;

    fn value(&self, x: &ProductPDPoint) -> Result<f64>;

    /// `τ_{x→I} df_x`, a covector at the base point.
    fn differential(&self, x: &ProductPDPoint) -> Result<TangentBlock>;

    /// Recession function `f^∞` at a boundary point.
    fn recession(&self, xi: &BoundaryCertificate) -> Result<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowStatus {
    /// The traceless part of the step direction vanished.
    Converged,
    /// Best value stopped improving over the stall window.
    Stalled,
    HorizonReached,
    MaxIterations,
    /// The group element reached the conditioning limit.
    ConditionLimit,
    /// The caller ended a resumable run before any stopping rule fired.
    Stopped,
}

impl FlowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowStatus::Converged => "converged",
            FlowStatus::Stalled => "stalled",
            FlowStatus::HorizonReached => "horizon_reached",
            FlowStatus::MaxIterations => "max_iterations",
            FlowStatus::ConditionLimit => "condition_limit",
            FlowStatus::Stopped => "stopped",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertificateStatus {
    Extracted,
    /// `R(T) ≈ 0` or no displacement: the run sits at an interior optimum and
    /// no boundary certificate exists.
    Interior,
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct TraceSample {
    pub iter: usize,
    /// Elapsed time `sum δ_i` (or `sum h_i`).
    pub t: f64,
    /// Value of the (possibly smoothed) `Q` driving the step.
    pub q_value: f64,
    /// Raw objective `S(p)` at the transported differential.
    pub objective: f64,
    pub f_value: f64,
    pub r_cumulative: f64,
    /// Step used to leave this sample (0 for the final sample).
    pub step: f64,
    pub spectra: Vec<Vec<f64>>,
    pub differential: Option<TangentBlock>,
    /// `Z = Q ∂Q(p)` at the base; the velocity is `-τ_{I→x} Z`.
    pub velocity: Option<TangentBlock>,
}

#[derive(Clone, Debug)]
pub struct FlowTrace {
    pub samples: Vec<TraceSample>,
    pub initial_point: ProductPDPoint,
    /// `None` when the final point is too ill-conditioned to represent.
    pub final_point: Option<ProductPDPoint>,
    /// `log_map_at(x0, x_T)`, a tangent vector at `x0`.
    pub displacement: TangentBlock,
    pub final_direction: Option<TangentBlock>,
    pub certificate: Option<BoundaryCertificate>,
    pub certificate_status: CertificateStatus,
    pub energy_residual: Option<f64>,
    pub best_objective: f64,
    pub best_iter: usize,
    pub best_spectra: Vec<Vec<f64>>,
    pub final_objective: f64,
    pub r_total: f64,
    pub t_total: f64,
    pub iterations: usize,
    pub status: FlowStatus,
    pub step_halvings: usize,
}

/// One evaluation of the step direction.
#[derive(Clone, Debug)]
pub(crate) struct Drive {
    pub raw: f64,
    pub q: f64,
    pub p: TangentBlock,
    pub z: TangentBlock,
}

impl Drive {
    pub(crate) fn stationarity(&self) -> f64 {
        self.z.traceless().norm()
    }
}

/// `(Q(p), Q(p) ∂Q(p))`, through the Moreau envelope when `lambda` is given.
pub(crate) fn drive(q: &SpectralObjective, p: TangentBlock, lambda: Option<f64>) -> Result<Drive> {
    if !p.is_finite() {
        return Err(Error::NonFinite("transported differential".into()));
    }
    let d = match lambda {
        Some(l) => {
            let raw = q.lift_eval(&p)?;
            let (val, grad) = q.moreau_eval_grad(l, &p)?;
            Drive { raw, q: val, z: grad.scale(val), p }
        }
        None => {
            let (val, sub) = q.value_and_subgradient(&p)?;
            Drive { raw: val, q: val, z: sub.scale(val), p }
        }
    };
    // Q ∂Q points uphill where Q < 0
    if d.q < 0.0 {
        return Err(Error::Precondition(format!(
            "{} takes the negative value {} on a differential; Q-gradient methods need Q >= 0 (add a constant)",
            q.label(),
            d.q
        )));
    }
    Ok(d)
}

fn spectra_of(p: &TangentBlock) -> Vec<Vec<f64>> {
    p.blocks.iter().map(|b| b.eigh().values).collect()
}

/// `∇^Q f(x) = τ_{I→x}[Q(p) ∂Q(p)]` with `p = τ_{x→I} df_x`.
pub fn q_gradient(problem: &dyn FlowProblem, q: &SpectralObjective, x: &ProductPDPoint) -> Result<TangentBlock> {
    if !q.is_smooth() {
        return Err(Error::Unsupported {
            label: q.label().to_string(),
            operation: "Q-gradient of a nonsmooth objective; apply Moreau smoothing first".into(),
        });
    }
    let d = drive(q, problem.differential(x)?, None)?;
    transport_from_base(x, &d.z)
}

/// Bookkeeping shared by the point-based methods.
struct Recorder {
    samples: Vec<TraceSample>,
    best_history: Vec<f64>,
    best: f64,
    best_iter: usize,
    best_spectra: Vec<Vec<f64>>,
    record_every: usize,
    record_vectors: bool,
}

impl Recorder {
    fn new(config: &FlowConfig) -> Self {
        Self {
            samples: Vec::new(),
            best_history: Vec::new(),
            best: f64::INFINITY,
            best_iter: 0,
            best_spectra: Vec::new(),
            record_every: config.record_every,
            record_vectors: config.record_vectors,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn observe(&mut self, iter: usize, t: f64, d: &Drive, f_value: f64, r: f64, step: f64, force: bool) {
        let spectra = spectra_of(&d.p);
        if d.raw < self.best {
            self.best = d.raw;
            self.best_iter = iter;
            self.best_spectra = spectra.clone();
        }
        self.best_history.push(self.best);
        if force || iter % self.record_every == 0 {
            self.samples.push(TraceSample {
                iter,
                t,
                q_value: d.q,
                objective: d.raw,
                f_value,
                r_cumulative: r,
                step,
                spectra,
                differential: self.record_vectors.then(|| d.p.clone()),
                velocity: self.record_vectors.then(|| d.z.clone()),
            });
        }
    }

    /// Patches the step of the most recent sample at `iter`.
    fn set_step(&mut self, iter: usize, step: f64) {
        if let Some(s) = self.samples.last_mut() {
            if s.iter == iter {
                s.step = step;
            }
        }
    }

    fn stalled(&self, config: &FlowConfig) -> bool {
        let n = self.best_history.len();
        let w = config.stall_window;
        if n <= w {
            return false;
        }
        let old = self.best_history[n - 1 - w];
        let now = self.best_history[n - 1];
        old - now <= config.tol_stall * now.abs().max(f64::MIN_POSITIVE)
    }
}

/// Certificate of `u = displacement / R` via the asymptotic normal form at `x0`.
fn certificate_from(
    x0: &ProductPDPoint,
    displacement: &TangentBlock,
    r_total: f64,
) -> (Option<TangentBlock>, Option<BoundaryCertificate>, CertificateStatus) {
    if !(r_total > 1e-14) || displacement.norm() <= 1e-12 {
        return (None, None, CertificateStatus::Interior);
    }
    let u = displacement.scale(1.0 / r_total);
    match asymptotic_at_base(x0, &u) {
        Ok(c) => (Some(u), Some(c), CertificateStatus::Extracted),
        Err(e) => (Some(u), None, CertificateStatus::Failed(e.to_string())),
    }
}

/// Extracts the boundary certificate `asymptotic_at_base(x0, log_{x0} x_T / R)`.
pub fn extract_certificate(trace: &FlowTrace, x0: &ProductPDPoint) -> Result<BoundaryCertificate> {
    match certificate_from(x0, &trace.displacement, trace.r_total) {
        (_, Some(c), _) => Ok(c),
        (_, None, CertificateStatus::Failed(msg)) => Err(Error::Degenerate(msg)),
        _ => Err(Error::Degenerate(
            "R(T) is zero: the run sits at an interior optimum and no boundary certificate exists".into(),
        )),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    rec: Recorder,
    x0: &ProductPDPoint,
    x: ProductPDPoint,
    final_objective: f64,
    r: f64,
    t: f64,
    iterations: usize,
    status: FlowStatus,
    step_halvings: usize,
) -> Result<FlowTrace> {
    let displacement = log_map_at(x0, &x)?;
    let (dir, cert, cert_status) = certificate_from(x0, &displacement, r);
    Ok(FlowTrace {
        samples: rec.samples,
        initial_point: x0.clone(),
        final_point: Some(x),
        displacement,
        final_direction: dir,
        certificate: cert,
        certificate_status: cert_status,
        energy_residual: None,
        best_objective: rec.best,
        best_iter: rec.best_iter,
        best_spectra: rec.best_spectra,
        final_objective,
        r_total: r,
        t_total: t,
        iterations,
        status,
        step_halvings,
    })
}

/// Geodesic Euler integration of `ẋ = -∇^Q f(x)`.
///
/// The step is halved (and kept halved) whenever `Q` would increase by more
/// than [`MONOTONE_SLACK`]. A nonsmooth `Q` requires `config.smoothing`; the
/// integrator then uses the fixed envelope `e_{λ0} Q`.
pub fn integrate_flow(
    problem: &dyn FlowProblem,
    q: &SpectralObjective,
    x0: &ProductPDPoint,
    config: &FlowConfig,
) -> Result<FlowTrace> {
    config.validate()?;
    let lambda = match (q.is_smooth(), config.smoothing) {
        (_, Some(s)) => Some(s.lambda0),
        (true, None) => None,
        (false, None) => {
            return Err(Error::Unsupported {
                label: q.label().to_string(),
                operation: "gradient flow of a nonsmooth objective; configure Moreau smoothing".into(),
            })
        }
    };
    let mut rec = Recorder::new(config);
    let mut x = x0.clone();
    let mut d = drive(q, problem.differential(&x)?, lambda)?;
    let mut f = problem.value(&x)?;
    let (mut t, mut r, mut h) = (0.0, 0.0, config.ode_step);
    let mut halvings = 0;
    let mut status = FlowStatus::MaxIterations;
    rec.observe(0, t, &d, f, r, 0.0, true);
    let mut iter = 0;
    while iter < config.max_iters {
        if d.stationarity() <= config.stationarity_tol {
            status = FlowStatus::Converged;
            break;
        }
        let mut h_eff = h;
        if let Some(tmax) = config.horizon {
            let left = tmax - t;
            if left <= 1e-12 * tmax {
                status = FlowStatus::HorizonReached;
                break;
            }
            h_eff = h_eff.min(left);
        }
        let (x_new, d_new) = loop {
            let dir = transport_from_base(&x, &d.z.scale(-h_eff))?;
            let cand = geodesic(&x, &dir, 1.0)?;
            let dc = drive(q, problem.differential(&cand)?, lambda)?;
            if dc.q > d.q + MONOTONE_SLACK && halvings < 60 {
                h_eff *= 0.5;
                h = h.min(h_eff);
                halvings += 1;
                continue;
            }
            break (cand, dc);
        };
        rec.set_step(iter, h_eff);
        r += h_eff * d.q;
        t += h_eff;
        x = x_new;
        d = d_new;
        f = problem.value(&x)?;
        iter += 1;
        rec.observe(iter, t, &d, f, r, 0.0, iter == config.max_iters);
        if rec.stalled(config) {
            status = FlowStatus::Stalled;
            break;
        }
    }
    if let Some(tmax) = config.horizon {
        if status == FlowStatus::MaxIterations && t >= tmax * (1.0 - 1e-12) {
            status = FlowStatus::HorizonReached;
        }
    }
    if rec.samples.last().map(|s| s.iter) != Some(iter) {
        rec.observe(iter, t, &d, f, r, 0.0, true);
        rec.best_history.pop();
    }
    let final_objective = d.raw;
    let mut trace = finish(rec, x0, x, final_objective, r, t, iter, status, halvings)?;
    if config.record_vectors && config.record_every == 1 {
        let smooth_q = match lambda {
            Some(l) => q.smoothed(l)?,
            None => q.clone(),
        };
        trace.energy_residual = Some(energy_residual(&trace, &smooth_q)?);
    }
    Ok(trace)
}

/// `x_{i+1} = geodesic(x_i, -δ_i τ_{I→x_i} Z_i, 1)` with
/// `Z_i = Q(p_i) ∂Q(p_i)` (through the envelope when smoothing is set).
pub fn subgradient_method(
    problem: &dyn FlowProblem,
    q: &SpectralObjective,
    x0: &ProductPDPoint,
    config: &FlowConfig,
) -> Result<FlowTrace> {
    config.validate()?;
    let lam = |i: usize| config.smoothing.map(|s| s.lambda(i));
    let mut rec = Recorder::new(config);
    let mut x = x0.clone();
    let mut d = drive(q, problem.differential(&x)?, lam(0))?;
    let mut f = problem.value(&x)?;
    let (mut t, mut r) = (0.0, 0.0);
    let mut status = FlowStatus::MaxIterations;
    rec.observe(0, t, &d, f, r, 0.0, true);
    let mut iter = 0;
    while iter < config.max_iters {
        if d.stationarity() <= config.stationarity_tol {
            status = FlowStatus::Converged;
            break;
        }
        let delta = config.step_rule.step(iter);
        rec.set_step(iter, delta);
        let dir = transport_from_base(&x, &d.z.scale(-delta))?;
        x = geodesic(&x, &dir, 1.0)?;
        r += delta * d.q;
        t += delta;
        iter += 1;
        d = drive(q, problem.differential(&x)?, lam(iter))?;
        f = problem.value(&x)?;
        rec.observe(iter, t, &d, f, r, 0.0, iter == config.max_iters);
        if rec.stalled(config) {
            status = FlowStatus::Stalled;
            break;
        }
    }
    if rec.samples.last().map(|s| s.iter) != Some(iter) {
        rec.observe(iter, t, &d, f, r, 0.0, true);
        rec.best_history.pop();
    }
    let final_objective = d.raw;
    finish(rec, x0, x, final_objective, r, t, iter, status, 0)
}

/// `(Q²/2)*(v) = inf_{s>0} s Q*(v/s) + s²/2`, by a 1-D convex search.
pub fn half_square_conjugate(q: &SpectralObjective, v: &TangentBlock) -> Result<f64> {
    v.check_signature(q.signature())?;
    let dec = crate::spectral_convex::SpectralDecomposition::of(v);
    let p = dec.vector();
    let oracle = q.oracle().clone();
    let phi = |s: f64| -> f64 {
        let scaled: Vec<f64> = p.iter().map(|x| x / s).collect();
        let c = oracle.conjugate(&scaled);
        if c == f64::INFINITY {
            f64::INFINITY
        } else {
            s * c + 0.5 * s * s
        }
    };
    // find a finite point, then an upper bracket where phi starts increasing
    let mut s = 1.0;
    let mut tries = 0;
    while !phi(s).is_finite() {
        s *= 2.0;
        tries += 1;
        if tries > 200 {
            return Ok(f64::INFINITY);
        }
    }
    while phi(2.0 * s) < phi(s) {
        s *= 2.0;
    }
    let hi = 2.0 * s;
    // golden-section search on (0, hi]; ties at +inf move the bracket right
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut dd = a + g * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(dd));
    for _ in 0..300 {
        if fc < fd {
            b = dd;
            dd = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = dd;
            fc = fd;
            dd = a + g * (b - a);
            fd = phi(dd);
        }
        if b - a <= 1e-15 * b {
            break;
        }
    }
    Ok(fc.min(fd).min(phi(s)))
}

/// Energy identity residual
/// `|f(x_T) - f(x_0) + ∫ (Q²/2)(df) + (Q²/2)*(-ẋ)| / (1 + |f(x_0) - f(x_T)|)`
/// with trapezoidal quadrature over consecutive samples. `q` must be the
/// smooth objective that drove the flow.
pub fn energy_residual(trace: &FlowTrace, q: &SpectralObjective) -> Result<f64> {
    let s = &trace.samples;
    if s.is_empty() {
        return Err(Error::Precondition("energy residual needs at least one sample".into()));
    }
    if s.len() == 1 {
        return Ok(0.0);
    }
    if s.windows(2).any(|w| w[1].iter != w[0].iter + 1) {
        return Err(Error::Precondition("energy residual needs every step recorded (record_every = 1)".into()));
    }
    let mut integrand = Vec::with_capacity(s.len());
    for sample in s {
        let z = sample
            .velocity
            .as_ref()
            .ok_or_else(|| Error::Precondition("energy residual needs recorded velocities".into()))?;
        integrand.push(0.5 * sample.q_value * sample.q_value + half_square_conjugate(q, z)?);
    }
    let mut integral = 0.0;
    for k in 0..s.len() - 1 {
        integral += 0.5 * (s[k + 1].t - s[k].t) * (integrand[k] + integrand[k + 1]);
    }
    let df = s[s.len() - 1].f_value - s[0].f_value;
    Ok((df + integral).abs() / (1.0 + df.abs()))
}

/// Weak-duality bound `-f^∞(ξ) - Q*(-Y_ξ)`; `-∞` when the conjugate is
/// infinite.
pub fn dual_value(problem: &dyn FlowProblem, q: &SpectralObjective, xi: &BoundaryCertificate) -> Result<f64> {
    xi.validate()?;
    let y = xi.to_tangent();
    y.check_signature(q.signature())?;
    let conj = q.conjugate_eval(&y.scale(-1.0))?;
    if conj == f64::INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let rec = problem.recession(xi)?;
    Ok(-rec - conj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_gaussian, seeded_rng};
    use crate::spectral_convex::{builtin_objective, ObjectiveSpec};
    use crate::tensor_action::{DenseTensor, KempfNessProblem};

    fn random_problem(dims: &[usize], seed: u64) -> KempfNessProblem {
        let mut rng = seeded_rng(seed);
        KempfNessProblem::new(&DenseTensor::from_fn(dims, |_| complex_gaussian(&mut rng))).unwrap()
    }

    #[test]
    fn frobenius_half_square_conjugate_is_half_norm() {
        let p = random_problem(&[2, 3], 1);
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &p.signature()).unwrap();
        let v = p.differential(&ProductPDPoint::base(&p.signature())).unwrap().scale(3.0);
        let c = half_square_conjugate(&q, &v).unwrap();
        // the ball indicator tolerates 1e-10 relative slack
        assert!((c - 0.5 * v.norm().powi(2)).abs() < 1e-8 * c);
    }

    #[test]
    fn zero_step_is_stationary() {
        let p = random_problem(&[2, 2, 2], 2);
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &p.signature()).unwrap();
        let x0 = ProductPDPoint::base(&p.signature());
        let cfg = FlowConfig { max_iters: 20, step_rule: StepRule::Constant(0.0), ..Default::default() };
        let tr = subgradient_method(&p, &q, &x0, &cfg).unwrap();
        assert_eq!(tr.final_point.unwrap(), x0);
        assert_eq!(tr.certificate_status, CertificateStatus::Interior);
    }

    #[test]
    fn q_gradient_rejects_nonsmooth() {
        let p = random_problem(&[2, 2], 3);
        let q = builtin_objective(&ObjectiveSpec::TraceNormSumWeighted { alpha: vec![1.0, 1.0] }, &p.signature()).unwrap();
        let x0 = ProductPDPoint::base(&p.signature());
        assert!(matches!(q_gradient(&p, &q, &x0), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn flow_is_monotone_and_weakly_dual() {
        let p = random_problem(&[2, 3, 2], 4);
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &p.signature()).unwrap();
        let x0 = ProductPDPoint::base(&p.signature());
        let cfg = FlowConfig { max_iters: 300, ode_step: 0.1, ..Default::default() };
        let tr = integrate_flow(&p, &q, &x0, &cfg).unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].q_value <= w[0].q_value + 1e-7);
            assert!(w[1].r_cumulative >= w[0].r_cumulative);
        }
        let cert = tr.certificate.clone().unwrap();
        let dual = dual_value(&p, &q, &cert).unwrap();
        assert!(dual <= tr.best_objective + 1e-8, "{dual} > {}", tr.best_objective);
        // full P_n: |μ|_F ≥ |I/n|-type bound, so the dual should be informative
        assert!(dual > 0.0);
    }
}
