//! Subgradient method in group form: `g_{i+1} = exp(-δ_i Z_i / 2) g_i`.
//!
//! The scaled tensor `w = g·v / |g·v|` is carried along directly, so the
//! moment map never sees the (possibly huge) entries of `g`. The group
//! element is tracked separately only to recover the displacement
//! `log(g^† g)` for the certificate; it is renormalized to `|det g_i| = 1`
//! periodically, with the removed scalars kept as log offsets.

use super::{certificate_from, drive, CertificateStatus, Drive, FlowConfig, FlowStatus, FlowTrace, Recorder};
use crate::pd_geometry::{BoundaryCertificate, ProductPDPoint, TangentBlock};
use crate::spectral_convex::{HermitianBlock, Signature, SpectralObjective};
use crate::tensor_action::{act_on_modes, moment_map_modes, DenseTensor, GroupElement};
use crate::{CMat, Error, Result};

/// Entries of `g` beyond this freeze the certificate bookkeeping.
const GROUP_SCALE_LIMIT: f64 = 1e100;

/// Outcome of a group-form run.
#[derive(Clone, Debug)]
pub struct GroupRun {
    pub trace: FlowTrace,
    /// Current group element up to the per-factor scalars removed by
    /// renormalization.
    pub final_group: GroupElement,
    /// `g·v / |g·v|` at the last iterate.
    pub final_tensor: DenseTensor,
    /// `2/n_i · sum log|det|` removed from factor `i`.
    pub scalar_log_offsets: Vec<f64>,
    pub renormalizations: usize,
    /// Iteration at which the group element stopped being tracked, if any.
    pub frozen_at: Option<usize>,
}

/// Resumable state of the group-form subgradient method.
pub struct GroupSolver<'a> {
    q: &'a SpectralObjective,
    config: FlowConfig,
    modes: Vec<usize>,
    x0: ProductPDPoint,
    g: Vec<CMat>,
    offsets: Vec<f64>,
    frozen: Option<(usize, f64)>,
    w: DenseTensor,
    f: f64,
    t: f64,
    r: f64,
    iter: usize,
    d: Drive,
    rec: Recorder,
    status: Option<FlowStatus>,
    renormalizations: usize,
}

impl<'a> GroupSolver<'a> {
    /// `g0` acts on `modes`; the objective's signature must match those
    /// modes' dimensions.
    pub fn new(
        v: &DenseTensor,
        modes: &[usize],
        q: &'a SpectralObjective,
        g0: &GroupElement,
        config: &FlowConfig,
    ) -> Result<Self> {
        config.validate()?;
        let dims: Vec<usize> = modes
            .iter()
            .map(|&m| {
                v.dims()
                    .get(m)
                    .copied()
                    .ok_or_else(|| Error::DimensionMismatch(format!("mode {m} out of range for order {}", v.order())))
            })
            .collect::<Result<_>>()?;
        if g0.dims() != dims {
            return Err(Error::DimensionMismatch(format!("group element dims {:?} vs active modes {:?}", g0.dims(), dims)));
        }
        let sig = Signature::blocks(&dims);
        if q.signature() != &sig {
            return Err(Error::DimensionMismatch(format!(
                "objective blocks {:?} vs active modes {:?}",
                q.block_dims(),
                dims
            )));
        }
        let v = v.normalized()?;
        let x0 = g0.gram()?;
        let gv = act_on_modes(g0.factors(), modes, &v)?;
        let nsq = gv.norm_sqr();
        let f = nsq.ln();
        let w = gv.scale(1.0 / nsq.sqrt());
        let d = drive(q, TangentBlock::from_blocks(moment_map_modes(&w, modes)?), config.smoothing.map(|s| s.lambda(0)))?;
        let mut rec = Recorder::new(config);
        rec.observe(0, 0.0, &d, f, 0.0, 0.0, true);
        Ok(Self {
            q,
            config: config.clone(),
            modes: modes.to_vec(),
            x0,
            g: g0.factors().to_vec(),
            offsets: vec![0.0; dims.len()],
            frozen: None,
            w,
            f,
            t: 0.0,
            r: 0.0,
            iter: 0,
            d,
            rec,
            status: None,
            renormalizations: 0,
        })
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }

    pub fn status(&self) -> Option<FlowStatus> {
        self.status
    }

    pub fn best_objective(&self) -> f64 {
        self.rec.best
    }

    pub fn best_spectra(&self) -> &[Vec<f64>] {
        &self.rec.best_spectra
    }

    pub fn current_objective(&self) -> f64 {
        self.d.raw
    }

    pub fn current_tensor(&self) -> &DenseTensor {
        &self.w
    }

    /// `Z = S ∂S` (or its smoothed version) at the current iterate, in the
    /// frame of the scaled tensor.
    pub fn current_direction(&self) -> &TangentBlock {
        &self.d.z
    }

    /// Current group element up to per-factor scalars.
    pub fn current_group(&self) -> GroupElement {
        GroupElement::from_factors_unchecked(self.g.clone())
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn r_total(&self) -> f64 {
        self.frozen.map_or(self.r, |(_, r)| r)
    }

    /// Runs up to `iters` more iterations (bounded by `max_iters`). Returns
    /// `true` once the run has terminated.
    pub fn run(&mut self, iters: usize) -> Result<bool> {
        let stop = self.config.max_iters.min(self.iter.saturating_add(iters));
        while self.status.is_none() && self.iter < stop {
            self.step()?;
        }
        if self.status.is_none() && self.iter >= self.config.max_iters {
            self.status = Some(FlowStatus::MaxIterations);
        }
        Ok(self.status.is_some())
    }

    fn step(&mut self) -> Result<()> {
        if self.d.stationarity() <= self.config.stationarity_tol {
            self.status = Some(FlowStatus::Converged);
            return Ok(());
        }
        let delta = self.config.step_rule.step(self.iter);
        self.rec.set_step(self.iter, delta);
        let e: Vec<CMat> =
            self.d.z.blocks.iter().map(|z| z.scale(-0.5 * delta).map_spectrum(f64::exp).into_matrix()).collect();
        let wn = act_on_modes(&e, &self.modes, &self.w)?;
        let nsq = wn.norm_sqr();
        if !(nsq.is_finite() && nsq > 0.0) {
            return Err(Error::NonFinite(format!("scaled tensor norm at iteration {}", self.iter)));
        }
        self.f += nsq.ln();
        self.w = wn.scale(1.0 / nsq.sqrt());
        self.r += delta * self.d.q;
        self.t += delta;
        if self.frozen.is_none() {
            let g: Vec<CMat> = e.iter().zip(&self.g).map(|(a, b)| a * b).collect();
            let bad = g.iter().any(|m| m.iter().any(|z| !(z.norm() <= GROUP_SCALE_LIMIT)));
            if bad {
                log::warn!("group element left the representable range at iteration {}; certificate frozen", self.iter);
                self.frozen = Some((self.iter + 1, self.r));
            } else {
                self.g = g;
            }
        }
        self.iter += 1;
        if self.frozen.is_none() && self.iter % self.config.renormalize_every == 0 {
            self.renormalize();
        }
        if self.frozen.is_none() && self.condition() > self.config.max_condition {
            log::info!("group element reached condition {:.3e} at iteration {}", self.condition(), self.iter);
            self.status = Some(FlowStatus::ConditionLimit);
        }
        let lam = self.config.smoothing.map(|s| s.lambda(self.iter));
        self.d = drive(self.q, TangentBlock::from_blocks(moment_map_modes(&self.w, &self.modes)?), lam)?;
        let force = self.iter == self.config.max_iters;
        self.rec.observe(self.iter, self.t, &self.d, self.f, self.r, 0.0, force);
        if self.rec.stalled(&self.config) {
            self.status = Some(FlowStatus::Stalled);
        }
        Ok(())
    }

    /// Largest condition number among the factors of `g`.
    pub fn condition(&self) -> f64 {
        self.g
            .iter()
            .map(|g| {
                let s = g.singular_values();
                let hi = s.iter().cloned().fold(0.0, f64::max);
                let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
                hi / lo
            })
            .fold(1.0, f64::max)
    }

    fn renormalize(&mut self) {
        for (g, off) in self.g.iter_mut().zip(self.offsets.iter_mut()) {
            let n = g.nrows() as f64;
            let ld = g.determinant().norm().ln();
            if ld.is_finite() {
                *g *= num_complex::Complex64::from((-ld / n).exp());
                *off += 2.0 * ld / n;
            }
        }
        self.renormalizations += 1;
        log::debug!("renormalized group element at iteration {}", self.iter);
    }

    /// `log_{x0}(g^† g)` as a tangent vector at `x0 = g0^† g0`.
    pub fn displacement(&self) -> TangentBlock {
        let blocks = self
            .g
            .iter()
            .zip(&self.offsets)
            .enumerate()
            .map(|(i, (g, &off))| {
                let m = g * self.x0.inv_sqrt_block(i).as_matrix();
                let svd = m.svd(false, true);
                let vt = svd.v_t.expect("right singular vectors requested");
                let logs: Vec<f64> = svd.singular_values.iter().map(|s| 2.0 * s.ln()).collect();
                let l = HermitianBlock::from_spectral(&vt.adjoint(), &logs);
                l.congruence(self.x0.sqrt_block(i)).axpy(off, &self.x0.blocks()[i])
            })
            .collect();
        TangentBlock::from_blocks(blocks)
    }

    /// Direction `u = displacement / R` and its asymptotic normal form.
    pub fn certificate(&self) -> (Option<TangentBlock>, Option<BoundaryCertificate>, CertificateStatus) {
        certificate_from(&self.x0, &self.displacement(), self.r_total())
    }

    pub fn finish(mut self) -> Result<GroupRun> {
        if self.status.is_none() {
            self.status =
                Some(if self.iter >= self.config.max_iters { FlowStatus::MaxIterations } else { FlowStatus::Stopped });
        }
        if self.rec.samples.last().map(|s| s.iter) != Some(self.iter) {
            self.rec.observe(self.iter, self.t, &self.d, self.f, self.r, 0.0, true);
            self.rec.best_history.pop();
        }
        let displacement = self.displacement();
        let (dir, cert, cert_status) = certificate_from(&self.x0, &displacement, self.r_total());
        let scaled: Vec<HermitianBlock> = self
            .g
            .iter()
            .zip(&self.offsets)
            .map(|(g, off)| HermitianBlock::from_matrix_unchecked(g.adjoint() * g).scale(off.exp()))
            .collect();
        let final_point = ProductPDPoint::from_blocks(scaled).ok();
        let trace = FlowTrace {
            samples: self.rec.samples,
            initial_point: self.x0,
            final_point,
            displacement,
            final_direction: dir,
            certificate: cert,
            certificate_status: cert_status,
            energy_residual: None,
            best_objective: self.rec.best,
            best_iter: self.rec.best_iter,
            best_spectra: self.rec.best_spectra,
            final_objective: self.d.raw,
            r_total: self.frozen.map_or(self.r, |(_, r)| r),
            t_total: self.t,
            iterations: self.iter,
            status: self.status.unwrap_or(FlowStatus::MaxIterations),
            step_halvings: 0,
        };
        Ok(GroupRun {
            trace,
            final_group: GroupElement::from_factors_unchecked(self.g),
            final_tensor: self.w,
            scalar_log_offsets: self.offsets,
            renormalizations: self.renormalizations,
            frozen_at: self.frozen.map(|(i, _)| i),
        })
    }
}

/// Runs the group-form method on all modes of `v` to completion.
pub fn group_subgradient_method(
    v: &DenseTensor,
    q: &SpectralObjective,
    g0: &GroupElement,
    config: &FlowConfig,
) -> Result<GroupRun> {
    let modes: Vec<usize> = (0..v.order()).collect();
    let mut s = GroupSolver::new(v, &modes, q, g0, config)?;
    s.run(config.max_iters)?;
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow_solver::{subgradient_method, StepRule};
    use crate::pd_geometry::distance;
    use crate::random::{complex_gaussian, random_complex_matrix, seeded_rng};
    use crate::spectral_convex::{builtin_objective, ObjectiveSpec};
    use crate::tensor_action::KempfNessProblem;

    #[test]
    fn unit_tensor_is_already_optimal() {
        let v = DenseTensor::unit(3, 3);
        let sig = Signature::blocks(&[3, 3, 3]);
        let q = builtin_objective(&ObjectiveSpec::TraceDistToUniform { weight: 1.0 }, &sig).unwrap();
        let run = group_subgradient_method(&v, &q, &GroupElement::identity(&[3, 3, 3]), &FlowConfig::default()).unwrap();
        assert!(run.trace.best_objective < 1e-12);
    }

    #[test]
    fn group_iterates_match_point_iterates() {
        let mut rng = seeded_rng(11);
        let v = DenseTensor::from_fn(&[2, 3, 2], |_| complex_gaussian(&mut rng));
        let dims = [2, 3, 2];
        let g0 = GroupElement::new(dims.iter().map(|&n| random_complex_matrix(n, n, &mut rng)).collect()).unwrap();
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &Signature::blocks(&dims)).unwrap();
        let p = KempfNessProblem::new(&v).unwrap();
        for iters in [1, 10, 50] {
            let cfg = FlowConfig { max_iters: iters, step_rule: StepRule::Constant(0.2), ..Default::default() };
            let run = group_subgradient_method(&v, &q, &g0, &cfg).unwrap();
            let tr = subgradient_method(&p, &q, &g0.gram().unwrap(), &cfg).unwrap();
            let a = run.trace.final_point.unwrap();
            let b = tr.final_point.unwrap();
            assert!(distance(&a, &b).unwrap() < 1e-8, "iters {iters}");
            assert!((run.trace.r_total - tr.r_total).abs() < 1e-10);
            assert!(run.trace.displacement.sub(&tr.displacement).norm() < 1e-8);
            let fa = run.trace.samples.last().unwrap().f_value;
            let fb = tr.samples.last().unwrap().f_value;
            assert!((fa - fb).abs() < 1e-9);
        }
    }

    #[test]
    fn renormalization_preserves_displacement() {
        let mut rng = seeded_rng(5);
        let v = DenseTensor::from_fn(&[2, 2, 2], |_| complex_gaussian(&mut rng));
        let sig = Signature::blocks(&[2, 2, 2]);
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &sig).unwrap();
        let g0 = GroupElement::identity(&[2, 2, 2]);
        let base = FlowConfig { max_iters: 30, step_rule: StepRule::Constant(0.3), ..Default::default() };
        let a = group_subgradient_method(&v, &q, &g0, &base).unwrap();
        let b = group_subgradient_method(&v, &q, &g0, &FlowConfig { renormalize_every: 7, ..base }).unwrap();
        assert!(b.renormalizations > 0);
        assert!(a.trace.displacement.sub(&b.trace.displacement).norm() < 1e-9);
    }
}
