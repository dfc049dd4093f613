//! The `ResultRecord` written by every solver command.

use std::collections::BTreeMap;

use qflow::applications::{
    ApplicationResult, CHECK_EVERY, FLAG_GAP_TOL, FR_RESIDUAL_TOL, PRIMAL_MARGIN, RANK_TOL,
};
use qflow::flow_solver::{CertificateStatus, FlowConfig, FlowTrace, StepRule, MONOTONE_SLACK};
use qflow::pd_geometry::{BoundaryCertificate, PD_TOL};
use qflow::spectral_convex::oracle::{BALL_TOL, ENTROPY_CLAMP_TOL, SIMPLEX_SUM_TOL};
use qflow::spectral_convex::TIE_TOL;
use qflow::tensor_action::{DET_GUARD, SUPPORT_TOL};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::{nums, CertificateJson, Num};

/// Samples kept in the downsampled trace.
pub const TRACE_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEcho {
    pub lambda0: Num,
    pub schedule: String,
}

/// Every knob that influenced a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub max_iters: usize,
    pub step_rule: String,
    pub step: Num,
    pub smoothing: Option<SmoothingEcho>,
    pub ode_step: Num,
    pub horizon: Option<Num>,
    pub tol_stall: Num,
    pub stall_window: usize,
    pub stationarity_tol: Num,
    pub record_every: usize,
    pub record_vectors: bool,
    pub renormalize_every: usize,
    pub max_condition: Num,
    /// Objective or application parameters (`theta`, `alpha`, ...).
    pub parameters: BTreeMap<String, Vec<Num>>,
    pub objective: Option<String>,
    pub method: Option<String>,
    /// Fixed numerical tolerances of the library.
    pub tolerances: BTreeMap<String, Num>,
}

impl ConfigEcho {
    pub fn new(config: &FlowConfig) -> Self {
        let (rule, step) = match config.step_rule {
            StepRule::Constant(c) => ("constant", c),
            StepRule::Diminishing(c) => ("diminishing", c),
        };
        let tolerances = [
            ("ball_tol", BALL_TOL),
            ("check_every", CHECK_EVERY as f64),
            ("det_guard", DET_GUARD),
            ("entropy_clamp_tol", ENTROPY_CLAMP_TOL),
            ("flag_gap_tol", FLAG_GAP_TOL),
            ("fr_residual_tol", FR_RESIDUAL_TOL),
            ("monotone_slack", MONOTONE_SLACK),
            ("pd_tol", PD_TOL),
            ("primal_margin", PRIMAL_MARGIN),
            ("rank_tol", RANK_TOL),
            ("simplex_sum_tol", SIMPLEX_SUM_TOL),
            ("support_tol", SUPPORT_TOL),
            ("tie_tol", TIE_TOL),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), Num(v)))
        .collect();
        Self {
            seed: config.seed,
            max_iters: config.max_iters,
            step_rule: rule.into(),
            step: Num(step),
            smoothing: config.smoothing.map(|s| SmoothingEcho {
                lambda0: Num(s.lambda0),
                schedule: if s.schedule { "scheduled" } else { "fixed" }.into(),
            }),
            ode_step: Num(config.ode_step),
            horizon: config.horizon.map(Num),
            tol_stall: Num(config.tol_stall),
            stall_window: config.stall_window,
            stationarity_tol: Num(config.stationarity_tol),
            record_every: config.record_every,
            record_vectors: config.record_vectors,
            renormalize_every: config.renormalize_every,
            max_condition: Num(config.max_condition),
            parameters: BTreeMap::new(),
            objective: None,
            method: None,
            tolerances,
        }
    }

    pub fn with_parameter(mut self, name: &str, values: &[f64]) -> Self {
        self.parameters.insert(name.into(), nums(values));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub iter: usize,
    pub t: Num,
    pub q_value: Num,
    pub objective: Num,
    pub f_value: Num,
    pub r_cumulative: Num,
    pub step: Num,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub recorded_samples: usize,
    pub samples: Vec<SampleRecord>,
    pub best_iter: usize,
    pub best_objective: Num,
    pub final_objective: Num,
    pub r_total: Num,
    pub t_total: Num,
    pub step_halvings: usize,
    pub energy_residual: Option<Num>,
}

impl TraceSummary {
    /// At most [`TRACE_SAMPLES`] evenly spaced samples, always keeping the
    /// first and the last.
    pub fn new(trace: &FlowTrace) -> Self {
        let s = &trace.samples;
        let keep: Vec<usize> = if s.len() <= TRACE_SAMPLES {
            (0..s.len()).collect()
        } else {
            let mut k: Vec<usize> = (0..TRACE_SAMPLES).map(|j| j * (s.len() - 1) / (TRACE_SAMPLES - 1)).collect();
            k.dedup();
            k
        };
        Self {
            recorded_samples: s.len(),
            samples: keep
                .into_iter()
                .map(|i| {
                    let x = &s[i];
                    SampleRecord {
                        iter: x.iter,
                        t: Num(x.t),
                        q_value: Num(x.q_value),
                        objective: Num(x.objective),
                        f_value: Num(x.f_value),
                        r_cumulative: Num(x.r_cumulative),
                        step: Num(x.step),
                    }
                })
                .collect(),
            best_iter: trace.best_iter,
            best_objective: Num(trace.best_objective),
            final_objective: Num(trace.final_objective),
            r_total: Num(trace.r_total),
            t_total: Num(trace.t_total),
            step_halvings: trace.step_halvings,
            energy_residual: trace.energy_residual.map(Num),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub qflow: String,
    pub qflow_cli: String,
}

impl Default for Versions {
    fn default() -> Self {
        // both crates are versioned together
        Self { qflow: env!("CARGO_PKG_VERSION").into(), qflow_cli: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub instance_digest: String,
    pub config: ConfigEcho,
    pub application: String,
    pub primal_value: Num,
    pub dual_value: Num,
    pub gap: Num,
    pub status: String,
    pub certificate_status: String,
    pub certificate_error: Option<String>,
    pub iterations: usize,
    pub rank: Option<usize>,
    pub rank_status: Option<String>,
    pub rank_bounds: Option<(usize, usize)>,
    /// nc-rank only: the trace-distance value the rank was rounded from.
    pub unrounded_value: Option<Num>,
    pub spectra: Vec<Vec<Num>>,
    pub trace: TraceSummary,
    pub certificate: Option<CertificateJson>,
    pub versions: Versions,
}

pub fn certificate_status_parts(s: &CertificateStatus) -> (String, Option<String>) {
    match s {
        CertificateStatus::Extracted => ("extracted".into(), None),
        CertificateStatus::Interior => ("interior".into(), None),
        CertificateStatus::Failed(msg) => ("failed".into(), Some(msg.clone())),
    }
}

impl ResultRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn from_trace(
        command: &str,
        digest: String,
        config: ConfigEcho,
        application: String,
        primal: f64,
        dual: f64,
        spectra: &[Vec<f64>],
        trace: &FlowTrace,
        certificate: Option<&BoundaryCertificate>,
    ) -> Self {
        let (cs, ce) = certificate_status_parts(&trace.certificate_status);
        Self {
            command: command.into(),
            instance_digest: digest,
            config,
            application,
            primal_value: Num(primal),
            dual_value: Num(dual),
            gap: Num(primal - dual),
            status: trace.status.as_str().into(),
            certificate_status: cs,
            certificate_error: ce,
            iterations: trace.iterations,
            rank: None,
            rank_status: None,
            rank_bounds: None,
            unrounded_value: None,
            spectra: spectra.iter().map(|s| nums(s)).collect(),
            trace: TraceSummary::new(trace),
            certificate: certificate.map(CertificateJson::from_certificate),
            versions: Versions::default(),
        }
    }

    pub fn from_application(command: &str, digest: String, config: ConfigEcho, r: &ApplicationResult) -> Self {
        let mut rec = Self::from_trace(
            command,
            digest,
            config,
            r.application.into(),
            r.primal_value,
            r.dual_value,
            &r.spectra,
            &r.trace,
            r.certificate.as_ref(),
        );
        rec.gap = Num(r.gap);
        rec.status = r.status.as_str().into();
        rec.iterations = r.iterations;
        let (cs, ce) = certificate_status_parts(&r.certificate_status);
        rec.certificate_status = cs;
        rec.certificate_error = ce;
        rec.rank = r.rank;
        rec.rank_status = r.rank_status.map(|s| s.as_str().into());
        rec.rank_bounds = r.rank_bounds;
        if r.application == "ncrank" {
            rec.unrounded_value = Some(Num(r.primal_value));
        }
        rec
    }
}

/// SHA-256 of the canonical JSON serialization of an instance.
pub fn digest<T: Serialize>(instance: &T) -> String {
    let bytes = serde_json::to_vec(instance).expect("instance serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qflow::applications::{application_config, g_stable_rank};
    use qflow::tensor_action::DenseTensor;

    #[test]
    fn record_roundtrips_byte_for_byte() {
        let v = DenseTensor::unit(2, 3);
        let cfg = qflow::flow_solver::FlowConfig { max_iters: 50, ..application_config() };
        let r = g_stable_rank(&v, &[1.0, 1.0, 0.5], &cfg).unwrap();
        let mut rec = ResultRecord::from_application("gstable", digest(&1), ConfigEcho::new(&cfg), &r);
        rec.dual_value = Num(f64::INFINITY);
        rec.primal_value = Num(0.1 + 0.2);
        let text = serde_json::to_string_pretty(&rec).unwrap();
        let back: ResultRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }
}
