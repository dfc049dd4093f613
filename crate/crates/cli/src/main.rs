//! `qflow`: command-line front end for the Q-flow solvers.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 numerical
//! failure, 4 violated precondition (common pencil kernel).

mod formats;
mod record;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qflow::applications::{
    application_config, certify, certify_objective, g_stable_rank, ncrank, quantum_functional, random_pencil,
    Application, MatrixPencil,
};
use qflow::flow_solver::{dual_value, group_subgradient_method, integrate_flow, FlowConfig, Smoothing, StepRule};
use qflow::pd_geometry::{BoundaryCertificate, ProductPDPoint};
use qflow::random::{complex_gaussian, seeded_rng};
use qflow::spectral_convex::{builtin_objective, ObjectiveSpec, Signature};
use qflow::tensor_action::{moment_map, spectrum, DenseTensor, KempfNessProblem};
use serde::Serialize;

use formats::{floats, matrix_to_json, nums, CertificateJson, JsonComplex, Num, PencilFile, TensorFile};
use record::{digest, ConfigEcho, ResultRecord};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<qflow::Error> for CliError {
    fn from(e: qflow::Error) -> Self {
        use qflow::Error::*;
        let code = match e {
            DimensionMismatch(_) | Domain(_) | Parameter(_) | Unsupported { .. } | Degenerate(_) => 2,
            Precondition(_) => 4,
            NotHermitian { .. } | NotPositiveDefinite { .. } | NonFinite(_) | Internal(_) => 3,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "qflow", version, about = "Q-gradient flows for tensor scaling problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the moment map and its spectra.
    Moment {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize S(μ(g·v)) for a built-in objective.
    Scale {
        input: PathBuf,
        #[command(flatten)]
        objective: ObjectiveArgs,
        #[arg(long, value_enum, default_value_t = Method::Group)]
        method: Method,
        /// Initial step of the flow integrator.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Logarithmic quantum functional E_θ.
    Qfunc {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// G-stable rank with weights α.
    Gstable {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Noncommutative rank of a matrix pencil.
    Ncrank {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate a certificate (bare, or taken from a result record).
    Certify {
        instance: PathBuf,
        certificate: PathBuf,
        /// Required for bare certificates; read from the record otherwise.
        #[arg(long, value_enum)]
        application: Option<AppKind>,
        #[command(flatten)]
        objective: ObjectiveArgs,
        /// Primal value to compare against.
        #[arg(long)]
        primal: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded instance file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Explicit tensor dimensions (overrides --n/--d).
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Number of pencil matrices.
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct ObjectiveArgs {
    /// frobenius, op_norm_max_weighted, trace_norm_sum_weighted,
    /// neg_entropy_weighted, trace_dist_to_uniform or indicator_trace_ball.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, value_delimiter = ',')]
    theta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    weight: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
}

impl ObjectiveArgs {
    fn spec(&self) -> CliResult<ObjectiveSpec> {
        let name = self.objective.as_deref().ok_or_else(|| CliError::input("--objective is required"))?;
        let needs = |flag: &str, v: &Option<Vec<f64>>| -> CliResult<Vec<f64>> {
            v.clone().ok_or_else(|| CliError::input(format!("objective {name} needs --{flag}")))
        };
        let spec = match name {
            "frobenius" => ObjectiveSpec::Frobenius,
            "op_norm_max_weighted" => ObjectiveSpec::OpNormMaxWeighted { alpha: needs("alpha", &self.alpha)? },
            "trace_norm_sum_weighted" => ObjectiveSpec::TraceNormSumWeighted { alpha: needs("alpha", &self.alpha)? },
            "neg_entropy_weighted" => ObjectiveSpec::NegEntropyWeighted { theta: needs("theta", &self.theta)? },
            "trace_dist_to_uniform" => ObjectiveSpec::TraceDistToUniform { weight: self.weight.unwrap_or(1.0) },
            "indicator_trace_ball" => ObjectiveSpec::IndicatorTraceBall { radius: self.radius.unwrap_or(1.0) },
            other => return Err(CliError::input(format!("unknown objective `{other}`"))),
        };
        let used = |flag: &str| match &spec {
            ObjectiveSpec::OpNormMaxWeighted { .. } | ObjectiveSpec::TraceNormSumWeighted { .. } => flag == "alpha",
            ObjectiveSpec::NegEntropyWeighted { .. } => flag == "theta",
            ObjectiveSpec::TraceDistToUniform { .. } => flag == "weight",
            ObjectiveSpec::IndicatorTraceBall { .. } => flag == "radius",
            ObjectiveSpec::Frobenius => false,
        };
        let given = [
            ("theta", self.theta.is_some()),
            ("alpha", self.alpha.is_some()),
            ("weight", self.weight.is_some()),
            ("radius", self.radius.is_some()),
        ];
        for (flag, present) in given {
            if present && !used(flag) {
                return Err(CliError::input(format!("--{flag} does not apply to objective {name}")));
            }
        }
        Ok(spec)
    }
}

/// Parameters of an objective, as echoed in records.
fn spec_parameters(spec: &ObjectiveSpec) -> Vec<(&'static str, Vec<f64>)> {
    match spec {
        ObjectiveSpec::Frobenius => vec![],
        ObjectiveSpec::OpNormMaxWeighted { alpha } | ObjectiveSpec::TraceNormSumWeighted { alpha } => {
            vec![("alpha", alpha.clone())]
        }
        ObjectiveSpec::NegEntropyWeighted { theta } => vec![("theta", theta.clone())],
        ObjectiveSpec::TraceDistToUniform { weight } => vec![("weight", vec![*weight])],
        ObjectiveSpec::IndicatorTraceBall { radius } => vec![("radius", vec![*radius])],
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    /// Q-subgradient method in group form.
    Group,
    /// Geodesic Euler integration of the Q-gradient flow.
    Flow,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StepRuleArg {
    Diminishing,
    Constant,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ScheduleArg {
    Scheduled,
    Fixed,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum AppKind {
    Qfunc,
    Gstable,
    Ncrank,
    Scale,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GenKind {
    #[value(name = "gaussian")]
    Gaussian,
    #[value(name = "unit")]
    Unit,
    #[value(name = "rank_one")]
    RankOne,
    #[value(name = "skew_pencil")]
    SkewPencil,
    #[value(name = "random_pencil")]
    RandomPencil,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long)]
    max_iters: Option<usize>,
    /// Step constant c (steps c/sqrt(i+1), or c with --step-rule constant).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_enum)]
    step_rule: Option<StepRuleArg>,
    /// Moreau smoothing parameter λ0.
    #[arg(long)]
    smooth: Option<f64>,
    #[arg(long, value_enum)]
    smooth_schedule: Option<ScheduleArg>,
    /// Disable smoothing.
    #[arg(long, conflicts_with = "smooth")]
    no_smooth: bool,
    /// Relative improvement below which a run counts as stalled.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    stall_window: Option<usize>,
    #[arg(long)]
    stationarity_tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    renormalize_every: Option<usize>,
    #[arg(long)]
    max_condition: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self, mut c: FlowConfig) -> CliResult<FlowConfig> {
        c.seed = self.seed;
        if let Some(v) = self.max_iters {
            c.max_iters = v;
        }
        let constant = self.step.unwrap_or(c.step_rule.constant());
        c.step_rule = match self.step_rule {
            Some(StepRuleArg::Constant) => StepRule::Constant(constant),
            Some(StepRuleArg::Diminishing) => StepRule::Diminishing(constant),
            None => match c.step_rule {
                StepRule::Constant(_) => StepRule::Constant(constant),
                StepRule::Diminishing(_) => StepRule::Diminishing(constant),
            },
        };
        if self.no_smooth {
            if self.smooth_schedule.is_some() {
                return Err(CliError::input("--smooth-schedule conflicts with --no-smooth"));
            }
            c.smoothing = None;
        } else if self.smooth.is_some() || self.smooth_schedule.is_some() {
            let base = c.smoothing.unwrap_or(Smoothing::scheduled(qflow::spectral_convex::DEFAULT_SMOOTHING));
            let lambda0 = self.smooth.unwrap_or(base.lambda0);
            c.smoothing = Some(match self.smooth_schedule {
                Some(ScheduleArg::Fixed) => Smoothing::fixed(lambda0),
                Some(ScheduleArg::Scheduled) => Smoothing::scheduled(lambda0),
                None => Smoothing { lambda0, schedule: base.schedule },
            });
        }
        if let Some(v) = self.tol {
            c.tol_stall = v;
        }
        if let Some(v) = self.stall_window {
            c.stall_window = v;
        }
        if let Some(v) = self.stationarity_tol {
            c.stationarity_tol = v;
        }
        if let Some(v) = self.record_every {
            c.record_every = v;
        }
        if let Some(v) = self.renormalize_every {
            c.renormalize_every = v;
        }
        if let Some(v) = self.max_condition {
            c.max_condition = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed {what} file {}: {e}", path.display())))
}

fn read_tensor(path: &Path) -> CliResult<(TensorFile, DenseTensor)> {
    let f: TensorFile = read_json(path, "tensor")?;
    let t = f.to_tensor()?;
    Ok((TensorFile::from_tensor(&t), t))
}

fn read_pencil(path: &Path) -> CliResult<(PencilFile, MatrixPencil)> {
    let f: PencilFile = read_json(path, "pencil")?;
    let p = f.to_pencil()?;
    Ok((f, p))
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError { code: 3, message: e.to_string() })?;
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // a closed reader (e.g. `| head`) is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError { code: 3, message: format!("cannot write to stdout: {e}") })
            }
            _ => Ok(()),
        },
    }
}

#[derive(Serialize)]
struct MomentOutput {
    dims: Vec<usize>,
    spectra: Vec<Vec<Num>>,
    mu: Vec<Vec<Vec<JsonComplex>>>,
}

fn cmd_moment(input: &Path, out: Option<&Path>) -> CliResult<()> {
    let (_, v) = read_tensor(input)?;
    let mu = moment_map(&v)?;
    let spectra = spectrum(&mu).iter().map(|s| nums(s)).collect();
    let out_v = MomentOutput {
        dims: v.dims().to_vec(),
        spectra,
        mu: mu.iter().map(|b| matrix_to_json(b.as_matrix())).collect(),
    };
    emit(&out_v, out)
}

fn cmd_scale(
    input: &Path,
    objective: &ObjectiveArgs,
    method: Method,
    h: Option<f64>,
    horizon: Option<f64>,
    solver: &SolverArgs,
) -> CliResult<()> {
    let (file, v) = read_tensor(input)?;
    let spec = objective.spec()?;
    let mut base = FlowConfig { record_every: 10, ..FlowConfig::default() };
    if let Some(h) = h {
        base.ode_step = h;
    }
    base.horizon = horizon;
    let cfg = solver.config(base)?;
    let sig = Signature::blocks(v.dims());
    let q = builtin_objective(&spec, &sig)?;
    let problem = KempfNessProblem::new(&v)?;
    let trace = match method {
        Method::Group => {
            let g0 = qflow::tensor_action::GroupElement::identity(v.dims());
            group_subgradient_method(&v, &q, &g0, &cfg)?.trace
        }
        Method::Flow => integrate_flow(&problem, &q, &ProductPDPoint::base(&sig), &cfg)?,
    };
    let zero = BoundaryCertificate::zero(&sig);
    let mut best = (dual_value(&problem, &q, &zero)?, zero);
    if let Some(c) = &trace.certificate {
        let d = dual_value(&problem, &q, c)?;
        if d > best.0 {
            best = (d, c.clone());
        }
    }
    let mut echo = ConfigEcho::new(&cfg);
    echo.objective = Some(spec.kind().into());
    echo.method = Some(match method {
        Method::Group => "group".into(),
        Method::Flow => "flow".into(),
    });
    for (name, vals) in spec_parameters(&spec) {
        echo = echo.with_parameter(name, &vals);
    }
    let rec = ResultRecord::from_trace(
        "scale",
        digest(&file),
        echo,
        spec.kind().into(),
        trace.best_objective,
        best.0,
        &trace.best_spectra,
        &trace,
        Some(&best.1),
    );
    emit(&rec, solver.out.as_deref())
}

fn cmd_qfunc(input: &Path, theta: &[f64], solver: &SolverArgs) -> CliResult<()> {
    let (file, v) = read_tensor(input)?;
    let cfg = solver.config(application_config())?;
    let r = quantum_functional(&v, theta, &cfg)?;
    let echo = ConfigEcho::new(&cfg).with_parameter("theta", theta);
    emit(&ResultRecord::from_application("qfunc", digest(&file), echo, &r), solver.out.as_deref())
}

fn cmd_gstable(input: &Path, alpha: &[f64], solver: &SolverArgs) -> CliResult<()> {
    let (file, v) = read_tensor(input)?;
    let cfg = solver.config(application_config())?;
    let r = g_stable_rank(&v, alpha, &cfg)?;
    let echo = ConfigEcho::new(&cfg).with_parameter("alpha", alpha);
    emit(&ResultRecord::from_application("gstable", digest(&file), echo, &r), solver.out.as_deref())
}

fn cmd_ncrank(input: &Path, solver: &SolverArgs) -> CliResult<()> {
    let (file, p) = read_pencil(input)?;
    let cfg = solver.config(application_config())?;
    let r = ncrank(&p, &cfg)?;
    let rec = ResultRecord::from_application("ncrank", digest(&file), ConfigEcho::new(&cfg), &r);
    emit(&rec, solver.out.as_deref())
}

#[derive(Serialize)]
struct WeakDuality {
    holds: bool,
    /// Amount by which the dual bound crosses the primal value (≤ 0 when
    /// weak duality holds).
    violation: Num,
}

#[derive(Serialize)]
struct CertifyOutput {
    application: String,
    dual_value: Num,
    primal_value: Option<Num>,
    weak_duality: Option<WeakDuality>,
}

/// What a certificate is evaluated for.
enum Target {
    App(Application),
    Objective(ObjectiveSpec),
}

fn target_from_record(rec: &serde_json::Value) -> CliResult<Target> {
    let field = |k: &str| rec.get(k).and_then(|x| x.as_str()).map(str::to_owned);
    let params: BTreeMap<String, Vec<Num>> = rec
        .get("config")
        .and_then(|c| c.get("parameters"))
        .map(|p| serde_json::from_value(p.clone()))
        .transpose()
        .map_err(|e| CliError::input(format!("malformed record parameters: {e}")))?
        .unwrap_or_default();
    let param = |k: &str| -> CliResult<Vec<f64>> {
        params.get(k).map(|v| floats(v)).ok_or_else(|| CliError::input(format!("record lacks parameter `{k}`")))
    };
    match field("command").as_deref() {
        Some("qfunc") => Ok(Target::App(Application::QuantumFunctional { theta: param("theta")? })),
        Some("gstable") => Ok(Target::App(Application::GStableRank { alpha: param("alpha")? })),
        Some("ncrank") => Ok(Target::App(Application::NcRank)),
        Some("scale") => {
            let objective = rec.get("config").and_then(|c| c.get("objective")).and_then(|o| o.as_str()).map(str::to_owned);
            let args = ObjectiveArgs {
                objective,
                theta: params.get("theta").map(|v| floats(v)),
                alpha: params.get("alpha").map(|v| floats(v)),
                weight: params.get("weight").map(|v| v[0].0),
                radius: params.get("radius").map(|v| v[0].0),
            };
            Ok(Target::Objective(args.spec()?))
        }
        other => Err(CliError::input(format!("record has unknown command {other:?}"))),
    }
}

fn cmd_certify(
    instance: &Path,
    cert_path: &Path,
    application: Option<AppKind>,
    objective: &ObjectiveArgs,
    primal: Option<f64>,
    out: Option<&Path>,
) -> CliResult<()> {
    let raw: serde_json::Value = read_json(cert_path, "certificate")?;
    let (cert_json, target) = match raw.get("certificate") {
        Some(c) => {
            let cert: CertificateJson = serde_json::from_value(c.clone())
                .map_err(|e| CliError::input(format!("malformed certificate in record: {e}")))?;
            let target = match application {
                None => target_from_record(&raw)?,
                Some(kind) => explicit_target(kind, objective)?,
            };
            (cert, target)
        }
        None => {
            let cert: CertificateJson =
                serde_json::from_value(raw).map_err(|e| CliError::input(format!("malformed certificate: {e}")))?;
            let kind = application.ok_or_else(|| CliError::input("--application is required for a bare certificate"))?;
            (cert, explicit_target(kind, objective)?)
        }
    };
    let xi = cert_json.to_certificate()?;
    let (name, dual, minimizing) = match &target {
        Target::App(Application::NcRank) => {
            let (_, p) = read_pencil(instance)?;
            ("ncrank".to_string(), certify(&p.to_tensor(), &Application::NcRank, &xi)?, true)
        }
        Target::App(app) => {
            let (_, v) = read_tensor(instance)?;
            (app.name().to_string(), certify(&v, app, &xi)?, false)
        }
        Target::Objective(spec) => {
            let (_, v) = read_tensor(instance)?;
            let modes: Vec<usize> = (0..v.order()).collect();
            (spec.kind().to_string(), certify_objective(&v, &modes, spec, &xi)?, true)
        }
    };
    let weak = primal.map(|p| {
        let violation = if minimizing { dual - p } else { p - dual };
        WeakDuality { holds: violation <= 1e-8, violation: Num(violation) }
    });
    emit(&CertifyOutput { application: name, dual_value: Num(dual), primal_value: primal.map(Num), weak_duality: weak }, out)
}

fn explicit_target(kind: AppKind, objective: &ObjectiveArgs) -> CliResult<Target> {
    let need = |v: &Option<Vec<f64>>, flag: &str| {
        v.clone().ok_or_else(|| CliError::input(format!("--{flag} is required for this application")))
    };
    Ok(match kind {
        AppKind::Qfunc => Target::App(Application::QuantumFunctional { theta: need(&objective.theta, "theta")? }),
        AppKind::Gstable => Target::App(Application::GStableRank { alpha: need(&objective.alpha, "alpha")? }),
        AppKind::Ncrank => Target::App(Application::NcRank),
        AppKind::Scale => Target::Objective(objective.spec()?),
    })
}

fn cmd_gen(kind: GenKind, n: usize, d: usize, dims: Option<Vec<usize>>, m: usize, seed: u64, out: Option<&Path>) -> CliResult<()> {
    let dims = dims.unwrap_or_else(|| vec![n; d]);
    if dims.is_empty() || dims.contains(&0) {
        return Err(CliError::input(format!("dimensions must be positive, got {dims:?}")));
    }
    let mut rng = seeded_rng(seed);
    match kind {
        GenKind::Gaussian => emit(&TensorFile::from_tensor(&DenseTensor::from_fn(&dims, |_| complex_gaussian(&mut rng))), out),
        GenKind::Unit => {
            if n == 0 || d == 0 {
                return Err(CliError::input("unit tensors need positive --n and --d"));
            }
            emit(&TensorFile::from_tensor(&DenseTensor::unit(n, d)), out)
        }
        GenKind::RankOne => {
            let factors: Vec<Vec<_>> = dims.iter().map(|&k| (0..k).map(|_| complex_gaussian(&mut rng)).collect()).collect();
            emit(&TensorFile::from_tensor(&DenseTensor::rank_one(&factors)), out)
        }
        GenKind::SkewPencil => emit(&PencilFile::from_pencil(&MatrixPencil::skew3()), out),
        GenKind::RandomPencil => emit(&PencilFile::from_pencil(&random_pencil(n, m, seed)?), out),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Moment { input, out } => cmd_moment(&input, out.as_deref()),
        Command::Scale { input, objective, method, h, horizon, solver } => {
            cmd_scale(&input, &objective, method, h, horizon, &solver)
        }
        Command::Qfunc { input, theta, solver } => cmd_qfunc(&input, &theta, &solver),
        Command::Gstable { input, alpha, solver } => cmd_gstable(&input, &alpha, &solver),
        Command::Ncrank { input, solver } => cmd_ncrank(&input, &solver),
        Command::Certify { instance, certificate, application, objective, primal, out } => {
            cmd_certify(&instance, &certificate, application, &objective, primal, out.as_deref())
        }
        Command::Gen { kind, n, d, dims, m, seed, out } => cmd_gen(kind, n, d, dims, m, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QFLOW_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
