//! Invariants of the library as randomized properties.

use proptest::prelude::*;
use qflow::applications::{
    application_config, certify, ncrank, qfunc_upper_bound, quantum_functional, random_pencil, Application,
};
use qflow::flow_solver::{dual_value, group_subgradient_method, GroupSolver, integrate_flow, subgradient_method, FlowConfig, Smoothing, StepRule};
use qflow::pd_geometry::{
    asymptotic_at_base, covector_to_base, distance, geodesic, geodesic_velocity, transport_to_base, BoundaryCertificate,
    FlagWeights, ProductPDPoint,
};
use qflow::random::{complex_gaussian, random_density, random_hermitian, random_pd, random_unitary, seeded_rng, SeededRng};
use qflow::spectral_convex::{builtin_objective, ObjectiveSpec, Signature, SpectralObjective, TangentBlock};
use qflow::tensor_action::{act, kempf_ness, kempf_ness_differential, moment_map, recession, DenseTensor, GroupElement, KempfNessProblem};
use qflow::CMat;
use rand::Rng;

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 2..=3)
}

fn tensor(dims: &[usize], rng: &mut SeededRng) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| complex_gaussian(rng))
}

fn hermitian_tangent(dims: &[usize], rng: &mut SeededRng) -> TangentBlock {
    TangentBlock::from_blocks(dims.iter().map(|&n| random_hermitian(n, rng)).collect())
}

fn pd_point(dims: &[usize], spread: f64, rng: &mut SeededRng) -> ProductPDPoint {
    ProductPDPoint::from_blocks(dims.iter().map(|&n| random_pd(n, spread, rng)).collect()).unwrap()
}

fn unitaries(dims: &[usize], rng: &mut SeededRng) -> Vec<CMat> {
    dims.iter().map(|&n| random_unitary(n, rng)).collect()
}

fn rotate(y: &TangentBlock, k: &[CMat]) -> TangentBlock {
    TangentBlock::new(y.euclid.clone(), y.blocks.iter().zip(k).map(|(b, k)| b.conjugate_by(k)).collect())
}

/// Every built-in objective on `dims`, with a sampler for points of its
/// domain.
fn objectives(dims: &[usize]) -> Vec<(SpectralObjective, fn(&[usize], &mut SeededRng) -> TangentBlock)> {
    let sig = Signature::blocks(dims);
    let d = dims.len();
    let w: Vec<f64> = (0..d).map(|i| 1.0 + 0.5 * i as f64).collect();
    let theta: Vec<f64> = vec![1.0 / d as f64; d];
    let general: fn(&[usize], &mut SeededRng) -> TangentBlock = hermitian_tangent;
    let density: fn(&[usize], &mut SeededRng) -> TangentBlock =
        |dims, rng| TangentBlock::from_blocks(dims.iter().map(|&n| random_density(n, rng)).collect());
    let small: fn(&[usize], &mut SeededRng) -> TangentBlock = |dims, rng| {
        let y = hermitian_tangent(dims, rng);
        let tr: f64 = y.blocks.iter().map(|b| b.eigh().values.iter().map(|l| l.abs()).sum::<f64>()).sum();
        y.scale(0.9 / tr)
    };
    vec![
        (builtin_objective(&ObjectiveSpec::Frobenius, &sig).unwrap(), general),
        (builtin_objective(&ObjectiveSpec::OpNormMaxWeighted { alpha: w.clone() }, &sig).unwrap(), general),
        (builtin_objective(&ObjectiveSpec::TraceNormSumWeighted { alpha: w }, &sig).unwrap(), general),
        (builtin_objective(&ObjectiveSpec::NegEntropyWeighted { theta }, &sig).unwrap(), density),
        (builtin_objective(&ObjectiveSpec::TraceDistToUniform { weight: 1.5 }, &sig).unwrap(), general),
        (builtin_objective(&ObjectiveSpec::IndicatorTraceBall { radius: 1.0 }, &sig).unwrap(), small),
    ]
}

/// The built-ins that are nonnegative, as Q-gradient methods require.
fn nonnegative_objectives(dims: &[usize]) -> Vec<SpectralObjective> {
    objectives(dims).into_iter().map(|(q, _)| q).filter(|q| !q.label().contains("entropy")).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fenchel_young_equality_at_subgradients(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        for (s, sample) in objectives(&dims) {
            let y = sample(&dims, &mut rng);
            let g = s.spectral_subgradient(&y).unwrap();
            let gap = s.lift_eval(&y).unwrap() + s.conjugate_eval(&g).unwrap() - g.pair(&y);
            prop_assert!(gap.abs() <= 1e-8, "{}: {gap}", s.label());
        }
    }

    #[test]
    fn spectral_values_are_unitarily_invariant(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        for (s, sample) in objectives(&dims) {
            let y = sample(&dims, &mut rng);
            let k = unitaries(&dims, &mut rng);
            let ky = rotate(&y, &k);
            let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-10 * (1.0 + a.abs());
            prop_assert!(close(s.lift_eval(&y).unwrap(), s.lift_eval(&ky).unwrap()), "{}", s.label());
            let g = s.spectral_subgradient(&y).unwrap();
            let kg = rotate(&g, &k);
            prop_assert!(close(s.conjugate_eval(&g).unwrap(), s.conjugate_eval(&kg).unwrap()), "{}", s.label());
            let (a, _) = s.moreau_eval_grad(0.3, &y).unwrap();
            let (b, _) = s.moreau_eval_grad(0.3, &ky).unwrap();
            prop_assert!(close(a, b), "{}", s.label());
        }
    }

    #[test]
    fn smooth_gradients_match_finite_differences(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        for (s, sample) in objectives(&dims) {
            let env = s.smoothed(0.5).unwrap();
            for q in [&s, &env] {
                if !q.is_smooth() {
                    continue;
                }
                let y = sample(&dims, &mut rng);
                let mut h = hermitian_tangent(&dims, &mut rng);
                if q.label().contains("entropy") {
                    h = h.traceless();
                }
                let h = h.scale(1.0 / h.norm());
                let eps = 1e-6;
                let (a, b) = (q.lift_eval(&y.axpy(eps, &h)).unwrap(), q.lift_eval(&y.axpy(-eps, &h)).unwrap());
                if !(a.is_finite() && b.is_finite()) {
                    continue;
                }
                let fd = (a - b) / (2.0 * eps);
                let an = q.spectral_subgradient(&y).unwrap().pair(&h);
                prop_assert!((fd - an).abs() <= 1e-5 * (1.0 + an.abs()), "{}: fd {fd} vs {an}", q.label());
            }
        }
    }

    #[test]
    fn moreau_envelopes_decrease_in_lambda(dims in dims_strategy(), seed in any::<u64>(), l1 in 0.01f64..1.0, dl in 0.0f64..1.0) {
        let mut rng = seeded_rng(seed);
        for (s, sample) in objectives(&dims) {
            let y = sample(&dims, &mut rng);
            let (a, _) = s.moreau_eval_grad(l1, &y).unwrap();
            let (b, _) = s.moreau_eval_grad(l1 + dl, &y).unwrap();
            prop_assert!(b <= a + 1e-10, "{}", s.label());
            prop_assert!(a <= s.lift_eval(&y).unwrap() + 1e-10, "{}", s.label());
        }
    }

    #[test]
    fn geodesics_form_a_semigroup(dims in dims_strategy(), seed in any::<u64>(), s in 0.0f64..1.5, t in 0.0f64..1.5) {
        let mut rng = seeded_rng(seed);
        let x = pd_point(&dims, 0.5, &mut rng);
        let h = hermitian_tangent(&dims, &mut rng).scale(0.7);
        let direct = geodesic(&x, &h, s + t).unwrap();
        let mid = geodesic(&x, &h, s).unwrap();
        let vel = geodesic_velocity(&x, &h, s).unwrap();
        let split = geodesic(&mid, &vel, t).unwrap();
        prop_assert!(distance(&direct, &split).unwrap() <= 1e-8);
    }

    #[test]
    fn transport_preserves_the_pairing(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let x = pd_point(&dims, 0.8, &mut rng);
        let h = hermitian_tangent(&dims, &mut rng);
        let d = hermitian_tangent(&dims, &mut rng);
        let at_base = covector_to_base(&x, &d).unwrap().pair(&transport_to_base(&x, &h).unwrap());
        prop_assert!((at_base - d.pair(&h)).abs() <= 1e-10 * (1.0 + at_base.abs()));
    }

    #[test]
    fn asymptotic_rays_stay_bounded(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let x = pd_point(&dims, 0.5, &mut rng);
        let h = hermitian_tangent(&dims, &mut rng).scale(0.3);
        let y = asymptotic_at_base(&x, &h).unwrap().to_tangent();
        let base = ProductPDPoint::base(&x.signature());
        let gap = |t: f64| distance(&geodesic(&x, &h, t).unwrap(), &geodesic(&base, &y, t).unwrap()).unwrap();
        // keep the endpoints' condition numbers near 1e8 so distances are accurate
        let spread = y.blocks.iter().map(|b| { let l = b.eigh().values; l[0] - l[l.len() - 1] }).fold(1e-3, f64::max);
        let t = (8.0 * std::f64::consts::LN_10 / spread).min(10.0);
        prop_assert!(gap(t) <= gap(t / 4.0) + 1e-6);
    }

    #[test]
    fn moment_map_is_unitarily_equivariant(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let k = unitaries(&dims, &mut rng);
        let mu = moment_map(&v).unwrap();
        let mk = moment_map(&act(&GroupElement::new(k.clone()).unwrap(), &v).unwrap()).unwrap();
        for ((a, b), k) in mu.iter().zip(&mk).zip(&k) {
            prop_assert!(a.conjugate_by(k).sub(b).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn moment_map_lands_in_densities(dims in dims_strategy(), seed in any::<u64>(), sparse in any::<bool>()) {
        let mut rng = seeded_rng(seed);
        let v = DenseTensor::from_fn(&dims, |_| {
            if sparse && rng.random_bool(0.6) { qflow::Complex64::new(0.0, 0.0) } else { complex_gaussian(&mut rng) }
        });
        prop_assume!(v.norm_sqr() > 0.0);
        for b in moment_map(&v).unwrap() {
            prop_assert!((b.trace() - 1.0).abs() <= 1e-10);
            prop_assert!(b.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn recession_is_positively_homogeneous(dims in dims_strategy(), seed in any::<u64>(), c in 0.01f64..10.0) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let xi = BoundaryCertificate::from_tangent(&hermitian_tangent(&dims, &mut rng));
        let a = recession(&v, &xi.scale(c)).unwrap();
        let b = c * recession(&v, &xi).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn kempf_ness_transforms_under_unitaries(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let x = pd_point(&dims, 0.7, &mut rng);
        let k = unitaries(&dims, &mut rng);
        let kv = act(&GroupElement::new(k.clone()).unwrap(), &v).unwrap();
        let rotated = ProductPDPoint::from_blocks(
            x.blocks().iter().zip(&k).map(|(b, k)| b.conjugate_by(&k.adjoint())).collect(),
        )
        .unwrap();
        let a = kempf_ness(&kv, &x).unwrap();
        let b = kempf_ness(&v, &rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weak_duality_for_flow_certificates(dims in dims_strategy(), seed in any::<u64>(), which in 0usize..5) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let q = nonnegative_objectives(&dims).swap_remove(which);
        let p = KempfNessProblem::new(&v).unwrap();
        let cfg = FlowConfig { max_iters: 150, smoothing: Some(Smoothing::scheduled(0.1)), ..FlowConfig::default() };
        let run = group_subgradient_method(&v, &q, &GroupElement::identity(&dims), &cfg).unwrap();
        let primal = run.trace.samples.iter().map(|s| s.objective).fold(f64::INFINITY, f64::min);
        let mut certs = vec![BoundaryCertificate::zero(&Signature::blocks(&dims))];
        certs.extend(run.trace.certificate.clone());
        certs.push(BoundaryCertificate::from_tangent(&hermitian_tangent(&dims, &mut rng).scale(0.2)));
        for xi in &certs {
            let d = dual_value(&p, &q, xi).unwrap();
            prop_assert!(d <= primal + 1e-8, "{}: dual {d} primal {primal}", q.label());
        }
    }

    #[test]
    fn smoothed_flow_is_monotone_and_stays_in_the_level_set(dims in dims_strategy(), seed in any::<u64>(), which in 0usize..4) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let q = nonnegative_objectives(&dims).swap_remove(which);
        let p = KempfNessProblem::new(&v).unwrap();
        let cfg = FlowConfig { max_iters: 200, ode_step: 0.02, smoothing: Some(Smoothing::fixed(0.1)), ..FlowConfig::default() };
        let tr = integrate_flow(&p, &q, &ProductPDPoint::base(&Signature::blocks(&dims)), &cfg).unwrap();
        let q0 = tr.samples[0].q_value;
        for w in tr.samples.windows(2) {
            prop_assert!(w[1].q_value <= w[0].q_value + 1e-7);
            prop_assert!(w[1].q_value <= q0 + 1e-7);
        }
    }

    #[test]
    fn flow_and_subgradient_steps_agree_to_first_order(dims in dims_strategy(), seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let v = tensor(&dims, &mut rng);
        let sig = Signature::blocks(&dims);
        let q = builtin_objective(&ObjectiveSpec::Frobenius, &sig).unwrap();
        let p = KempfNessProblem::new(&v).unwrap();
        let x0 = ProductPDPoint::base(&sig);
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let n = (0.5 / h) as usize;
            let a = integrate_flow(&p, &q, &x0, &FlowConfig { max_iters: n, ode_step: h, ..FlowConfig::default() }).unwrap();
            let b = subgradient_method(&p, &q, &x0, &FlowConfig { max_iters: n, step_rule: StepRule::Constant(h), ..FlowConfig::default() }).unwrap();
            errs.push(distance(a.final_point.as_ref().unwrap(), b.final_point.as_ref().unwrap()).unwrap());
        }
        // first-order agreement, frozen at C = 1 as a regression bound
        prop_assert!(errs[0] <= 1.0 * 0.02 + 1e-9 && errs[1] <= 1.0 * 0.01 + 1e-9, "{errs:?}");
    }

    #[test]
    fn qfunc_sandwich_and_rotation_invariance(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let dims = [2, 2, 2];
        let v = tensor(&dims, &mut rng);
        let theta = [0.5, 0.3, 0.2];
        let cfg = FlowConfig { max_iters: 400, ..application_config() };
        let a = quantum_functional(&v, &theta, &cfg).unwrap();
        prop_assert!(a.duality_violation() <= 1e-8);
        let k = unitaries(&dims, &mut rng);
        let kv = act(&GroupElement::new(k).unwrap(), &v).unwrap();
        let b = quantum_functional(&kv, &theta, &cfg).unwrap();
        prop_assert!((a.primal_value - b.primal_value).abs() <= 1e-6);
        let zero = BoundaryCertificate::zero(&Signature::blocks(&dims));
        prop_assert!(qfunc_upper_bound(&v, &theta, &zero).unwrap() >= a.primal_value - 1e-8);
    }

    #[test]
    fn ncrank_is_unitarily_invariant(seed in 0u64..1000, n in 2usize..=4, m in 1usize..=3) {
        let mut rng = seeded_rng(seed ^ 0x5eed);
        let p = random_pencil(n, m, seed).unwrap();
        let (u, w) = (random_unitary(n, &mut rng), random_unitary(n, &mut rng));
        let cfg = FlowConfig { max_iters: 2000, ..application_config() };
        let a = ncrank(&p, &cfg).unwrap();
        let b = ncrank(&p.transform(&u, &w), &cfg).unwrap();
        prop_assert_eq!(a.rank, b.rank);
        prop_assert!(a.duality_violation() <= 1e-8 && b.duality_violation() <= 1e-8);
        // the group iteration itself is exactly equivariant; the driver's
        // bracket search and restarts are discrete and may differ
        let q = builtin_objective(&ObjectiveSpec::TraceDistToUniform { weight: n as f64 / 2.0 }, &Signature::blocks(&[n, n])).unwrap();
        let short = FlowConfig { max_iters: 10, ..cfg };
        let best = |t: &DenseTensor| {
            let mut s = GroupSolver::new(t, &[0, 1], &q, &GroupElement::identity(&[n, n]), &short).unwrap();
            s.run(10).unwrap();
            s.best_objective()
        };
        let (x, y) = (best(&p.to_tensor()), best(&p.transform(&u, &w).to_tensor()));
        prop_assert!((x - y).abs() <= 1e-7 * (1.0 + x.abs()), "{x} {y}");
        let c = a.certificate.as_ref().unwrap();
        prop_assert!(certify(&p.to_tensor(), &Application::NcRank, c).unwrap() <= a.primal_value + 1e-8);
    }
}

#[test]
fn best_sample_is_the_run_minimum_and_late_samples_settle() {
    let mut rng = seeded_rng(3);
    let dims = [2, 3, 3];
    let v = tensor(&dims, &mut rng);
    let q = builtin_objective(&ObjectiveSpec::Frobenius, &Signature::blocks(&dims)).unwrap();
    let cfg = FlowConfig { max_iters: 4000, ..FlowConfig::default() };
    let run = group_subgradient_method(&v, &q, &GroupElement::identity(&dims), &cfg).unwrap();
    let s = &run.trace.samples;
    let min = s.iter().map(|x| x.objective).fold(f64::INFINITY, f64::min);
    assert!((run.trace.best_objective - min).abs() <= 1e-12);
    // spectra over the last 10% stay within a ball that shrinks from the
    // first half of that window to the second
    let tail = &s[s.len() * 9 / 10..];
    let spread = |w: &[qflow::flow_solver::TraceSample]| {
        let last = &w[w.len() - 1].spectra;
        w.iter()
            .map(|x| x.spectra.iter().flatten().zip(last.iter().flatten()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    };
    let (first, second) = tail.split_at(tail.len() / 2);
    assert!(spread(second) <= spread(first) + 1e-12);
    assert!(run.trace.final_objective - min <= 1e-3);
}

#[test]
fn random_certificates_never_beat_the_primal() {
    let mut rng = seeded_rng(8);
    let dims = [2, 3, 2];
    let v = tensor(&dims, &mut rng);
    let p = KempfNessProblem::new(&v).unwrap();
    let q = builtin_objective(&ObjectiveSpec::Frobenius, &Signature::blocks(&dims)).unwrap();
    let x = pd_point(&dims, 1.0, &mut rng);
    let primal = q.lift_eval(&kempf_ness_differential(&v, &x).unwrap()).unwrap();
    for _ in 0..200 {
        let blocks = dims
            .iter()
            .map(|&n| {
                let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                w.sort_by(|a, b| b.partial_cmp(a).unwrap());
                FlagWeights { basis: random_unitary(n, &mut rng), weights: w }
            })
            .collect();
        let xi = BoundaryCertificate { euclid_dir: vec![], blocks };
        assert!(dual_value(&p, &q, &xi).unwrap() <= primal + 1e-8);
    }
}

#[test]
fn negative_q_is_rejected() {
    let dims = [2, 2];
    let v = tensor(&dims, &mut seeded_rng(3));
    let sig = Signature::blocks(&dims);
    let q = builtin_objective(&ObjectiveSpec::NegEntropyWeighted { theta: vec![0.5, 0.5] }, &sig).unwrap();
    let p = KempfNessProblem::new(&v).unwrap();
    let cfg = FlowConfig { smoothing: Some(Smoothing::fixed(0.1)), ..FlowConfig::default() };
    let flow = integrate_flow(&p, &q, &ProductPDPoint::base(&sig), &cfg);
    assert!(matches!(flow, Err(qflow::Error::Precondition(_))));
    let group = group_subgradient_method(&v, &q, &GroupElement::identity(&dims), &cfg);
    assert!(matches!(group, Err(qflow::Error::Precondition(_))));
}
