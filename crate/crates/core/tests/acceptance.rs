//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test -p otflow-core --test acceptance -- --nocapture` to
//! see them).  Every tolerance and wall-clock budget is pinned here.

use nalgebra::DMatrix;
use otflow_core::flow::{
    chern_ricci_flow_at, convergence_report, generalized_flow, generalized_flow_closed_form,
    integrate_pluriclosed, FlowControls, FlowKind, PluriclosedSystem,
};
use otflow_core::hermitian::{
    bismut_ricci_11, bismut_ricci_closed_form, chern_ricci, classify_pluriclosed_shape,
    form_to_matrix, is_pluriclosed, HermitianMetric, LimitForm, NormalFormMetric,
};
use otflow_core::linalg;
use otflow_core::ot::{OTParams, SemidirectParams};
use otflow_core::scalar::{CExact, Scalar, C64};
use otflow_core::soliton::{derivation_space, detect_algebraic_soliton};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn criterion(
    number: usize,
    description: &str,
    budget_s: f64,
    body: impl FnOnce() -> Result<(), String>,
) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(()) if elapsed <= budget_s => {
            println!("criterion {number} [{description}]: PASS ({elapsed:.2}s)");
        }
        Ok(()) => {
            println!(
                "criterion {number} [{description}]: FAIL (over budget: {elapsed:.2}s > {budget_s}s)"
            );
            panic!("criterion {number} exceeded its {budget_s}s budget ({elapsed:.2}s)");
        }
        Err(e) => {
            println!("criterion {number} [{description}]: FAIL — {e}");
            panic!("criterion {number} failed: {e}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn identity_pattern(s: usize) -> Vec<Vec<f64>> {
    (0..s)
        .map(|i| (0..s).map(|j| if i == j { -1.0 } else { 0.0 }).collect())
        .collect()
}

/// Admissible parameters with at least `min_admissible` zero off-diagonal
/// columns; nonzero c entries are bounded away from 0 so classification
/// obstructions stay well above tolerance.
fn random_admissible_params(s: usize, min_admissible: usize, rng: &mut StdRng) -> OTParams {
    loop {
        let c: Vec<Vec<f64>> = (0..s)
            .map(|i| {
                (0..s)
                    .map(|j| {
                        if i != j && rng.gen_bool(0.5) {
                            0.0
                        } else {
                            let mag = rng.gen_range(0.2..1.5);
                            if rng.gen_bool(0.5) {
                                mag
                            } else {
                                -mag
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let p = OTParams::new(s, s, identity_pattern(s), c).unwrap();
        if p.admissible_mixed_indices().unwrap().len() >= min_admissible {
            return p;
        }
    }
}

fn random_normal_form(p: &OTParams, rng: &mut StdRng, want_mixed: bool) -> NormalFormMetric {
    let s = p.s();
    let a: Vec<f64> = (0..s).map(|_| rng.gen_range(0.4..3.0)).collect();
    let b: Vec<f64> = (0..s).map(|_| rng.gen_range(0.4..3.0)).collect();
    let admissible = p.admissible_mixed_indices().unwrap();
    let mut mixed = Vec::new();
    if want_mixed {
        for &idx in &admissible {
            if rng.gen_bool(0.7) {
                let cap = (a[idx] * b[idx]).sqrt();
                let r = rng.gen_range(0.2..0.9) * cap;
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                mixed.push((idx, C64::from_polar(r, phase)));
            }
        }
    }
    NormalFormMetric::new(a, b, mixed).unwrap()
}

fn random_posdef(n: usize, rng: &mut StdRng) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    &a * a.adjoint() + DMatrix::identity(n, n) * C64::from_re(0.4)
}

#[test]
fn criterion_1_chern_ricci_metric_independence() {
    criterion(
        1,
        "Chern-Ricci form is metric-independent and equals -omega_inf",
        1.0,
        || {
            let mut rng = StdRng::seed_from_u64(101);
            let p = OTParams::new(
                2,
                1,
                vec![vec![-1.0], vec![-1.0]],
                vec![vec![0.35], vec![-0.85]],
            )
            .map_err(|e| e.to_string())?;
            let sc = p.build_algebra::<C64>();
            let reference =
                chern_ricci(&sc, &HermitianMetric::identity(2, 1)).map_err(|e| e.to_string())?;
            let r = form_to_matrix(&reference);
            for i in 0..3 {
                for j in 0..3 {
                    let expected = if i == j && i < 2 {
                        C64::from_re(-0.25)
                    } else {
                        C64::from_re(0.0)
                    };
                    ensure!(
                        (r[(i, j)] - expected).norm() <= 1e-10,
                        "rho_C entry ({i},{j}) = {} differs from -omega_inf",
                        r[(i, j)]
                    );
                }
            }
            for trial in 0..20 {
                let g = HermitianMetric::new(2, 1, random_posdef(3, &mut rng))
                    .map_err(|e| e.to_string())?;
                let rho = chern_ricci(&sc, &g).map_err(|e| e.to_string())?;
                let dev = rho.sub(&reference).map_err(|e| e.to_string())?.max_abs();
                ensure!(dev <= 1e-10, "metric {trial} moved rho_C by {dev:.3e}");
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_2_pluriclosed_classifier_vs_oracle() {
    criterion(
        2,
        "shape classifier matches the del-delbar oracle on 200 cases",
        10.0,
        || {
            let mut rng = StdRng::seed_from_u64(202);
            let tol = 1e-10;
            for case in 0..200 {
                let violate = case % 2 == 1;
                let s = if violate {
                    rng.gen_range(2..=3)
                } else {
                    rng.gen_range(1..=3)
                };
                let p = random_admissible_params(s, 0, &mut rng);
                let metric = random_normal_form(&p, &mut rng, true);
                let mut g = metric.to_matrix();
                if violate {
                    let eps = rng.gen_range(0.05..0.2);
                    let admissible = p.admissible_mixed_indices().unwrap();
                    let choices: &[u8] = if admissible.len() < s {
                        &[0, 1, 2]
                    } else {
                        &[0, 1]
                    };
                    match choices[rng.gen_range(0..choices.len())] {
                        0 => {
                            // real part in the h block off-diagonal
                            let (i, j) = (0, 1);
                            g[(i, j)] += C64::from_re(eps);
                            g[(j, i)] += C64::from_re(eps);
                        }
                        1 => {
                            // ideal block off-diagonal, any phase
                            let (i, j) = (s, s + 1);
                            let z = C64::from_polar(eps, rng.gen_range(0.0..std::f64::consts::TAU));
                            g[(i, j)] += z;
                            g[(j, i)] += z.conj();
                        }
                        _ => {
                            // mixed entry at a non-admissible diagonal position
                            let idx = (0..s)
                                .find(|i| !admissible.contains(i))
                                .expect("non-admissible index exists");
                            g[(idx, s + idx)] += C64::from_re(eps);
                            g[(s + idx, idx)] += C64::from_re(eps);
                        }
                    }
                    // keep it a metric
                    HermitianMetric::new(s, s, g.clone()).map_err(|e| e.to_string())?;
                }
                let sc = p.build_algebra::<C64>();
                let shape = classify_pluriclosed_shape(&p, &g, tol).map_err(|e| e.to_string())?;
                let rows = linalg::from_nalgebra(&g);
                let oracle = is_pluriclosed(&sc, &rows, tol).map_err(|e| e.to_string())?;
                ensure!(
                    shape == oracle,
                    "case {case} (s = {s}, violate = {violate}): shape {shape} vs oracle {oracle}"
                );
                ensure!(
                    oracle == !violate,
                    "case {case}: generator produced wrong ground truth"
                );
                // exact agreement on the same dyadic input
                let sce = p.build_algebra::<CExact>();
                let ge = linalg::convert::<CExact>(&rows);
                let exact = is_pluriclosed(&sce, &ge, 0.0).map_err(|e| e.to_string())?;
                ensure!(
                    exact == shape,
                    "case {case}: exact oracle {exact} vs classifier {shape}"
                );
            }

            // skew-imaginary h off-diagonals cancel in del-delbar; classifier
            // and both oracles must agree they are pluriclosed
            for _ in 0..10 {
                let s = rng.gen_range(2..=3);
                let p = random_admissible_params(s, 0, &mut rng);
                let metric = random_normal_form(&p, &mut rng, true);
                let mut g = metric.to_matrix();
                let y = rng.gen_range(0.02..0.1);
                g[(0, 1)] += C64::new(0.0, y);
                g[(1, 0)] += C64::new(0.0, -y);
                HermitianMetric::new(s, s, g.clone()).map_err(|e| e.to_string())?;
                let sc = p.build_algebra::<C64>();
                let rows = linalg::from_nalgebra(&g);
                let shape = classify_pluriclosed_shape(&p, &g, tol).map_err(|e| e.to_string())?;
                let oracle = is_pluriclosed(&sc, &rows, tol).map_err(|e| e.to_string())?;
                let sce = p.build_algebra::<CExact>();
                let exact = is_pluriclosed(&sce, &linalg::convert::<CExact>(&rows), 0.0)
                    .map_err(|e| e.to_string())?;
                ensure!(
                    shape && oracle && exact,
                    "skew-imaginary case disagrees: shape {shape}, oracle {oracle}, exact {exact}"
                );
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_3_closed_form_bismut_ricci_equivalence() {
    criterion(
        3,
        "closed-form rho_B matches the direct evaluation on 100 metrics",
        5.0,
        || {
            let mut rng = StdRng::seed_from_u64(303);
            let mut saw_mixed = 0usize;
            for case in 0..100 {
                let s = rng.gen_range(1..=3);
                let p = random_admissible_params(s, 1, &mut rng);
                let metric = random_normal_form(&p, &mut rng, true);
                saw_mixed += usize::from(!metric.mixed().is_empty());
                let sc = p.build_algebra::<C64>();
                let direct = bismut_ricci_11(&sc, &metric.to_metric().map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                let closed =
                    bismut_ricci_closed_form::<C64>(&p, &metric).map_err(|e| e.to_string())?;
                let dev = direct.sub(&closed).map_err(|e| e.to_string())?.max_abs();
                ensure!(dev <= 1e-10, "case {case}: routes differ by {dev:.3e}");
            }
            ensure!(
                saw_mixed >= 30,
                "generator produced too few mixed cases ({saw_mixed})"
            );
            Ok(())
        },
    );
}

#[test]
fn criterion_4_ode_asymptotics() {
    criterion(
        4,
        "pluriclosed ODE: B frozen, |C| decays, u grows, A ~ (3/4)t",
        5.0,
        || {
            // s = 2 with exactly one admissible off-diagonal index (index 2):
            // column 1 carries c_{21} != 0, column 2 is clean off-diagonal.
            let p = OTParams::new(
                2,
                2,
                identity_pattern(2),
                vec![vec![0.4, 0.0], vec![0.9, 0.3]],
            )
            .map_err(|e| e.to_string())?;
            ensure!(
                p.admissible_mixed_indices().unwrap() == vec![1],
                "expected a single admissible index"
            );
            let c0 = C64::from_re(0.5f64.sqrt()); // |C|^2 = 1/2
            let metric = NormalFormMetric::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![(1, c0)])
                .map_err(|e| e.to_string())?;
            let system = PluriclosedSystem::new(p, &metric).map_err(|e| e.to_string())?;
            let trace = integrate_pluriclosed(
                &system,
                &system.initial_state(&metric),
                1e5,
                &FlowControls::default(),
            )
            .map_err(|e| e.to_string())?;

            let mut last_c = f64::INFINITY;
            for sample in trace.samples() {
                let st = &sample.state;
                ensure!(
                    st.b == vec![1.0, 1.0],
                    "B moved at t = {}: {:?}",
                    st.t,
                    st.b
                );
                ensure!(
                    sample.c_abs[0] <= last_c + 1e-15,
                    "|C| increased at t = {}",
                    st.t
                );
                last_c = sample.c_abs[0];
                let du = system.gram_derivative(st).map_err(|e| e.to_string())?[0];
                ensure!(
                    du >= 0.75 * st.b[1] - 1e-9,
                    "u' = {du} dips below (3/4)B at t = {}",
                    st.t
                );
            }
            let end = trace.final_state();
            for (i, a) in end.a.iter().enumerate() {
                let ratio = a / (1.0 + end.t);
                ensure!(
                    (ratio - 0.75).abs() <= 0.01,
                    "A_{}/(1+t) = {ratio} outside 0.75 +/- 0.01",
                    i + 1
                );
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_5_ode_vs_generic_flow() {
    criterion(
        5,
        "reduced ODE agrees with direct curvature integration on [0,100]",
        10.0,
        || {
            let p = OTParams::new(
                2,
                2,
                identity_pattern(2),
                vec![vec![0.4, 0.0], vec![0.9, 0.3]],
            )
            .map_err(|e| e.to_string())?;
            let metric = NormalFormMetric::new(
                vec![1.0, 1.3],
                vec![0.8, 1.0],
                vec![(1, C64::new(0.5, 0.25))],
            )
            .map_err(|e| e.to_string())?;
            let sc = p.build_algebra::<C64>();
            let system = PluriclosedSystem::new(p, &metric).map_err(|e| e.to_string())?;
            let ctl = FlowControls::default();
            let reduced =
                integrate_pluriclosed(&system, &system.initial_state(&metric), 100.0, &ctl)
                    .map_err(|e| e.to_string())?;
            let generic = generalized_flow(
                &sc,
                &metric.to_metric().map_err(|e| e.to_string())?,
                100.0,
                &ctl,
            )
            .map_err(|e| e.to_string())?;
            let reduced_samples = reduced.metric_samples().map_err(|e| e.to_string())?;
            ensure!(
                reduced_samples.len() == generic.samples.len(),
                "sample grids differ"
            );
            for ((t1, g1), (t2, g2)) in reduced_samples.iter().zip(&generic.samples) {
                ensure!((t1 - t2).abs() < 1e-12, "time grids differ");
                let scale = g1.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let dev = (g1 - g2).iter().map(|z| z.norm()).fold(0.0, f64::max);
                ensure!(
                    dev / scale <= 1e-6,
                    "relative deviation {:.3e} at t = {t1}",
                    dev / scale
                );
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_6_soliton_classification() {
    criterion(
        6,
        "pluriclosed solitons are exactly the diagonal equal-A metrics",
        5.0,
        || {
            let mut rng = StdRng::seed_from_u64(606);
            for case in 0..50 {
                let s = rng.gen_range(1..=3);
                // distinct diagonal c entries keep the lambda columns distinct
                let p = loop {
                    let cand = random_admissible_params(s, 1, &mut rng);
                    let mut diag: Vec<f64> = (0..s).map(|i| cand.c()[i][i]).collect();
                    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    if diag.windows(2).all(|w| (w[1] - w[0]).abs() > 0.05) {
                        break cand;
                    }
                };
                let sc = p.build_algebra::<C64>();
                let kind = match case % 3 {
                    0 => 0,           // diagonal, equal A
                    1 if s >= 2 => 1, // diagonal, distinct A
                    _ => 2,           // mixed entry present
                };
                let b: Vec<f64> = (0..s).map(|_| rng.gen_range(0.4..2.5)).collect();
                let metric = match kind {
                    0 => {
                        let a = rng.gen_range(0.4..2.5);
                        NormalFormMetric::diagonal(vec![a; s], b)
                    }
                    1 => {
                        let mut a: Vec<f64> = (0..s).map(|_| rng.gen_range(0.4..2.5)).collect();
                        a[0] = a[1] + rng.gen_range(0.3..1.0);
                        NormalFormMetric::diagonal(a, b)
                    }
                    _ => {
                        let a: Vec<f64> = (0..s).map(|_| rng.gen_range(0.4..2.5)).collect();
                        let idx = p.admissible_mixed_indices().unwrap()[0];
                        let cap = (a[idx] * b[idx]).sqrt();
                        let c = C64::from_polar(
                            rng.gen_range(0.3..0.9) * cap,
                            rng.gen_range(0.0..std::f64::consts::TAU),
                        );
                        NormalFormMetric::new(a, b, vec![(idx, c)])
                    }
                }
                .map_err(|e| e.to_string())?;
                let g = metric.to_metric().map_err(|e| e.to_string())?;
                let rho = bismut_ricci_11(&sc, &g).map_err(|e| e.to_string())?;
                let cert = detect_algebraic_soliton(&sc, &g, &rho).map_err(|e| e.to_string())?;
                match kind {
                    0 => {
                        let cert = cert.ok_or_else(|| {
                            format!("case {case}: diagonal equal-A metric not recognized")
                        })?;
                        let a = metric.a()[0];
                        ensure!(
                            cert.residual <= 1e-8,
                            "case {case}: residual {:.3e}",
                            cert.residual
                        );
                        ensure!(
                            (cert.c + 3.0 / (4.0 * a)).abs() <= 1e-7 * (1.0 + 1.0 / a),
                            "case {case}: c = {} instead of {}",
                            cert.c,
                            -3.0 / (4.0 * a)
                        );
                        ensure!(cert.expanding, "case {case}: soliton must be expanding");
                    }
                    _ => {
                        ensure!(
                            cert.is_none(),
                            "case {case} (kind {kind}): spurious certificate"
                        );
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_7_cheeger_gromov_limits() {
    criterion(
        7,
        "normalized pullbacks land on the flow-dependent limit metrics",
        5.0,
        || {
            use otflow_core::flow::cheeger_gromov_pullback;
            let p = OTParams::new(
                2,
                2,
                identity_pattern(2),
                vec![vec![0.4, 0.0], vec![0.9, 0.3]],
            )
            .map_err(|e| e.to_string())?;
            let metric = NormalFormMetric::new(
                vec![1.4, 0.9],
                vec![0.6, 1.8],
                vec![(1, C64::new(0.4, -0.3))],
            )
            .map_err(|e| e.to_string())?;
            let g0 = metric.to_metric().map_err(|e| e.to_string())?;
            let t = 1e5;

            let system = PluriclosedSystem::new(p, &metric).map_err(|e| e.to_string())?;
            let trace = integrate_pluriclosed(
                &system,
                &system.initial_state(&metric),
                t,
                &FlowControls::default(),
            )
            .map_err(|e| e.to_string())?;
            let (t_end, g_end) = trace
                .metric_samples()
                .map_err(|e| e.to_string())?
                .into_iter()
                .last()
                .unwrap();
            let pb = cheeger_gromov_pullback(&g_end, t_end, 2).map_err(|e| e.to_string())?;
            let target = LimitForm::omega_infinity(2, 2)
                .scaled(3.0)
                .plus_ideal_block(&g0);
            let dev = (&pb - target.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            ensure!(dev <= 0.01, "pluriclosed pullback off by {dev:.4}");

            let g_cr = chern_ricci_flow_at(&g0, t).map_err(|e| e.to_string())?;
            let pb = cheeger_gromov_pullback(&g_cr, t, 2).map_err(|e| e.to_string())?;
            let target = LimitForm::omega_infinity(2, 2).plus_ideal_block(&g0);
            let dev = (&pb - target.matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            ensure!(dev <= 0.01, "Chern-Ricci pullback off by {dev:.4}");

            // the reduced trajectory also satisfies the norm-level report
            let report = convergence_report(
                &trace.metric_samples().map_err(|e| e.to_string())?,
                2,
                FlowKind::Pluriclosed,
                0.01,
            )
            .map_err(|e| e.to_string())?;
            ensure!(report.normalized_h_bounded, "condition 1 failed");
            ensure!(
                report.ideal_block_drift == 0.0,
                "condition 2: ideal block drifted by {:.3e}",
                report.ideal_block_drift
            );
            ensure!(
                report.h_limit_reached,
                "condition 3: deviation {:.4}",
                report.h_limit_deviation
            );
            Ok(())
        },
    );
}

#[test]
fn criterion_8_derivation_algebra_dimension() {
    criterion(
        8,
        "J-commuting derivations: dimension 2s, kill h, preserve W-lines",
        1.0,
        || {
            let mut rng = StdRng::seed_from_u64(808);
            for s in 1..=3usize {
                let p = loop {
                    let cand = random_admissible_params(s, 0, &mut rng);
                    let mut diag: Vec<f64> = (0..s).map(|i| cand.c()[i][i]).collect();
                    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    if diag.windows(2).all(|w| (w[1] - w[0]).abs() > 0.05) {
                        break cand;
                    }
                };
                let sc = p.build_algebra::<C64>();
                let basis = derivation_space(&sc, true);
                ensure!(
                    basis.len() == 2 * s,
                    "s = {s}: derivation dimension {} instead of {}",
                    basis.len(),
                    2 * s
                );
                let n = sc.n10();
                for d in &basis {
                    ensure!(
                        d.derivation_defect(&sc) <= 1e-10,
                        "s = {s}: basis element is not a derivation"
                    );
                    let e = d.holomorphic_block();
                    for col in 0..s {
                        for row in 0..n {
                            ensure!(
                                e[(row, col)].norm() <= 1e-9,
                                "s = {s}: derivation does not annihilate h"
                            );
                        }
                    }
                    for a in s..n {
                        for b in 0..n {
                            if a != b {
                                ensure!(e[(b, a)].norm() <= 1e-9, "s = {s}: W-line not preserved");
                            }
                        }
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_9_semidirect_generalization() {
    criterion(
        9,
        "orthogonal metrics annihilate the mixed/ideal curvature; closed form matches",
        10.0,
        || {
            let mut rng = StdRng::seed_from_u64(909);
            for case in 0..50 {
                let r = rng.gen_range(1..=3);
                let s = rng.gen_range(1..=3);
                let lambda: Vec<Vec<C64>> = (0..r)
                    .map(|_| {
                        (0..s)
                            .map(|_| C64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)))
                            .collect()
                    })
                    .collect();
                let sd = SemidirectParams::new(lambda, None).map_err(|e| e.to_string())?;
                let (sc, flags) = sd.build_algebra(1e-10);
                ensure!(flags.structural(), "case {case}: builder flags");
                ensure!(
                    sc.validate().passes(1e-10),
                    "case {case}: semidirect algebra failed validation"
                );

                // orthogonal metric: independent positive blocks
                let n = r + s;
                let mut gm = DMatrix::<C64>::zeros(n, n);
                let hb = random_posdef(r, &mut rng);
                let jb = random_posdef(s, &mut rng);
                for a in 0..r {
                    for b in 0..r {
                        gm[(a, b)] = hb[(a, b)];
                    }
                }
                for a in 0..s {
                    for b in 0..s {
                        gm[(r + a, r + b)] = jb[(a, b)];
                    }
                }
                let g = HermitianMetric::new(r, s, gm).map_err(|e| e.to_string())?;
                let rho = bismut_ricci_11(&sc, &g).map_err(|e| e.to_string())?;
                let rm = form_to_matrix(&rho);
                for a in 0..n {
                    for b in 0..n {
                        if a < r && b < r {
                            continue;
                        }
                        ensure!(
                            rm[(a, b)].norm() <= 1e-10,
                            "case {case}: rho_B^(1,1) [{a}][{b}] = {} on the mixed/ideal block",
                            rm[(a, b)]
                        );
                    }
                }
            }

            // closed-form flow versus generic integration, diagonal h block
            for case in 0..10 {
                let r = rng.gen_range(1..=2);
                let s = rng.gen_range(1..=2);
                let lambda: Vec<Vec<C64>> = (0..r)
                    .map(|_| {
                        (0..s)
                            .map(|_| C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)))
                            .collect()
                    })
                    .collect();
                let sd = SemidirectParams::new(lambda, None).map_err(|e| e.to_string())?;
                let (sc, flags) = sd.build_algebra(1e-10);
                let n = r + s;
                let mut gm = DMatrix::<C64>::zeros(n, n);
                for a in 0..r {
                    gm[(a, a)] = C64::from_re(rng.gen_range(0.5..2.0));
                }
                let jb = random_posdef(s, &mut rng);
                for a in 0..s {
                    for b in 0..s {
                        gm[(r + a, r + b)] = jb[(a, b)];
                    }
                }
                let g0 = HermitianMetric::new(r, s, gm).map_err(|e| e.to_string())?;
                let t_max = 10.0;
                let generic = generalized_flow(&sc, &g0, t_max, &FlowControls::default())
                    .map_err(|e| e.to_string())?;
                for (t, gt) in &generic.samples {
                    let closed = generalized_flow_closed_form(&sc, &flags, &g0, *t)
                        .map_err(|e| e.to_string())?;
                    let scale = gt.iter().map(|z| z.norm()).fold(1.0, f64::max);
                    let dev = (gt - closed).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    ensure!(
                        dev / scale <= 1e-6,
                        "case {case}: closed form off by {:.3e} at t = {t}",
                        dev / scale
                    );
                }
            }
            Ok(())
        },
    );
}
