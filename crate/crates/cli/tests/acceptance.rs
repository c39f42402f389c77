//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use modctx_cli::{bound, evaluate_state, Overrides, RunConfig};
use modctx_core::appendix_basis::{self, AppendixConfig};
use modctx_core::classical_bound::{
    s_value, sample_models, saturating_assignment, triangle_bound, Assignment, CLASSICAL_BOUND,
};
use modctx_core::cv_sim::{
    born_distribution, context_expectations, empirical_marginal, make_ensemble, make_state, measure_context,
    outcome_distribution, s_statistic, sweep_states, Ensemble, GridSpec, Representation, ShotRecord, StateSpec,
    WaveFunction,
};
use modctx_core::weyl_algebra::{
    certify_contexts, compatibility_matrix, observable_table, ContextId, ObservableId, UnitSystem,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const BOUND_VALUE_TOL: f64 = 1e-6;
const ARGMAX_TOL: f64 = 1e-4;
const SATURATION_TOL: f64 = 1e-12;
const MODEL_SLACK: f64 = 1e-9;
const QUANTUM_TOL: f64 = 1e-9;
const SHOTS: usize = 10_000;
const MAX_Z: f64 = 4.0;
const APPENDIX_TOL: f64 = 1e-8;
const TRANSFORM_TOL: f64 = 1e-12;
const PROPERTY_CASES: u32 = 32;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn run(index: usize, name: &str, limit: Duration, check: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let ok = v.passed && in_time;
    println!(
        "{} [{index}] {name}: {}; {:.2} s (limit {} s){}",
        if ok { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", too slow" },
    );
    ok
}

fn bound_command() -> Verdict {
    let cfg = RunConfig::resolve(Overrides::default()).unwrap();
    let out = bound(&cfg).unwrap();
    let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let max = report["max"].as_f64().unwrap();
    let orbit = report["argmax_orbit_distance"].as_f64().unwrap();
    verdict(
        (max - CLASSICAL_BOUND).abs() <= BOUND_VALUE_TOL && orbit <= ARGMAX_TOL,
        format!("max = {max:.15}, |max − 3√3| = {:.1e}, argmax orbit distance = {orbit:.1e}", (max - CLASSICAL_BOUND).abs()),
    )
}

fn saturation_and_sampling() -> Verdict {
    let sat = s_value(&saturating_assignment()).norm();
    let samples = sample_models(1_000_000, 0).unwrap();
    let gap = (sat - CLASSICAL_BOUND).abs();
    verdict(
        gap <= SATURATION_TOL && samples.max_observed <= CLASSICAL_BOUND + MODEL_SLACK && samples.n_samples == 1_000_000,
        format!(
            "saturating |S| − 3√3 = {gap:.1e}, max over {} models = {:.12}",
            samples.n_samples, samples.max_observed
        ),
    )
}

fn exact_certification() -> Verdict {
    let units = UnitSystem::default();
    let certs = certify_contexts(&observable_table(&units));
    let matrix = compatibility_matrix(&units);
    let in_context_zero = ContextId::ALL.iter().all(|ctx| {
        let m = ctx.members();
        m.iter().all(|a| m.iter().all(|b| matrix.get(*a, *b).is_zero()))
    });
    let phases: Vec<String> = certs.iter().map(|c| format!("{}:{}π", c.context, c.phase_over_pi)).collect();
    verdict(
        certs.iter().all(|c| c.certified) && in_context_zero,
        format!("product phases [{}], in-context commutator phases all zero: {in_context_zero}", phases.join(", ")),
    )
}

fn state_sweep() -> Verdict {
    let grid = GridSpec::default();
    let states = sweep_states();
    let mixed = states.iter().filter(|(_, s)| s.is_mixed()).count();
    let results: Vec<_> = states.iter().map(|(n, s)| evaluate_state(n, s, &grid).unwrap()).collect();
    let worst = results.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    verdict(
        states.len() >= 8 && mixed >= 2 && worst <= QUANTUM_TOL,
        format!(
            "M={} K={} N={}, {} states ({mixed} mixed), max deviation from ±1 and 6 = {worst:.1e}",
            grid.m(),
            grid.k(),
            grid.n(),
            states.len()
        ),
    )
}

/// Largest `|f − p|/SE` over classes with expected count at least 5, with
/// the remaining nonzero classes pooled into a single bin. Counts in
/// classes of probability zero are returned separately.
fn z_scores(records: &[ShotRecord], id: ObservableId, probs: &[f64], n: usize) -> (f64, usize) {
    let shots = records.len() as f64;
    let freq = empirical_marginal(records, id, n);
    let z = |f: f64, p: f64| if p >= 1.0 { 0.0 } else { (f - p).abs() / (p * (1.0 - p) / shots).sqrt() };
    let mut worst: f64 = 0.0;
    let mut impossible = 0;
    let (mut pool_p, mut pool_f) = (0.0, 0.0);
    for (p, f) in probs.iter().zip(&freq) {
        if *p < 1e-14 {
            if *f > 0.0 {
                impossible += 1;
            }
        } else if shots * p >= 5.0 {
            worst = worst.max(z(*f, *p));
        } else {
            pool_p += p;
            pool_f += f;
        }
    }
    if pool_p > 0.0 {
        worst = worst.max(z(pool_f, pool_p));
    }
    (worst, impossible)
}

fn sampling() -> Verdict {
    let grid = GridSpec::default();
    let mixture = sweep_states().into_iter().find(|(n, _)| n == "mixture_three_states").unwrap().1;
    let states = [("gaussian", StateSpec::gaussian([0.0; 2], [0.0; 2], 1.0)), ("mixture_three_states", mixture)];
    let mut worst_product: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut impossible = 0;
    for (_, spec) in &states {
        let ensemble = make_ensemble(spec, &grid).unwrap();
        for ctx in ContextId::ALL {
            let records = measure_context(&ensemble, ctx, SHOTS, 2024).unwrap();
            let sign = Complex64::new(f64::from(ctx.sign()), 0.0);
            for r in &records {
                worst_product = worst_product.max((r.product - sign).norm());
            }
            for id in ctx.members() {
                let born = born_distribution(&ensemble, id).unwrap();
                let (z, bad) = z_scores(&records, id, &born.probs, grid.n());
                worst_z = worst_z.max(z);
                impossible += bad;
            }
        }
    }
    verdict(
        worst_product <= QUANTUM_TOL && worst_z <= MAX_Z && impossible == 0,
        format!(
            "{SHOTS} shots x 6 contexts x {} states, max |product − sign| = {worst_product:.1e}, \
             max marginal z = {worst_z:.2}, counts in zero-probability classes = {impossible}",
            states.len()
        ),
    )
}

fn appendix() -> Verdict {
    let report = appendix_basis::verify(&AppendixConfig::default()).unwrap();
    let reconstruction = report
        .residuals
        .iter()
        .find(|c| c.name.contains("reconstruction"))
        .map(|c| c.residual)
        .unwrap_or(f64::INFINITY);
    verdict(
        report.exact_commutators && report.max_residual <= APPENDIX_TOL && reconstruction <= APPENDIX_TOL,
        format!(
            "{} checks, max residual = {:.1e}, reconstruction = {reconstruction:.1e}",
            report.residuals.len(),
            report.max_residual
        ),
    )
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn rep_strategy() -> impl Strategy<Value = Representation> {
    (0..Representation::ALL.len()).prop_map(|i| Representation::ALL[i])
}

fn transform_property() -> Result<(), String> {
    let grid = GridSpec::default();
    runner()
        .run(&(0u64..10_000, rep_strategy(), rep_strategy()), |(seed, a, b)| {
            let psi = make_state(&StateSpec::random(seed), &grid).unwrap().transform(a);
            let moved = psi.transform(b);
            prop_assert!((moved.norm_sqr() - 1.0).abs() <= TRANSFORM_TOL);
            prop_assert!(moved.transform(a).distance(&psi) <= TRANSFORM_TOL);
            Ok(())
        })
        .map_err(|e| format!("transform: {e}"))
}

fn max_gap(a: &BTreeMap<[u32; 3], f64>, b: &BTreeMap<[u32; 3], f64>) -> f64 {
    a.keys()
        .chain(b.keys())
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

fn order_property() -> Result<(), String> {
    let grid = GridSpec::new(2, 3, UnitSystem::default()).unwrap();
    let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    runner()
        .run(&(0u64..10_000, 0usize..6), |(seed, c)| {
            let psi = make_state(&StateSpec::random(seed), &grid).unwrap();
            let ctx = ContextId::ALL[c];
            let m = ctx.members();
            let reference = outcome_distribution(&psi, ctx, m).unwrap();
            for order in orders {
                let d = outcome_distribution(&psi, ctx, order.map(|i| m[i])).unwrap();
                prop_assert!(max_gap(&reference, &d) <= 1e-12);
            }
            Ok(())
        })
        .map_err(|e| format!("measurement order: {e}"))
}

fn ensemble_property() -> Result<(), String> {
    let grid = GridSpec::default();
    runner()
        .run(&(0u64..10_000, 0.0..PI, 0.0..TAU), |(seed, theta, phi)| {
            let psi1 = make_state(&StateSpec::random(seed), &grid).unwrap();
            let raw = make_state(&StateSpec::random(seed + 10_000), &grid).unwrap();
            let overlap = psi1.inner(&raw);
            let amps = raw.amplitudes().iter().zip(psi1.amplitudes()).map(|(b, a)| b - overlap * a).collect();
            let psi2 = WaveFunction::normalized(amps, Representation::POSITION, grid).unwrap();
            let combine = |c1: Complex64, c2: Complex64| {
                let amps = psi1.amplitudes().iter().zip(psi2.amplitudes()).map(|(a, b)| c1 * a + c2 * b).collect();
                WaveFunction::normalized(amps, Representation::POSITION, grid).unwrap()
            };
            let rot = Complex64::from_polar(1.0, phi);
            let (c, s) = (theta.cos(), theta.sin());
            let u = combine(Complex64::new(c, 0.0), rot * s);
            let v = combine(-rot.conj() * s, Complex64::new(c, 0.0));
            let first = Ensemble::new(vec![(0.5, psi1.clone()), (0.5, psi2.clone())]).unwrap();
            let second = Ensemble::new(vec![(0.5, u), (0.5, v)]).unwrap();
            prop_assert!((s_statistic(&first).unwrap() - s_statistic(&second).unwrap()).norm() <= QUANTUM_TOL);
            let (a, b) = (context_expectations(&first).unwrap(), context_expectations(&second).unwrap());
            prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).norm() <= QUANTUM_TOL));
            Ok(())
        })
        .map_err(|e| format!("ensemble decomposition: {e}"))
}

fn triangle_property() -> Result<(), String> {
    runner()
        .run(&(proptest::array::uniform9(0.0..TAU), proptest::array::uniform3(0.0..TAU)), |(phases, moved)| {
            let asg = Assignment::from_phases(phases);
            let other = [ObservableId::A, ObservableId::LowerB, ObservableId::Gamma]
                .into_iter()
                .zip(moved)
                .fold(asg, |acc, (id, t)| acc.with_value(id, Complex64::from_polar(1.0, t)).unwrap());
            prop_assert!((triangle_bound(&asg) - triangle_bound(&other)).abs() <= 1e-12);
            Ok(())
        })
        .map_err(|e| format!("triangle bound: {e}"))
}

fn properties() -> Verdict {
    let results = [transform_property(), order_property(), ensemble_property(), triangle_property()];
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("4 suites x {PROPERTY_CASES} cases")
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "noncontextual bound by optimization", secs(5), bound_command),
        run(2, "saturating model and random models", secs(10), saturation_and_sampling),
        run(3, "exact context certification", secs(5), exact_certification),
        run(4, "state sweep on the default grid", secs(30), state_sweep),
        run(5, "sequential sampling", secs(120), sampling),
        run(6, "eigenbasis residuals", secs(30), appendix),
        run(7, "property suites", secs(120), properties),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
