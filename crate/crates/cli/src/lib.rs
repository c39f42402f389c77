//! Command implementations behind the `modctx` binary.
//!
//! Each command returns an [`Outcome`]: the report printed on stdout, the
//! files to write under `--out`, and the exit status. Nothing here touches
//! the filesystem except [`Outcome::write_artifacts`].

pub mod config;

use std::path::Path;

use modctx_core::appendix_basis;
use modctx_core::classical_bound::{
    distance_to_argmax_orbit, landscape_csv, maximize_objective, sample_models, trig_objective, Histogram,
    PhasePair, CLASSICAL_BOUND,
};
use modctx_core::cv_sim::{
    context_expectations, make_ensemble, measure_context, s_statistic, shots_csv, summarize_shots, sweep_states,
    GridSpec, ShotSummary, StateSpec,
};
use modctx_core::weyl_algebra::{
    certify_contexts, compatibility_csv, context_products_csv, observable_table, ContextCertificate, ContextId,
    ObservableId, Phase, UnitSystem, WeylOp,
};
use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

pub use config::{Format, Overrides, RunConfig};

/// Tolerance on `|S − 6|`, on each context expectation and on each shot
/// product.
pub const QUANTUM_TOL: f64 = 1e-9;
/// Tolerance on the optimizer maximum against `3√3`.
pub const BOUND_TOL: f64 = 1e-6;
/// Step of the landscape CSV written next to the bound report.
pub const LANDSCAPE_STEP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] modctx_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// All errors that stop a command before it can verify anything are
    /// configuration errors.
    pub fn status(&self) -> Status {
        Status::ConfigError
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    VerificationFailed,
    ConfigError,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 1,
            Status::ConfigError => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// Printed on stdout, in the requested format.
    pub stdout: String,
    /// `(file name, contents)` pairs written under `--out`.
    pub artifacts: Vec<(String, String)>,
    /// Name of the first failing check, reported on stderr.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(passed: bool, failure: Option<String>, stdout: String, artifacts: Vec<(String, String)>) -> Self {
        Self {
            status: if passed { Status::Success } else { Status::VerificationFailed },
            stdout,
            artifacts,
            failure,
        }
    }

    pub fn write_artifacts(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.artifacts {
            std::fs::write(dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}

fn pick(format: Format, json: &str, csv: &str) -> String {
    match format {
        Format::Json => json.to_string(),
        Format::Csv => csv.to_string(),
    }
}

#[derive(Serialize)]
struct AlgebraReport<'a> {
    units: &'a UnitSystem,
    contexts: &'a [ContextCertificate],
    compatibility_rows_per_context: usize,
    all_certified: bool,
}

/// Exact certification of the six context products. With `perturb`, `C`
/// picks up an extra phase `i`, which must break `ABC = 𝟙` and `Ccγ = −𝟙`.
pub fn verify_algebra(cfg: &RunConfig, perturb: bool) -> Result<Outcome, CliError> {
    let mut table = observable_table(&cfg.units);
    if perturb {
        let c = table.get(ObservableId::C).clone();
        let shifted = WeylOp::new(
            c.generator().clone(),
            &Phase::from_pi_multiple(Rational64::new(1, 2)) + c.phase(),
            &cfg.units,
        );
        table = table.with_entry(ObservableId::C, shifted);
    }
    let certs = certify_contexts(&table);
    let compat = compatibility_csv(&table)?;
    let products = context_products_csv(&table)?;
    let all_certified = certs.iter().all(|c| c.certified);
    let report = to_json(&AlgebraReport {
        units: &cfg.units,
        contexts: &certs,
        compatibility_rows_per_context: 36,
        all_certified,
    })?;
    let failure = certs.iter().find(|c| !c.certified).map(|c| {
        format!(
            "context {} product has phase {}·π, expected sign {}",
            c.context, c.phase_over_pi, c.expected_sign
        )
    });
    let stdout = pick(cfg.format, &report, &products);
    Ok(Outcome::new(
        all_certified,
        failure,
        stdout,
        vec![
            ("verify_algebra.json".into(), report),
            ("compatibility.csv".into(), compat),
            ("context_products.csv".into(), products),
        ],
    ))
}

#[derive(Serialize)]
struct BoundReport {
    bound: f64,
    max: f64,
    argmax: PhasePair,
    argmax_orbit_distance: f64,
    objective_at_argmax: f64,
    grid_value: f64,
    grid_points: usize,
    step: f64,
    tol: f64,
    sample_max: f64,
    n_samples: u64,
    seed: u64,
    workers: usize,
    histogram: Histogram,
}

fn histogram_csv(h: &Histogram) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_lo", "bin_hi", "count"])?;
    let width = h.bin_width();
    for (i, c) in h.counts.iter().enumerate() {
        let lo = h.lo + i as f64 * width;
        w.write_record([lo.to_string(), (lo + width).to_string(), c.to_string()])?;
    }
    finish_csv(w)
}

/// Maximizes the noncontextual objective and samples random models.
pub fn bound(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.bound;
    let best = maximize_objective(p.step, p.tol)?;
    let samples = sample_models(p.samples, cfg.seed)?;
    let report = BoundReport {
        bound: CLASSICAL_BOUND,
        max: best.value,
        argmax: best.argmax,
        argmax_orbit_distance: distance_to_argmax_orbit(best.argmax),
        objective_at_argmax: trig_objective(best.argmax),
        grid_value: best.grid_value,
        grid_points: best.grid_points,
        step: p.step,
        tol: p.tol,
        sample_max: samples.max_observed,
        n_samples: samples.n_samples,
        seed: samples.seed,
        workers: samples.workers,
        histogram: samples.histogram.clone(),
    };
    let mut failure = None;
    if (best.value - CLASSICAL_BOUND).abs() > BOUND_TOL {
        failure = Some(format!("optimizer maximum {} is not within {BOUND_TOL} of 3√3", best.value));
    } else if samples.max_observed > CLASSICAL_BOUND + QUANTUM_TOL {
        failure = Some(format!("sampled model reached {} above 3√3", samples.max_observed));
    }
    let json = to_json(&report)?;
    let hist = histogram_csv(&samples.histogram)?;
    let mut artifacts = vec![("bound.json".into(), json.clone()), ("histogram.csv".into(), hist.clone())];
    if cfg.out.is_some() {
        artifacts.push(("landscape.csv".into(), landscape_csv(LANDSCAPE_STEP)?));
    }
    Ok(Outcome::new(failure.is_none(), failure, pick(cfg.format, &json, &hist), artifacts))
}

#[derive(Clone, Debug, Serialize)]
pub struct ContextValue {
    pub context: ContextId,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateResult {
    pub name: String,
    pub mixed: bool,
    pub contexts: Vec<ContextValue>,
    pub s_re: f64,
    pub s_im: f64,
    /// Largest of `|S − 6|` and `|⟨context⟩ − sign|`.
    pub max_deviation: f64,
    pub passed: bool,
}

#[derive(Serialize)]
struct ViolationReport<'a> {
    grid: &'a GridSpec,
    tolerance: f64,
    states: &'a [StateResult],
    passed: bool,
}

/// Context expectations and `S` for one named state.
pub fn evaluate_state(name: &str, spec: &StateSpec, grid: &GridSpec) -> Result<StateResult, CliError> {
    let ensemble = make_ensemble(spec, grid)?;
    let values = context_expectations(&ensemble)?;
    let s = s_statistic(&ensemble)?;
    let mut deviation = (s - 6.0).norm();
    let contexts = ContextId::ALL
        .iter()
        .map(|ctx| {
            let v = values[ctx.index()];
            deviation = deviation.max((v - f64::from(ctx.sign())).norm());
            ContextValue {
                context: *ctx,
                re: v.re,
                im: v.im,
            }
        })
        .collect();
    Ok(StateResult {
        name: name.to_string(),
        mixed: spec.is_mixed(),
        contexts,
        s_re: s.re,
        s_im: s.im,
        max_deviation: deviation,
        passed: deviation <= QUANTUM_TOL,
    })
}

fn violation_csv(rows: &[StateResult]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["state".to_string()];
    for ctx in ContextId::ALL {
        header.push(format!("{ctx}_re"));
        header.push(format!("{ctx}_im"));
    }
    header.extend(["S_re", "S_im", "max_deviation"].map(String::from));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.name.clone()];
        for c in &r.contexts {
            rec.push(c.re.to_string());
            rec.push(c.im.to_string());
        }
        rec.extend([r.s_re.to_string(), r.s_im.to_string(), r.max_deviation.to_string()]);
        w.write_record(&rec)?;
    }
    finish_csv(w)
}

/// Evaluates `S` for the configured state, or for the built-in list with
/// `sweep`.
pub fn violate(cfg: &RunConfig, sweep: bool) -> Result<Outcome, CliError> {
    let states = if sweep {
        sweep_states()
    } else {
        vec![("state".to_string(), cfg.state.clone())]
    };
    let rows = states
        .iter()
        .map(|(name, spec)| evaluate_state(name, spec, &cfg.grid))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = rows.iter().all(|r| r.passed);
    let failure = rows
        .iter()
        .find(|r| !r.passed)
        .map(|r| format!("state {} deviates by {} from the quantum prediction", r.name, r.max_deviation));
    let json = to_json(&ViolationReport {
        grid: &cfg.grid,
        tolerance: QUANTUM_TOL,
        states: &rows,
        passed,
    })?;
    let table = violation_csv(&rows)?;
    Ok(Outcome::new(
        passed,
        failure,
        pick(cfg.format, &json, &table),
        vec![("violate.json".into(), json), ("violate.csv".into(), table)],
    ))
}

#[derive(Serialize)]
struct SampleReport<'a> {
    grid: &'a GridSpec,
    shots: usize,
    seed: u64,
    tolerance: f64,
    contexts: &'a [ShotSummary],
    passed: bool,
}

/// Sequential measurement of all six contexts.
pub fn sample(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ensemble = make_ensemble(&cfg.state, &cfg.grid)?;
    let mut log = String::new();
    let mut summaries = Vec::new();
    for ctx in ContextId::ALL {
        let records = measure_context(&ensemble, ctx, cfg.shots, cfg.seed)?;
        let csv = shots_csv(&records);
        if log.is_empty() {
            log.push_str(&csv);
        } else {
            log.push_str(csv.split_once('\n').map_or("", |(_, rows)| rows));
        }
        summaries.push(summarize_shots(ctx, &records)?);
    }
    let passed = summaries.iter().all(|s| s.max_product_deviation <= QUANTUM_TOL);
    let failure = summaries.iter().find(|s| s.max_product_deviation > QUANTUM_TOL).map(|s| {
        format!(
            "context {} has a shot product {} away from {}",
            s.context, s.max_product_deviation, s.expected_sign
        )
    });
    let json = to_json(&SampleReport {
        grid: &cfg.grid,
        shots: cfg.shots,
        seed: cfg.seed,
        tolerance: QUANTUM_TOL,
        contexts: &summaries,
        passed,
    })?;
    Ok(Outcome::new(
        passed,
        failure,
        pick(cfg.format, &json, &log),
        vec![("sample.json".into(), json), ("shots.csv".into(), log)],
    ))
}

fn eigen_csv(report: &appendix_basis::AppendixReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "residual", "passed"])?;
    for c in &report.residuals {
        w.write_record([c.name.clone(), c.residual.to_string(), c.passed.to_string()])?;
    }
    finish_csv(w)
}

/// Builds the `{C, c, γ}` eigenbasis and checks every eigenvalue relation.
pub fn eigenbasis(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = appendix_basis::verify(&cfg.eigenbasis)?;
    let failure = if !report.exact_commutators {
        Some("V/W commutators are not canonical".to_string())
    } else {
        report
            .first_failure()
            .map(|c| format!("check {} has residual {}", c.name, c.residual))
    };
    let json = to_json(&report)?;
    let table = eigen_csv(&report)?;
    Ok(Outcome::new(
        report.passed,
        failure,
        pick(cfg.format, &json, &table),
        vec![("eigenbasis.json".into(), json), ("eigenbasis.csv".into(), table)],
    ))
}
