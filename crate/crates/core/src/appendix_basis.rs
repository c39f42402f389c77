//! Common eigenbasis of `{C, c, γ}` built from the `V`/`W` coordinates.
//!
//! With `V₁ = x₁ + (πħ/p₀²)p₂`, `W₁ = −(p₀²/2πħ)x₂ + p₁/2` and the mirrored
//! pair, `C = exp(−ip₀V₁/ħ)` and `c = exp(−i(2πħ/p₀)W₁/ħ)`, so `c` shifts the
//! `V₁` label by `2p₀/ħ`. On the grid the `V` labels are quantized as
//! `v = n p₀/(Mħ)` and the chirp `exp(−i p₀² x₁x₂/(πħ²))` is single valued
//! only when `K` divides `M`; [`appendix_grid`] is the default such grid.
//!
//! Phase convention: `|v₁, v₂⟩` carries an extra constant phase
//! `exp(−iπħ² v₁v₂/(2p₀²))` relative to the bare chirp wavefunction. With it
//! `c|v₁, v₂⟩ = |v₁ + 2p₀/ħ, v₂⟩` holds without a `v₂`-dependent phase.
//!
//! The infinite sum over displacements becomes a sum over the `K` steps of
//! the wrap cycle, `|n₁ + N⟩ = e^{−iπK n₂/M}|n₁⟩`, so the allowed `κ` values
//! are `π t/M` with `t ≡ n₂ (mod 2M/K)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cv_sim::{
    apply_adjoint, apply_complex_observable, apply_observable_power, apply_real_parts, apply_weyl, GridSpec,
    Representation, WaveFunction,
};
use crate::error::{Error, Result};
use crate::weyl_algebra::{
    commutator_phase, symplectic_commutator, LinearForm, ObservableId, PiPoly, UnitSystem, WeylOp,
};

/// Residual threshold for every numerical check in [`verify`].
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Default grid for eigenbasis work: `M = 8`, `K = 4`, `N = 64`.
pub fn appendix_grid(units: UnitSystem) -> Result<GridSpec> {
    GridSpec::new(8, 4, units)
}

fn check_grid(grid: &GridSpec) -> Result<()> {
    if !grid.m().is_multiple_of(grid.k()) {
        return Err(Error::Grid(format!(
            "V eigenstates need K to divide M, got M={} K={}",
            grid.m(),
            grid.k()
        )));
    }
    Ok(())
}

/// The canonical pairs `(V₁, W₁)`, `(V₂, W₂)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VWSet {
    pub v: [LinearForm; 2],
    pub w: [LinearForm; 2],
}

impl VWSet {
    pub fn new(units: &UnitSystem) -> Self {
        let (h, p0) = (units.hbar(), units.p0());
        let shift = PiPoly::pi(h / (p0 * p0));
        let chirp = PiPoly::monomial(-(p0 * p0) / (Rational64::from_integer(2) * h), -1);
        let half = PiPoly::rational(Rational64::new(1, 2));
        VWSet {
            v: [
                LinearForm::x1() + &shift * LinearForm::p2(),
                LinearForm::x2() + &shift * LinearForm::p1(),
            ],
            w: [
                &chirp * LinearForm::x2() + &half * LinearForm::p1(),
                &chirp * LinearForm::x1() + &half * LinearForm::p2(),
            ],
        }
    }

    /// `s` values with `[V_j, W_k] = iħ s_jk`.
    pub fn vw_commutators(&self) -> [[PiPoly; 2]; 2] {
        [0, 1].map(|j| [0, 1].map(|k| symplectic_commutator(&self.v[j], &self.w[k])))
    }

    /// Whether `[V_j, W_k] = iħδ_jk` and `[V_j, V_k] = [W_j, W_k] = 0` hold
    /// exactly.
    pub fn is_canonical(&self) -> bool {
        let vw = self.vw_commutators();
        let delta = |j: usize, k: usize| if j == k { PiPoly::one() } else { PiPoly::zero() };
        (0..2).all(|j| {
            (0..2).all(|k| {
                vw[j][k] == delta(j, k)
                    && symplectic_commutator(&self.v[j], &self.v[k]).is_zero()
                    && symplectic_commutator(&self.w[j], &self.w[k]).is_zero()
            })
        })
    }
}

/// Grid labels of a common `V₁, V₂` eigenstate: `v_i = n_i p₀/(Mħ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VEigenstateParams {
    pub n1: i64,
    pub n2: i64,
}

fn lattice_label(v: f64, grid: &GridSpec, what: &str) -> Result<i64> {
    let u = grid.units();
    let n = v * grid.m() as f64 * u.hbar_f64() / u.p0_f64();
    if !n.is_finite() || (n - n.round()).abs() > 1e-9 {
        return Err(Error::Labels(format!("{what} = {v} is not on the grid lattice")));
    }
    Ok(n.round() as i64)
}

impl VEigenstateParams {
    pub fn new(n1: i64, n2: i64) -> Self {
        Self { n1, n2 }
    }

    pub fn from_values(v1: f64, v2: f64, grid: &GridSpec) -> Result<Self> {
        Ok(Self {
            n1: lattice_label(v1, grid, "v1")?,
            n2: lattice_label(v2, grid, "v2")?,
        })
    }

    pub fn v(&self, grid: &GridSpec) -> [f64; 2] {
        let u = grid.units();
        let step = u.p0_f64() / (grid.m() as f64 * u.hbar_f64());
        [self.n1 as f64 * step, self.n2 as f64 * step]
    }

    /// Eigenvalues `(πħ²/p₀²) v_i` of `V₁, V₂`.
    pub fn v_eigenvalues(&self, grid: &GridSpec) -> [f64; 2] {
        let u = grid.units();
        let scale = PI * u.hbar_f64().powi(2) / u.p0_f64().powi(2);
        self.v(grid).map(|v| scale * v)
    }

    /// `(m, e)` with `n₁ = e + 2M m` and `0 ≤ e < 2M`, i.e. `m` is the
    /// integer part of `ħv₁/2p₀` rounded toward −∞ so that `ε ≥ 0`.
    pub fn integer_part(&self, grid: &GridSpec) -> (i64, i64) {
        let period = 2 * grid.m() as i64;
        (self.n1.div_euclid(period), self.n1.rem_euclid(period))
    }
}

/// Grid labels of a `{C, c, γ}` eigenstate: `κ = πt/M`, `ε = e p₀/(Mħ)`
/// and the `V₂` label `n₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModularEigenstateParams {
    pub t: i64,
    pub e: i64,
    pub n2: i64,
}

impl ModularEigenstateParams {
    pub fn new(t: i64, e: i64, n2: i64) -> Self {
        Self { t, e, n2 }
    }

    pub fn from_values(kappa: f64, epsilon: f64, v2: f64, grid: &GridSpec) -> Result<Self> {
        let t = kappa * grid.m() as f64 / PI;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
            return Err(Error::Labels(format!("kappa = {kappa} is not a multiple of pi/M")));
        }
        let p = Self {
            t: t.round() as i64,
            e: lattice_label(epsilon, grid, "epsilon")?,
            n2: lattice_label(v2, grid, "v2")?,
        };
        p.validate(grid)?;
        Ok(p)
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        check_grid(grid)?;
        let two_m = 2 * grid.m() as i64;
        if !(0..two_m).contains(&self.t) {
            return Err(Error::Labels(format!("t = {} outside [0, {two_m}), kappa must lie in [0, 2pi)", self.t)));
        }
        if !(0..two_m).contains(&self.e) {
            return Err(Error::Labels(format!("e = {} outside [0, {two_m}), epsilon must lie in [0, 2p0/hbar)", self.e)));
        }
        let step = two_m / grid.k() as i64;
        if (self.t - self.n2).rem_euclid(step) != 0 {
            return Err(Error::Labels(format!(
                "kappa = pi*{}/{} is not compatible with the wrap phase of v2 label {} (need t = n2 mod {step})",
                self.t,
                grid.m(),
                self.n2
            )));
        }
        Ok(())
    }

    pub fn kappa(&self, grid: &GridSpec) -> f64 {
        PI * self.t as f64 / grid.m() as f64
    }

    pub fn epsilon(&self, grid: &GridSpec) -> f64 {
        let u = grid.units();
        self.e as f64 * u.p0_f64() / (grid.m() as f64 * u.hbar_f64())
    }

    /// `πħε/p₀`.
    fn epsilon_angle(&self, grid: &GridSpec) -> f64 {
        PI * self.e as f64 / grid.m() as f64
    }

    /// Eigenvalues of `C`, `c`, `γ`: `e^{−iπħε/p₀}`, `e^{−iκ}`,
    /// `−e^{i(κ + πħε/p₀)}`.
    pub fn complex_eigenvalues(&self, grid: &GridSpec) -> [Complex64; 3] {
        let k = self.kappa(grid);
        let phi = self.epsilon_angle(grid);
        [
            Complex64::from_polar(1.0, -phi),
            Complex64::from_polar(1.0, -k),
            -Complex64::from_polar(1.0, k + phi),
        ]
    }
}

/// Eigenvalues of `C′, C″, c′, c″, γ′, γ″` on `|κ, ε, v₂⟩`.
pub fn real_observable_eigenvalues(p: &ModularEigenstateParams, grid: &GridSpec) -> [f64; 6] {
    let k = p.kappa(grid);
    let phi = p.epsilon_angle(grid);
    // adding 0.0 turns -0.0 into 0.0
    [
        phi.cos(),
        -phi.sin(),
        k.cos(),
        -k.sin(),
        -(k + phi).cos(),
        -(k + phi).sin(),
    ]
    .map(|v| v + 0.0)
}

/// Labels used for the six real observables, in eigenvalue order.
pub const REAL_OBSERVABLE_LABELS: [&str; 6] = ["C'", "C''", "c'", "c''", "γ'", "γ''"];

/// `|v₁, v₂⟩` on the grid, unit normalized.
pub fn v_eigenstate(p: &VEigenstateParams, grid: &GridSpec) -> Result<WaveFunction> {
    check_grid(grid)?;
    let n = grid.n();
    let (m, k) = (grid.m() as i128, grid.k() as i128);
    // phase = π·num/den with den = 2M²K²
    let den = 2 * m * m * k * k;
    let (n1, n2) = (p.n1 as i128, p.n2 as i128);
    let half = (n / 2) as i128;
    let amp = 1.0 / n as f64;
    let mut amps = Vec::with_capacity(n * n);
    for j1 in 0..n as i128 {
        let a = j1 - half;
        for j2 in 0..n as i128 {
            let b = j2 - half;
            let num = 2 * m * k * (n2 * a + n1 * b) - 2 * m * m * a * b - k * k * n1 * n2;
            let reduced = num.rem_euclid(2 * den);
            amps.push(Complex64::from_polar(amp, PI * reduced as f64 / den as f64));
        }
    }
    WaveFunction::from_amplitudes(amps, Representation::POSITION, *grid)
}

/// `|κ, ε, v₂⟩ = K^{−1/2} Σ_{n<K} e^{iκn} |ε + 2np₀/ħ, v₂⟩`.
pub fn modular_eigenstate(p: &ModularEigenstateParams, grid: &GridSpec) -> Result<WaveFunction> {
    p.validate(grid)?;
    let size = grid.n() * grid.n();
    let two_m = 2 * grid.m() as i64;
    let kk = grid.k();
    let kappa = p.kappa(grid);
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for step in 0..kk {
        let v = v_eigenstate(&VEigenstateParams::new(p.e + two_m * step as i64, p.n2), grid)?;
        let w = Complex64::from_polar(1.0 / (kk as f64).sqrt(), kappa * step as f64);
        for (acc, a) in amps.iter_mut().zip(v.amplitudes()) {
            *acc += w * a;
        }
    }
    WaveFunction::from_amplitudes(amps, Representation::POSITION, *grid)
}

/// All `2M·K` modular labels sharing a `V₂` label.
pub fn modular_labels(n2: i64, grid: &GridSpec) -> Vec<ModularEigenstateParams> {
    let two_m = 2 * grid.m() as i64;
    let step = two_m / grid.k() as i64;
    let t0 = n2.rem_euclid(step);
    (0..two_m)
        .flat_map(|e| (0..grid.k() as i64).map(move |q| ModularEigenstateParams::new(t0 + q * step, e, n2)))
        .collect()
}

/// Phase `e^{−iπK n₂/M}` picked up after `K` applications of `c`.
pub fn wrap_phase(n2: i64, grid: &GridSpec) -> Complex64 {
    let (k, m) = (grid.k() as f64, grid.m() as f64);
    Complex64::from_polar(1.0, -PI * k * n2 as f64 / m)
}

/// Norms of the differences in the displacement relations for `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisplacementCheck {
    /// `‖c|v₁,v₂⟩ − |v₁ + 2p₀/ħ, v₂⟩‖`.
    pub forward: f64,
    /// `‖c†|v₁,v₂⟩ − |v₁ − 2p₀/ħ, v₂⟩‖`.
    pub backward: f64,
    /// `‖c^K|v⟩ − e^{−iπKn₂/M}|v⟩‖`.
    pub wrap: f64,
    /// `−K n₂/M`, the wrap phase in units of π.
    pub wrap_phase_over_pi: f64,
}

impl DisplacementCheck {
    pub fn max(&self) -> f64 {
        self.forward.max(self.backward).max(self.wrap)
    }
}

pub fn displacement_check(p: &VEigenstateParams, grid: &GridSpec) -> Result<DisplacementCheck> {
    let shift = 2 * grid.m() as i64;
    let psi = v_eigenstate(p, grid)?;
    let up = v_eigenstate(&VEigenstateParams::new(p.n1 + shift, p.n2), grid)?;
    let down = v_eigenstate(&VEigenstateParams::new(p.n1 - shift, p.n2), grid)?;
    let forward = apply_complex_observable(&psi, ObservableId::LowerC).distance(&up);
    let backward = apply_adjoint(&psi, ObservableId::LowerC).distance(&down);
    let cycled = apply_observable_power(&psi, ObservableId::LowerC, grid.k() as i64);
    let wrap = cycled.distance(&psi.scaled(wrap_phase(p.n2, grid)));
    Ok(DisplacementCheck {
        forward,
        backward,
        wrap,
        wrap_phase_over_pi: -(grid.k() as f64) * p.n2 as f64 / grid.m() as f64,
    })
}

/// `|v₁, v₂⟩` rebuilt as `K^{−1/2} Σ_κ e^{−iκm}|κ, ε, v₂⟩` over the `K`
/// allowed `κ` values, with `(m, ε)` from [`VEigenstateParams::integer_part`].
pub fn reconstruct_v(p: &VEigenstateParams, grid: &GridSpec) -> Result<WaveFunction> {
    check_grid(grid)?;
    let (m, e) = p.integer_part(grid);
    let kk = grid.k();
    let size = grid.n() * grid.n();
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for label in modular_labels(p.n2, grid).into_iter().filter(|l| l.e == e) {
        let state = modular_eigenstate(&label, grid)?;
        let w = Complex64::from_polar(1.0 / (kk as f64).sqrt(), -label.kappa(grid) * m as f64);
        for (acc, a) in amps.iter_mut().zip(state.amplitudes()) {
            *acc += w * a;
        }
    }
    Ok(WaveFunction::from_raw(amps, Representation::POSITION, *grid))
}

/// `exp(−i(p₀/K)V_j/ħ)`, the smallest grid-compatible translation in `V_j`.
/// Its eigenvalue on `|v₁, v₂⟩` is `e^{−2πi n_j/N}`.
pub fn v_translation(j: usize, grid: &GridSpec) -> WeylOp {
    let units = grid.units();
    let vw = VWSet::new(units);
    let scale = PiPoly::rational(-units.p0() / Rational64::from_integer(grid.k() as i64));
    WeylOp::exp(vw.v[j].scaled(&scale), units)
}

/// `exp(−i(2πħ/(K p₀))W_j/ħ)`; for `K = 1` this is `c` (`j = 1`).
pub fn w_translation(j: usize, grid: &GridSpec) -> WeylOp {
    let units = grid.units();
    let vw = VWSet::new(units);
    let scale = PiPoly::pi(Rational64::from_integer(-2) * units.hbar() / (units.p0() * Rational64::from_integer(grid.k() as i64)));
    WeylOp::exp(vw.w[j].scaled(&scale), units)
}

/// Largest deviation of `U Z = e^{iδ} Z U` on `psi` over all pairs drawn
/// from the `V` and `W` translations, with `δ` from the exact algebra and
/// the operators applied in position space.
pub fn translation_commutator_residual(psi: &WaveFunction) -> Result<f64> {
    let grid = psi.grid();
    let ops: Vec<WeylOp> = (0..2)
        .map(|j| v_translation(j, grid))
        .chain((0..2).map(|j| w_translation(j, grid)))
        .collect();
    let mut worst: f64 = 0.0;
    for (i, u) in ops.iter().enumerate() {
        for z in &ops[i + 1..] {
            let delta = commutator_phase(u, z).radians();
            let uz = apply_weyl(&apply_weyl(psi, z)?, u)?;
            let zu = apply_weyl(&apply_weyl(psi, u)?, z)?;
            worst = worst.max(uz.distance(&zu.scaled(Complex64::from_polar(1.0, delta))));
        }
    }
    Ok(worst)
}

/// `max |⟨i|j⟩ − δ_ij|` over the complete set of `N²` modular eigenstates.
/// Cost grows as `N⁶`; use a small grid.
pub fn completeness_deviation(grid: &GridSpec) -> Result<f64> {
    check_grid(grid)?;
    let n = grid.n() as i64;
    let states = (0..n)
        .flat_map(|n2| modular_labels(n2, grid))
        .map(|l| modular_eigenstate(&l, grid))
        .collect::<Result<Vec<_>>>()?;
    if states.len() as i64 != n * n {
        return Err(Error::Labels(format!("expected {} basis states, built {}", n * n, states.len())));
    }
    let mut worst: f64 = 0.0;
    for (i, a) in states.iter().enumerate() {
        for (j, b) in states.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - target).norm());
        }
    }
    Ok(worst)
}

fn eigen_residual(psi: &WaveFunction, id: ObservableId, value: Complex64) -> f64 {
    apply_complex_observable(psi, id).distance(&psi.scaled(value))
}

fn random_state(grid: &GridSpec, seed: u64) -> Result<WaveFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = grid.n() * grid.n();
    let amps = (0..size)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    WaveFunction::normalized(amps, Representation::POSITION, *grid)
}

/// Parameters of a full verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AppendixConfig {
    pub grid: GridSpec,
    pub v: VEigenstateParams,
    pub modular: ModularEigenstateParams,
    /// Small grid for the full Gram-matrix completeness check.
    pub completeness_grid: GridSpec,
    pub seed: u64,
}

impl AppendixConfig {
    pub fn with_units(units: UnitSystem) -> Result<Self> {
        Ok(Self {
            grid: appendix_grid(units)?,
            v: VEigenstateParams::new(-27, 5),
            modular: ModularEigenstateParams::new(9, 3, 5),
            completeness_grid: GridSpec::new(4, 2, units)?,
            seed: 0,
        })
    }
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self::with_units(UnitSystem::default()).expect("default appendix grid is valid")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

/// Outcome of [`verify`], serialized as the eigenbasis JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AppendixReport {
    pub grid: GridSpec,
    pub v_params: VEigenstateParams,
    pub modular_params: ModularEigenstateParams,
    pub kappa: f64,
    pub epsilon: f64,
    pub exact_commutators: bool,
    pub wrap_phase_over_pi: f64,
    pub residuals: Vec<Check>,
    pub eigenvalue_labels: [&'static str; 6],
    pub eigenvalues_analytic: [f64; 6],
    pub eigenvalues_numeric: [f64; 6],
    pub max_residual: f64,
    pub passed: bool,
}

impl AppendixReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.residuals.iter().find(|c| !c.passed)
    }
}

/// Runs every eigenbasis check for the labels in `config`.
pub fn verify(config: &AppendixConfig) -> Result<AppendixReport> {
    let grid = &config.grid;
    let units = grid.units();
    let vp = &config.v;
    let mp = &config.modular;
    mp.validate(grid)?;
    let mut checks: Vec<(String, f64)> = Vec::new();

    let psi_v = v_eigenstate(vp, grid)?;
    let n = grid.n() as f64;
    for (j, label) in [vp.n1, vp.n2].into_iter().enumerate() {
        let value = Complex64::from_polar(1.0, -2.0 * PI * label as f64 / n);
        let moved = apply_weyl(&psi_v, &v_translation(j, grid))?;
        checks.push((format!("v_state_V{}_translation", j + 1), moved.distance(&psi_v.scaled(value))));
    }
    let neighbours = [(1, 0), (0, 1), (2 * grid.m() as i64, 0)];
    let overlap = neighbours
        .iter()
        .map(|(d1, d2)| -> Result<f64> {
            let other = v_eigenstate(&VEigenstateParams::new(vp.n1 + d1, vp.n2 + d2), grid)?;
            Ok(psi_v.inner(&other).norm())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(("v_state_orthogonality".into(), overlap));

    let disp = displacement_check(vp, grid)?;
    checks.push(("displacement_forward".into(), disp.forward));
    checks.push(("displacement_backward".into(), disp.backward));
    checks.push(("displacement_wrap".into(), disp.wrap));

    let psi_m = modular_eigenstate(mp, grid)?;
    let lambda = mp.complex_eigenvalues(grid);
    for (id, value) in [ObservableId::C, ObservableId::LowerC, ObservableId::Gamma].into_iter().zip(lambda) {
        checks.push((format!("modular_{}_eigenvalue", id.name()), eigen_residual(&psi_m, id, value)));
    }
    let v2_value = Complex64::from_polar(1.0, -2.0 * PI * mp.n2 as f64 / n);
    let moved = apply_weyl(&psi_m, &v_translation(1, grid))?;
    checks.push(("modular_V2_translation".into(), moved.distance(&psi_m.scaled(v2_value))));
    checks.push((
        "modular_eigenvalue_product".into(),
        (lambda[0] * lambda[1] * lambda[2] + 1.0).norm(),
    ));

    let analytic = real_observable_eigenvalues(mp, grid);
    let mut numeric = [0.0; 6];
    for (slot, id) in [ObservableId::C, ObservableId::LowerC, ObservableId::Gamma].into_iter().enumerate() {
        let (re, im) = apply_real_parts(&psi_m, id);
        for (part, image) in [re, im].into_iter().enumerate() {
            let idx = 2 * slot + part;
            numeric[idx] = psi_m.inner(&image).re;
            let residual = image.distance(&psi_m.scaled(Complex64::new(analytic[idx], 0.0)));
            checks.push((format!("real_{}_eigenvalue", REAL_OBSERVABLE_LABELS[idx]), residual));
        }
    }
    let two_m = 2 * grid.m() as i64;
    let others = [
        ModularEigenstateParams::new((mp.t + two_m / grid.k() as i64) % two_m, mp.e, mp.n2),
        ModularEigenstateParams::new(mp.t, (mp.e + 1) % two_m, mp.n2),
        modular_labels(mp.n2 + 1, grid)[0],
    ];
    let modular_overlap = others
        .iter()
        .map(|l| -> Result<f64> { Ok(psi_m.inner(&modular_eigenstate(l, grid)?).norm()) })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(("modular_orthogonality".into(), modular_overlap));

    let rebuilt = reconstruct_v(vp, grid)?;
    checks.push(("reconstruction".into(), rebuilt.distance(&psi_v)));

    let probe = random_state(grid, config.seed)?;
    checks.push(("vw_commutator_phases".into(), translation_commutator_residual(&probe)?));
    checks.push(("completeness".into(), completeness_deviation(&config.completeness_grid)?));

    let vw = VWSet::new(units);
    let residuals: Vec<Check> = checks
        .into_iter()
        .map(|(name, residual)| Check {
            name,
            residual,
            passed: residual <= RESIDUAL_TOL,
        })
        .collect();
    let max_residual = residuals.iter().map(|c| c.residual).fold(0.0, f64::max);
    let exact_commutators = vw.is_canonical();
    Ok(AppendixReport {
        grid: *grid,
        v_params: *vp,
        modular_params: *mp,
        kappa: mp.kappa(grid),
        epsilon: mp.epsilon(grid),
        exact_commutators,
        wrap_phase_over_pi: disp.wrap_phase_over_pi,
        passed: exact_commutators && residuals.iter().all(|c| c.passed),
        residuals,
        eigenvalue_labels: REAL_OBSERVABLE_LABELS,
        eigenvalues_analytic: analytic,
        eigenvalues_numeric: numeric,
        max_residual,
    })
}
