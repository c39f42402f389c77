//! Noncontextual bound `|S| ≤ 3√3` for nine unit-modulus values.
//!
//! A noncontextual model assigns one complex number of modulus one to each
//! of `A, B, C, a, b, c, α, β, γ`. Grouping
//! `S = A(BC + aα) + b(ac + Bβ) + γ(αβ − Cc)` and dropping the three outer
//! factors gives the triangle bound; writing `BC/(aα) = e^{iφ₁}` and
//! `ac/(Bβ) = e^{iφ₂}` reduces it to the two-angle objective
//! `2(|cos φ₁/2| + |cos φ₂/2| + |sin (φ₁+φ₂)/2|)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl_algebra::{ContextId, ObservableId};

/// `3√3`
pub const CLASSICAL_BOUND: f64 = 5.196_152_422_706_632;

const UNIT_TOL: f64 = 1e-12;

pub const HISTOGRAM_BINS: usize = 512;
pub const HISTOGRAM_MAX: f64 = 6.0;
/// Number of independent sampling substreams. Fixed so that results do not
/// depend on the size of the thread pool.
pub const DEFAULT_SAMPLE_WORKERS: usize = 8;

/// Nine unit-modulus values indexed by [`ObservableId`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Assignment {
    values: [Complex64; 9],
}

impl Assignment {
    pub fn new(values: [Complex64; 9]) -> Result<Self> {
        for id in ObservableId::ALL {
            let modulus = values[id.index()].norm();
            if modulus.is_nan() || (modulus - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnitModulus { name: id.name(), modulus });
            }
        }
        Ok(Self { values })
    }

    /// From `(X′, X″)` pairs.
    pub fn from_parts(parts: [(f64, f64); 9]) -> Result<Self> {
        Self::new(parts.map(|(re, im)| Complex64::new(re, im)))
    }

    pub fn from_phases(phases: [f64; 9]) -> Self {
        Self {
            values: phases.map(|t| Complex64::from_polar(1.0, t)),
        }
    }

    pub fn all_ones() -> Self {
        Self::from_phases([0.0; 9])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut phases = [0.0; 9];
        for p in phases.iter_mut() {
            *p = rng.random::<f64>() * TAU;
        }
        Self::from_phases(phases)
    }

    pub fn get(&self, id: ObservableId) -> Complex64 {
        self.values[id.index()]
    }

    pub fn with_value(mut self, id: ObservableId, value: Complex64) -> Result<Self> {
        self.values[id.index()] = value;
        Self::new(self.values)
    }

    /// The two angles `φ₁ = arg(BC/(aα))`, `φ₂ = arg(ac/(Bβ))`.
    pub fn phase_pair(&self) -> PhasePair {
        use ObservableId::*;
        let v = |id| self.get(id);
        let r1 = v(B) * v(C) / (v(LowerA) * v(Alpha));
        let r2 = v(LowerA) * v(LowerC) / (v(B) * v(Beta));
        PhasePair::new(r1.arg(), r2.arg())
    }
}

impl std::ops::Index<ObservableId> for Assignment {
    type Output = Complex64;
    fn index(&self, id: ObservableId) -> &Complex64 {
        &self.values[id.index()]
    }
}

/// Pair of angles reduced into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub phi1: f64,
    pub phi2: f64,
}

impl PhasePair {
    pub fn new(phi1: f64, phi2: f64) -> Self {
        Self {
            phi1: reduce_angle(phi1),
            phi2: reduce_angle(phi2),
        }
    }
}

fn reduce_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `S = ABC + abc + αβγ + Aaα + Bbβ − Ccγ`.
pub fn s_value(asg: &Assignment) -> Complex64 {
    ContextId::ALL
        .iter()
        .map(|ctx| {
            let [x, y, z] = ctx.members();
            f64::from(ctx.sign()) * asg[x] * asg[y] * asg[z]
        })
        .sum()
}

/// `|BC + aα| + |ac + Bβ| + |αβ − Cc|`; independent of `A`, `b` and `γ`.
pub fn triangle_bound(asg: &Assignment) -> f64 {
    use ObservableId::*;
    let v = |id| asg[id];
    (v(B) * v(C) + v(LowerA) * v(Alpha)).norm()
        + (v(LowerA) * v(LowerC) + v(B) * v(Beta)).norm()
        + (v(Alpha) * v(Beta) - v(C) * v(LowerC)).norm()
}

pub fn trig_objective(p: PhasePair) -> f64 {
    2.0 * ((p.phi1 / 2.0).cos().abs()
        + (p.phi2 / 2.0).cos().abs()
        + ((p.phi1 + p.phi2) / 2.0).sin().abs())
}

/// The two maximizers of [`trig_objective`] in `[0, 2π)²`, related by
/// `(φ₁, φ₂) → (−φ₁, −φ₂)`.
pub fn argmax_orbit() -> [PhasePair; 2] {
    [
        PhasePair::new(PI / 3.0, PI / 3.0),
        PhasePair::new(5.0 * PI / 3.0, 5.0 * PI / 3.0),
    ]
}

/// Periodic distance from `p` to the nearest point of [`argmax_orbit`].
pub fn distance_to_argmax_orbit(p: PhasePair) -> f64 {
    let circ = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(TAU);
        d.min(TAU - d)
    };
    argmax_orbit()
        .iter()
        .map(|q| circ(p.phi1, q.phi1).hypot(circ(p.phi2, q.phi2)))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub value: f64,
    pub argmax: PhasePair,
    /// Best value on the coarse grid before refinement.
    pub grid_value: f64,
    pub grid_points: usize,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const MAX_SWEEPS: usize = 200;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Coarse scan of `[0, 2π)²` at `grid_step`, then coordinate-wise
/// golden-section refinement of the best grid point until a sweep moves
/// less than `refine_tol`.
pub fn maximize_objective(grid_step: f64, refine_tol: f64) -> Result<Maximum> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Optimizer(format!("grid step must be positive, got {grid_step}")));
    }
    if !(refine_tol > 0.0 && refine_tol.is_finite()) {
        return Err(Error::Optimizer(format!("refine tolerance must be positive, got {refine_tol}")));
    }
    let n = (TAU / grid_step).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..n {
        let phi1 = i as f64 * grid_step;
        for j in 0..n {
            let phi2 = j as f64 * grid_step;
            let v = trig_objective(PhasePair { phi1, phi2 });
            if v > best.0 {
                best = (v, phi1, phi2);
            }
        }
    }
    let grid_value = best.0;
    let (mut value, mut x, mut y) = best;
    for _ in 0..MAX_SWEEPS {
        let (nx, vx) = golden_section_max(
            |t| trig_objective(PhasePair { phi1: t, phi2: y }),
            x - grid_step,
            x + grid_step,
            refine_tol,
        );
        let mut moved = 0.0;
        if vx >= value {
            moved += (nx - x).abs();
            x = nx;
            value = vx;
        }
        let (ny, vy) = golden_section_max(
            |t| trig_objective(PhasePair { phi1: x, phi2: t }),
            y - grid_step,
            y + grid_step,
            refine_tol,
        );
        if vy >= value {
            moved += (ny - y).abs();
            y = ny;
            value = vy;
        }
        if moved < refine_tol {
            break;
        }
    }
    Ok(Maximum {
        value,
        argmax: PhasePair::new(x, y),
        grid_value,
        grid_points: n * n,
    })
}

/// A model reaching `|S| = 3√3`.
pub fn saturating_assignment() -> Assignment {
    let h = 3f64.sqrt() / 2.0;
    // (X′, X″) in ObservableId order: A B C a b c α β γ
    Assignment::from_parts([
        (h, -0.5),
        (1.0, 0.0),
        (0.5, h),
        (1.0, 0.0),
        (h, -0.5),
        (0.5, h),
        (1.0, 0.0),
        (1.0, 0.0),
        (h, 0.5),
    ])
    .expect("saturating assignment has unit-modulus entries")
}

/// Uniform-bin histogram of `|S|` over `[0, 6]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new() -> Self {
        Self {
            lo: 0.0,
            hi: HISTOGRAM_MAX,
            counts: vec![0; HISTOGRAM_BINS],
        }
    }

    pub fn insert(&mut self, v: f64) {
        let bins = self.counts.len();
        let idx = ((v - self.lo) / (self.hi - self.lo) * bins as f64).floor();
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        self.counts[idx] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }
}

impl Default for Histogram {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub max_observed: f64,
    pub histogram: Histogram,
}

/// Draws `n` random noncontextual models with phases uniform on `[0, 2π)⁹`.
pub fn sample_models(n: u64, seed: u64) -> Result<SampleSummary> {
    sample_models_with_workers(n, seed, DEFAULT_SAMPLE_WORKERS)
}

/// Worker `w` draws from substream `w` of a ChaCha8 generator keyed by
/// `seed`; results are bitwise reproducible for fixed `workers`.
pub fn sample_models_with_workers(n: u64, seed: u64, workers: usize) -> Result<SampleSummary> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let workers = workers.max(1);
    let per = n / workers as u64;
    let extra = n % workers as u64;
    let parts: Vec<(f64, Histogram)> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let count = per + u64::from((w as u64) < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let mut hist = Histogram::new();
            let mut max = 0.0f64;
            for _ in 0..count {
                let s = s_value(&Assignment::random(&mut rng)).norm();
                hist.insert(s);
                max = max.max(s);
            }
            (max, hist)
        })
        .collect();
    let mut histogram = Histogram::new();
    let mut max_observed = 0.0f64;
    for (m, h) in &parts {
        max_observed = max_observed.max(*m);
        histogram.merge(h);
    }
    Ok(SampleSummary {
        n_samples: n,
        seed,
        workers,
        max_observed,
        histogram,
    })
}

/// JSON result record of a bound computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRecord {
    pub max: f64,
    pub argmax: PhasePair,
    pub n_samples: u64,
    pub seed: u64,
}

/// `phi1,phi2,objective` rows over `[0, 2π)²` at spacing `step`.
pub fn landscape_csv(step: f64) -> Result<String> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Optimizer(format!("landscape step must be positive, got {step}")));
    }
    let n = (TAU / step).ceil() as usize;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phi1", "phi2", "objective"])?;
    for i in 0..n {
        for j in 0..n {
            let p = PhasePair {
                phi1: i as f64 * step,
                phi2: j as f64 * step,
            };
            w.write_record([
                format!("{:.6}", p.phi1),
                format!("{:.6}", p.phi2),
                format!("{:.12}", trig_objective(p)),
            ])?;
        }
    }
    crate::weyl_algebra::finish_csv(w)
}
