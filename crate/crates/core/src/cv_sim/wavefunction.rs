use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Axis, GridSpec, Representation};
use crate::error::{Error, Result};

/// Norm tolerance for a valid state.
pub const NORM_TOL: f64 = 1e-10;

/// Two-mode state on an `N×N` grid, stored row-major with the first
/// coordinate as the row index.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    amps: Vec<Complex64>,
    rep: Representation,
    grid: GridSpec,
}

impl WaveFunction {
    /// Wraps amplitudes that are already normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>, rep: Representation, grid: GridSpec) -> Result<Self> {
        let n = grid.n();
        if amps.len() != n * n {
            return Err(Error::State(format!(
                "expected {} amplitudes, got {}",
                n * n,
                amps.len()
            )));
        }
        let psi = Self { amps, rep, grid };
        psi.check_normalized()?;
        Ok(psi)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>, rep: Representation, grid: GridSpec) -> Result<Self> {
        let n = grid.n();
        if amps.len() != n * n {
            return Err(Error::State(format!(
                "expected {} amplitudes, got {}",
                n * n,
                amps.len()
            )));
        }
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::State(format!("cannot normalize amplitudes with norm {norm}")));
        }
        let inv = 1.0 / norm;
        amps.iter_mut().for_each(|a| *a *= inv);
        Ok(Self { amps, rep, grid })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, i1: usize, i2: usize) -> Complex64 {
        self.amps[i1 * self.grid.n() + i2]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, computed in a common representation.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let other = if other.rep == self.rep {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.transform(self.rep))
        };
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `‖self − other‖`, computed in a common representation.
    pub fn distance(&self, other: &WaveFunction) -> f64 {
        let other = other.transform(self.rep);
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> WaveFunction {
        WaveFunction {
            amps: self.amps.iter().map(|a| a * c).collect(),
            rep: self.rep,
            grid: self.grid,
        }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>, rep: Representation, grid: GridSpec) -> Self {
        Self { amps, rep, grid }
    }

    pub(crate) fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        let inv = 1.0 / norm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
    }

    /// Unitary change of representation.
    pub fn transform(&self, target: Representation) -> WaveFunction {
        let mut out = self.clone();
        out.transform_in_place(target);
        out
    }

    pub fn transform_in_place(&mut self, target: Representation) {
        use Representation::*;
        if self.rep == target {
            return;
        }
        match (self.rep, target) {
            (Grid(a1, a2), Grid(b1, b2)) => {
                self.set_axis(0, a1, b1);
                self.set_axis(1, a2, b2);
            }
            (Sheared(a), Sheared(b)) => self.set_axis(0, a, b),
            (Grid(_, _), Sheared(b)) => {
                self.transform_in_place(Representation::POSITION);
                self.shear(true);
                self.rep = Sheared(Axis::Position);
                self.set_axis(0, Axis::Position, b);
            }
            (Sheared(a), Grid(_, _)) => {
                self.set_axis(0, a, Axis::Position);
                self.shear(false);
                self.rep = Representation::POSITION;
                self.transform_in_place(target);
            }
        }
        self.rep = target;
    }

    fn set_axis(&mut self, axis: usize, from: Axis, to: Axis) {
        if from == to {
            return;
        }
        let forward = to == Axis::Momentum;
        let n = self.grid.n();
        with_plan(n, forward, |fft| {
            if axis == 0 {
                transpose(&mut self.amps, n);
                fft.process(&mut self.amps);
                transpose(&mut self.amps, n);
            } else {
                fft.process(&mut self.amps);
            }
        });
        let scale = 1.0 / (n as f64).sqrt();
        self.amps.iter_mut().for_each(|a| *a *= scale);
    }

    /// Index shear `ψ′(j₁, j_u) = ψ(j₁, j₁ + j_u)` (or its inverse), exact on
    /// a periodic grid.
    fn shear(&mut self, forward: bool) {
        let n = self.grid.n();
        for (j1, row) in self.amps.chunks_exact_mut(n).enumerate() {
            if forward {
                row.rotate_left(j1 % n);
            } else {
                row.rotate_right(j1 % n);
            }
        }
    }
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn transpose(a: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

type Plan = Arc<dyn Fft<f64>>;
type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Plan>);

thread_local! {
    static PLANS: RefCell<PlanCache> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn with_plan<R>(n: usize, forward: bool, f: impl FnOnce(&dyn Fft<f64>) -> R) -> R {
    let plan = PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    });
    f(plan.as_ref())
}

/// Convex mixture of pure states on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, WaveFunction)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, WaveFunction)>) -> Result<Self> {
        let Some((_, first)) = members.first() else {
            return Err(Error::Ensemble("ensemble has no members".into()));
        };
        let grid = *first.grid();
        let mut total = 0.0;
        for (w, psi) in &members {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(Error::Ensemble(format!("weight {w} is negative")));
            }
            if *psi.grid() != grid {
                return Err(Error::Ensemble("members live on different grids".into()));
            }
            psi.check_normalized()?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Ensemble(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { members })
    }

    pub fn pure(psi: WaveFunction) -> Self {
        Self {
            members: vec![(1.0, psi)],
        }
    }

    pub fn members(&self) -> &[(f64, WaveFunction)] {
        &self.members
    }

    pub fn grid(&self) -> &GridSpec {
        self.members[0].1.grid()
    }
}

/// Either a pure state or a mixture, for functions linear in the density
/// matrix.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a WaveFunction),
    Mixed(&'a Ensemble),
}

impl<'a> StateRef<'a> {
    pub fn for_each_member(&self, mut f: impl FnMut(f64, &WaveFunction)) {
        match self {
            StateRef::Pure(psi) => f(1.0, psi),
            StateRef::Mixed(e) => e.members.iter().for_each(|(w, psi)| f(*w, psi)),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        match self {
            StateRef::Pure(psi) => psi.grid(),
            StateRef::Mixed(e) => e.grid(),
        }
    }

    pub(crate) fn check_normalized(&self) -> Result<()> {
        let mut result = Ok(());
        self.for_each_member(|_, psi| {
            if result.is_ok() {
                result = psi.check_normalized();
            }
        });
        result
    }
}

impl<'a> From<&'a WaveFunction> for StateRef<'a> {
    fn from(psi: &'a WaveFunction) -> Self {
        StateRef::Pure(psi)
    }
}

impl<'a> From<&'a Ensemble> for StateRef<'a> {
    fn from(e: &'a Ensemble) -> Self {
        StateRef::Mixed(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl_algebra::UnitSystem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(grid: GridSpec, seed: u64) -> WaveFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = grid.n();
        let amps = (0..n * n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        WaveFunction::normalized(amps, Representation::POSITION, grid).unwrap()
    }

    #[test]
    fn round_trips_through_every_representation() {
        let grid = GridSpec::new(2, 3, UnitSystem::default()).unwrap();
        let psi = random_state(grid, 5);
        for rep in Representation::ALL {
            let there = psi.transform(rep);
            assert!((there.norm_sqr() - 1.0).abs() < 1e-12, "{rep}");
            let back = there.transform(Representation::POSITION);
            let resid: f64 = psi
                .amplitudes()
                .iter()
                .zip(back.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(resid < 1e-12, "{rep}: {resid}");
        }
    }

    #[test]
    fn plane_wave_has_single_momentum_column() {
        // e^{i p₀ x₁/ħ} ⊗ δ(x₂ − x_{j0})
        let grid = GridSpec::default();
        let n = grid.n();
        let p0 = grid.units().p0_f64();
        let hbar = grid.units().hbar_f64();
        let j0 = 7;
        let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
        for j1 in 0..n {
            amps[j1 * n + j0] = Complex64::from_polar(1.0, p0 * grid.x(j1) / hbar);
        }
        let psi = WaveFunction::normalized(amps, Representation::POSITION, grid).unwrap();
        let mom = psi.transform(Representation::P1_X2);
        let target_k = (0..n).find(|&k| (grid.p(k) - p0).abs() < 1e-12).unwrap();
        for k1 in 0..n {
            for j2 in 0..n {
                let a = mom.amplitude(k1, j2).norm();
                if k1 == target_k && j2 == j0 {
                    assert!((a - 1.0).abs() < 1e-12);
                } else {
                    assert!(a < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shear_maps_diagonal_to_constant_u() {
        let grid = GridSpec::default();
        let n = grid.n();
        let offset = 5;
        let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
        for j1 in 0..n {
            amps[j1 * n + (j1 + offset) % n] = Complex64::new(1.0, 0.0);
        }
        let psi = WaveFunction::normalized(amps, Representation::POSITION, grid).unwrap();
        let sheared = psi.transform(Representation::SHEARED_POSITION);
        for j1 in 0..n {
            for ju in 0..n {
                let a = sheared.amplitude(j1, ju).norm();
                assert_eq!(a > 0.0, ju == offset);
            }
        }
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let grid = GridSpec::new(1, 1, UnitSystem::default()).unwrap();
        let amps = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            WaveFunction::from_amplitudes(amps, Representation::POSITION, grid),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn ensemble_validation() {
        let grid = GridSpec::new(2, 2, UnitSystem::default()).unwrap();
        let a = random_state(grid, 1);
        let b = random_state(grid, 2);
        assert!(Ensemble::new(vec![(0.5, a.clone()), (0.5, b.clone())]).is_ok());
        assert!(Ensemble::new(vec![(0.6, a.clone()), (0.5, b.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.5, a), (-0.5, b)]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }
}
