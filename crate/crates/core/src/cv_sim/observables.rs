//! The nine modular unitaries on the grid.
//!
//! Each observable is diagonal in at least one reachable representation, and
//! there its eigenphase at grid index `(i₁, i₂)` is `2π n / N` with the
//! integer class `n = c₁ i₁ + c₂ i₂ + c₀ (mod N)`. With
//! `P(j) = M j − K M²` (position, centred grid), `Q(k) = K k` (momentum) and
//! `U(j_u) = M j_u` (relative coordinate) the classes are
//!
//! | observable | representation | class |
//! |---|---|---|
//! | A | `(x₁, ·)`, `(x₁, u)` | `P(j₁)` |
//! | a | `(·, x₂)` | `−P(j₂)` |
//! | B | `(·, p₂)` | `Q(k₂)` |
//! | b | `(p₁, ·)` | `Q(k₁)` |
//! | C | `(x₁, p₂)` | `−P(j₁) − Q(k₂)` |
//! | c | `(p₁, x₂)` | `P(j₂) − Q(k₁)` |
//! | α | `(x₁, x₂)`, sheared | `P(j₂) − P(j₁)`, `U(j_u)` |
//! | β | `(p₁, p₂)`, `(p₊, u)` | `−Q(k₁) − Q(k₂)`, `−Q(k₊)` |
//! | γ | `(p₊, u)` | `Q(k₊) − U(j_u)` |

use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{Axis, GridSpec, Representation};
use super::wavefunction::{StateRef, WaveFunction};
use crate::error::{Error, Result};
use crate::weyl_algebra::{ContextId, ObservableId, WeylOp};

/// Integer eigenphase class as an affine function of the grid indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassMap {
    pub c1: i64,
    pub c2: i64,
    pub c0: i64,
    n: i64,
}

impl ClassMap {
    pub fn class(&self, i1: usize, i2: usize) -> u32 {
        (self.c1 * i1 as i64 + self.c2 * i2 as i64 + self.c0).rem_euclid(self.n) as u32
    }

    /// Classes of every grid point, in storage order.
    pub fn classes(&self) -> Vec<u32> {
        let n = self.n as usize;
        (0..n * n).map(|idx| self.class(idx / n, idx % n)).collect()
    }
}

/// Class map of `id` in `rep`, or `None` if `id` is not diagonal there.
pub fn class_map(id: ObservableId, rep: Representation, grid: &GridSpec) -> Option<ClassMap> {
    use Axis::{Momentum as Mo, Position as Po};
    use ObservableId::*;
    use Representation::{Grid, Sheared};
    let m = grid.m() as i64;
    let k = grid.k() as i64;
    let off = k * m * m;
    let (c1, c2, c0) = match (id, rep) {
        (A, Grid(Po, _)) | (A, Sheared(Po)) => (m, 0, -off),
        (LowerA, Grid(_, Po)) => (0, -m, off),
        (B, Grid(_, Mo)) => (0, k, 0),
        (LowerB, Grid(Mo, _)) => (k, 0, 0),
        (C, Grid(Po, Mo)) => (-m, -k, off),
        (LowerC, Grid(Mo, Po)) => (-k, m, -off),
        (Alpha, Grid(Po, Po)) => (-m, m, 0),
        (Alpha, Sheared(_)) => (0, m, 0),
        (Beta, Grid(Mo, Mo)) => (-k, -k, 0),
        (Beta, Sheared(Mo)) => (-k, 0, 0),
        (Gamma, Sheared(Mo)) => (k, -m, 0),
        _ => return None,
    };
    Some(ClassMap { c1, c2, c0, n: grid.n() as i64 })
}

/// Default diagonal representation of each observable.
pub fn preferred_representation(id: ObservableId) -> Representation {
    use ObservableId::*;
    match id {
        A | LowerA | Alpha => Representation::POSITION,
        B | LowerB | Beta => Representation::MOMENTUM,
        C => Representation::X1_P2,
        LowerC => Representation::P1_X2,
        Gamma => Representation::SHEARED_MOMENTUM,
    }
}

/// A representation diagonalizing all three members, if one exists.
pub fn common_representation(ctx: ContextId) -> Option<Representation> {
    match ctx {
        ContextId::ABC => Some(Representation::X1_P2),
        ContextId::LowerAbc => Some(Representation::P1_X2),
        ContextId::AlphaBetaGamma => Some(Representation::SHEARED_MOMENTUM),
        ContextId::AaAlpha => Some(Representation::POSITION),
        ContextId::BbBeta => Some(Representation::MOMENTUM),
        ContextId::CcGamma => None,
    }
}

/// Picks a representation diagonalizing `id`, keeping `current` if possible.
pub(crate) fn diagonal_representation(
    id: ObservableId,
    current: Representation,
    ctx: Option<ContextId>,
    grid: &GridSpec,
) -> (Representation, ClassMap) {
    if let Some(map) = class_map(id, current, grid) {
        return (current, map);
    }
    let rep = ctx
        .and_then(common_representation)
        .unwrap_or_else(|| preferred_representation(id));
    let map = class_map(id, rep, grid).expect("context representation diagonalizes its members");
    (rep, map)
}

/// `e^{2πi n/N}` for `n = 0..N`.
pub(crate) fn phase_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|c| Complex64::from_polar(1.0, 2.0 * PI * c as f64 / n as f64))
        .collect()
}

/// Applies `Uᵖ` for integer `p` (`p = −1` is the adjoint) and returns the
/// result in the input representation.
pub fn apply_observable_power(psi: &WaveFunction, id: ObservableId, power: i64) -> WaveFunction {
    let grid = *psi.grid();
    let n = grid.n() as i64;
    let (rep, map) = diagonal_representation(id, psi.representation(), None, &grid);
    let mut out = psi.transform(rep);
    let table = phase_table(grid.n());
    let nn = grid.n();
    for (idx, a) in out.amps_mut().iter_mut().enumerate() {
        let class = map.class(idx / nn, idx % nn) as i64;
        *a *= table[(class * power).rem_euclid(n) as usize];
    }
    out.transform_in_place(psi.representation());
    out
}

pub fn apply_complex_observable(psi: &WaveFunction, id: ObservableId) -> WaveFunction {
    apply_observable_power(psi, id, 1)
}

pub fn apply_adjoint(psi: &WaveFunction, id: ObservableId) -> WaveFunction {
    apply_observable_power(psi, id, -1)
}

/// `(U + U†)/2` and `(U − U†)/(2i)` applied to `psi`: the real observables
/// `X′` and `X″` of `U = X′ + iX″`.
pub fn apply_real_parts(psi: &WaveFunction, id: ObservableId) -> (WaveFunction, WaveFunction) {
    let u = apply_complex_observable(psi, id);
    let ud = apply_adjoint(psi, id);
    let n = psi.grid().n();
    let mut re = Vec::with_capacity(n * n);
    let mut im = Vec::with_capacity(n * n);
    for (a, b) in u.amplitudes().iter().zip(ud.amplitudes()) {
        re.push((a + b) * 0.5);
        im.push((a - b) / Complex64::new(0.0, 2.0));
    }
    (
        WaveFunction::from_raw(re, psi.representation(), *psi.grid()),
        WaveFunction::from_raw(im, psi.representation(), *psi.grid()),
    )
}

/// `U₁U₂U₃|ψ⟩` for a context, applying `U₃` first.
pub fn apply_context(psi: &WaveFunction, ctx: ContextId) -> WaveFunction {
    let [a, b, c] = ctx.members();
    let out = apply_complex_observable(psi, c);
    let out = apply_complex_observable(&out, b);
    apply_complex_observable(&out, a)
}

/// `⟨U₁U₂U₃⟩`, weight-averaged over ensemble members.
pub fn expectation<'a>(state: impl Into<StateRef<'a>>, ctx: ContextId) -> Result<Complex64> {
    let state = state.into();
    state.check_normalized()?;
    let mut total = Complex64::new(0.0, 0.0);
    state.for_each_member(|w, psi| {
        total += w * psi.inner(&apply_context(psi, ctx));
    });
    Ok(total)
}

/// `⟨U⟩` for a single complex observable.
pub fn observable_expectation<'a>(state: impl Into<StateRef<'a>>, id: ObservableId) -> Result<Complex64> {
    let state = state.into();
    state.check_normalized()?;
    let mut total = Complex64::new(0.0, 0.0);
    state.for_each_member(|w, psi| {
        total += w * psi.inner(&apply_complex_observable(psi, id));
    });
    Ok(total)
}

/// The six context expectations in [`ContextId::ALL`] order.
pub fn context_expectations<'a>(state: impl Into<StateRef<'a>>) -> Result<[Complex64; 6]> {
    let state = state.into();
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for ctx in ContextId::ALL {
        out[ctx.index()] = expectation(state, ctx)?;
    }
    Ok(out)
}

/// `⟨ABC⟩ + ⟨abc⟩ + ⟨αβγ⟩ + ⟨Aaα⟩ + ⟨Bbβ⟩ − ⟨Ccγ⟩`.
pub fn s_statistic<'a>(state: impl Into<StateRef<'a>>) -> Result<Complex64> {
    let values = context_expectations(state)?;
    Ok(ContextId::ALL
        .iter()
        .map(|ctx| f64::from(ctx.sign()) * values[ctx.index()])
        .sum())
}

/// Outcome probabilities of one observable, indexed by lattice class.
#[derive(Clone, Debug, PartialEq)]
pub struct BornDistribution {
    pub observable: ObservableId,
    /// Probability of eigenphase `2πn/N` at index `n`.
    pub probs: Vec<f64>,
    /// Classes the observable can produce on this grid, ascending.
    pub spectrum: Vec<u32>,
}

impl BornDistribution {
    pub fn prob(&self, class: u32) -> f64 {
        self.probs[class as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Per-class probabilities `Σ |ψ|²` over the grid points of each class.
pub(crate) fn class_probabilities(psi: &WaveFunction, map: &ClassMap) -> Vec<f64> {
    let n = psi.grid().n();
    let mut probs = vec![0.0; n];
    for (idx, a) in psi.amplitudes().iter().enumerate() {
        probs[map.class(idx / n, idx % n) as usize] += a.norm_sqr();
    }
    probs
}

pub fn spectrum(id: ObservableId, grid: &GridSpec) -> Vec<u32> {
    let rep = preferred_representation(id);
    let map = class_map(id, rep, grid).expect("preferred representation is diagonal");
    let mut classes = map.classes();
    classes.sort_unstable();
    classes.dedup();
    classes
}

pub fn born_distribution<'a>(state: impl Into<StateRef<'a>>, id: ObservableId) -> Result<BornDistribution> {
    let state = state.into();
    state.check_normalized()?;
    let grid = *state.grid();
    let mut probs = vec![0.0; grid.n()];
    state.for_each_member(|w, psi| {
        let (rep, map) = diagonal_representation(id, psi.representation(), None, &grid);
        let p = class_probabilities(&psi.transform(rep), &map);
        for (acc, v) in probs.iter_mut().zip(p) {
            *acc += w * v;
        }
    });
    Ok(BornDistribution {
        observable: id,
        probs,
        spectrum: spectrum(id, &grid),
    })
}

/// Applies a general displacement operator `e^{iφ} exp(i(a·x + b·p)/ħ)`
/// in position space as a pointwise phase times an integer index shift,
/// without any Fourier transform:
/// `exp(i(a·x + b·p)/ħ) ψ(x) = e^{i a·b/(2ħ)} e^{i a·x/ħ} ψ(x + b)`.
///
/// Fails unless every `bᵢ` is a whole number of grid steps and every
/// `e^{i aᵢ x/ħ}` is periodic on the box.
pub fn apply_weyl(psi: &WaveFunction, op: &WeylOp) -> Result<WaveFunction> {
    let grid = *psi.grid();
    let hbar = grid.units().hbar_f64();
    if op.hbar() != grid.units().hbar() {
        return Err(Error::NotGridCompatible("operator and grid use different hbar".into()));
    }
    let n = grid.n();
    let dx = grid.dx();
    let length = grid.box_length();
    let g = op.generator();
    let a = g.position_coeffs().map(|c| c.to_f64());
    let b = g.momentum_coeffs().map(|c| c.to_f64());
    let mut shifts = [0i64; 2];
    for i in 0..2 {
        let steps = b[i] / dx;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::NotGridCompatible(format!(
                "momentum coefficient {} is not a multiple of the grid step",
                b[i]
            )));
        }
        shifts[i] = steps.round() as i64;
        let winding = a[i] * length / (2.0 * PI * hbar);
        if (winding - winding.round()).abs() > 1e-9 {
            return Err(Error::NotGridCompatible(format!(
                "position coefficient {} is not periodic on the box",
                a[i]
            )));
        }
    }
    let global = op.phase().radians() + (a[0] * b[0] + a[1] * b[1]) / (2.0 * hbar);
    let pos = psi.transform(Representation::POSITION);
    let src = pos.amplitudes();
    let ni = n as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j1 in 0..n {
        let s1 = (j1 as i64 + shifts[0]).rem_euclid(ni) as usize;
        for j2 in 0..n {
            let s2 = (j2 as i64 + shifts[1]).rem_euclid(ni) as usize;
            let theta = global + (a[0] * grid.x(j1) + a[1] * grid.x(j2)) / hbar;
            out[j1 * n + j2] = Complex64::from_polar(1.0, theta) * src[s1 * n + s2];
        }
    }
    let mut result = WaveFunction::from_raw(out, Representation::POSITION, grid);
    result.transform_in_place(psi.representation());
    Ok(result)
}
