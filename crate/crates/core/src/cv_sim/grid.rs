use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl_algebra::UnitSystem;

/// Commensurate periodic grid for one mode, used for both axes.
///
/// The box length is `L = 2πMħ/p₀` and `N = 2KM`, so the spacing is
/// `dx = πħ/(K p₀)` and the momentum step is `p₀/M`. With these choices
/// `e^{i p₀ x/ħ}` is single valued on the box, a momentum shift by `πħ/p₀`
/// is exactly `K` grid steps, and every modular eigenphase is a multiple
/// of `2π/N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct GridSpec {
    m: usize,
    k: usize,
    n: usize,
    units: UnitSystem,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N", default)]
    n: Option<usize>,
    #[serde(default)]
    units: UnitSystem,
}

impl TryFrom<GridRepr> for GridSpec {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        match r.n {
            Some(n) => GridSpec::with_points(r.m, r.k, n, r.units),
            None => GridSpec::new(r.m, r.k, r.units),
        }
    }
}

impl From<GridSpec> for GridRepr {
    fn from(g: GridSpec) -> Self {
        GridRepr {
            m: g.m,
            k: g.k,
            n: Some(g.n),
            units: g.units,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(4, 8, UnitSystem::default()).expect("default grid is valid")
    }
}

impl GridSpec {
    pub fn new(m: usize, k: usize, units: UnitSystem) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::Grid(format!("M and K must be at least 1, got M={m}, K={k}")));
        }
        let n = 2 * k * m;
        if n > 1 << 12 {
            return Err(Error::Grid(format!("N = 2KM = {n} is too large")));
        }
        Ok(Self { m, k, n, units })
    }

    /// Like [`GridSpec::new`] but also checks an explicitly requested `N`.
    pub fn with_points(m: usize, k: usize, n: usize, units: UnitSystem) -> Result<Self> {
        let grid = Self::new(m, k, units)?;
        if grid.n != n {
            return Err(Error::Grid(format!(
                "N must equal 2KM = {}, got N={n}",
                grid.n
            )));
        }
        Ok(grid)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn dx(&self) -> f64 {
        PI * self.units.hbar_f64() / (self.k as f64 * self.units.p0_f64())
    }

    pub fn box_length(&self) -> f64 {
        self.n as f64 * self.dx()
    }

    /// Position of index `j`, centred so that index `N/2` sits at the origin.
    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx()
    }

    /// Signed frequency of FFT index `k`, in `[-N/2, N/2)`.
    pub fn wrapped_index(&self, k: usize) -> i64 {
        let k = k as i64;
        let n = self.n as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Momentum `2πħk/L` of FFT index `k`.
    pub fn p(&self, k: usize) -> f64 {
        self.wrapped_index(k) as f64 * self.units.p0_f64() / self.m as f64
    }

    /// Eigenphase `2πn/N` of lattice class `n`.
    pub fn class_phase(&self, class: u32) -> f64 {
        2.0 * PI * class as f64 / self.n as f64
    }

    /// Whether `x` lies in the box `[-L/2, L/2)`.
    pub fn contains(&self, x: f64) -> bool {
        let half = 0.5 * self.box_length();
        x >= -half && x < half
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M={} K={} N={}", self.m, self.k, self.n)
    }
}

/// What a grid axis currently indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Position,
    Momentum,
}

impl Axis {
    fn symbol(self, mode: usize) -> String {
        match self {
            Axis::Position => format!("x{mode}"),
            Axis::Momentum => format!("p{mode}"),
        }
    }
}

/// Basis in which amplitudes are stored.
///
/// `Grid(a, b)` indexes mode 1 by `a` and mode 2 by `b`. `Sheared(a)` stores
/// `ψ′(j₁, j_u) = ψ(j₁, j₁ + j_u)`, i.e. coordinates `(x₁, u = x₂ − x₁)`;
/// transforming its first axis gives `(p₁ + p₂, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Grid(Axis, Axis),
    Sheared(Axis),
}

impl Representation {
    pub const POSITION: Representation = Representation::Grid(Axis::Position, Axis::Position);
    pub const MOMENTUM: Representation = Representation::Grid(Axis::Momentum, Axis::Momentum);
    pub const X1_P2: Representation = Representation::Grid(Axis::Position, Axis::Momentum);
    pub const P1_X2: Representation = Representation::Grid(Axis::Momentum, Axis::Position);
    pub const SHEARED_POSITION: Representation = Representation::Sheared(Axis::Position);
    pub const SHEARED_MOMENTUM: Representation = Representation::Sheared(Axis::Momentum);

    pub const ALL: [Representation; 6] = [
        Self::POSITION,
        Self::MOMENTUM,
        Self::X1_P2,
        Self::P1_X2,
        Self::SHEARED_POSITION,
        Self::SHEARED_MOMENTUM,
    ];

    pub fn first_axis(self) -> Axis {
        match self {
            Representation::Grid(a, _) | Representation::Sheared(a) => a,
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Grid(a, b) => write!(f, "({}, {})", a.symbol(1), b.symbol(2)),
            Representation::Sheared(Axis::Position) => write!(f, "(x1, u)"),
            Representation::Sheared(Axis::Momentum) => write!(f, "(p+, u)"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = GridSpec::default();
        assert_eq!((g.m(), g.k(), g.n()), (4, 8, 64));
        assert!((g.box_length() - 2.0 * PI * 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_incommensurate_n() {
        assert!(GridSpec::with_points(4, 8, 60, UnitSystem::default()).is_err());
        assert!(GridSpec::new(0, 8, UnitSystem::default()).is_err());
    }

    #[test]
    fn momentum_shift_by_pi_hbar_over_p0_is_k_steps() {
        let g = GridSpec::default();
        let t = PI * g.units().hbar_f64() / g.units().p0_f64();
        assert!((t / g.dx() - g.k() as f64).abs() < 1e-12);
    }

    #[test]
    fn momentum_grid_hits_2m_classes() {
        let g = GridSpec::default();
        let mut classes: Vec<i64> = (0..g.n())
            .map(|k| {
                let v = PI * g.p(k) / g.units().p0_f64();
                ((v / (PI / g.m() as f64)).round() as i64).rem_euclid(2 * g.m() as i64)
            })
            .collect();
        classes.sort();
        classes.dedup();
        assert_eq!(classes.len(), 2 * g.m());
    }

    #[test]
    fn serde_round_trip() {
        let g = GridSpec::new(2, 3, UnitSystem::default()).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: GridSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
        let bad = r#"{"M":4,"K":8,"N":65}"#;
        assert!(serde_json::from_str::<GridSpec>(bad).is_err());
    }
}
