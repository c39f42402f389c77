//! Run configuration: defaults, then a JSON config file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use modctx_core::appendix_basis::{appendix_grid, AppendixConfig, ModularEigenstateParams, VEigenstateParams};
use modctx_core::cv_sim::{GridSpec, StateSpec};
use modctx_core::weyl_algebra::UnitSystem;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Config(format!("unknown format `{other}`, expected json or csv"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitOverrides {
    pub hbar: Option<String>,
    pub p0: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOverrides {
    pub step: Option<f64>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenOverrides {
    pub v1_index: Option<i64>,
    pub v2_index: Option<i64>,
    pub kappa_index: Option<i64>,
    pub epsilon_index: Option<i64>,
}

/// Every setting as optional, so that layers can be stacked. This is also
/// the JSON config-file schema.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub grid: GridOverrides,
    #[serde(default)]
    pub units: UnitOverrides,
    pub state: Option<StateSpec>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    #[serde(default)]
    pub bound: BoundOverrides,
    #[serde(default)]
    pub eigenbasis: EigenOverrides,
}

fn pick<T>(top: Option<T>, base: Option<T>) -> Option<T> {
    top.or(base)
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` wins wherever it sets a value.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            grid: GridOverrides {
                m: pick(self.grid.m, base.grid.m),
                k: pick(self.grid.k, base.grid.k),
                n: pick(self.grid.n, base.grid.n),
            },
            units: UnitOverrides {
                hbar: pick(self.units.hbar, base.units.hbar),
                p0: pick(self.units.p0, base.units.p0),
            },
            state: pick(self.state, base.state),
            shots: pick(self.shots, base.shots),
            seed: pick(self.seed, base.seed),
            out: pick(self.out, base.out),
            format: pick(self.format, base.format),
            bound: BoundOverrides {
                step: pick(self.bound.step, base.bound.step),
                tol: pick(self.bound.tol, base.bound.tol),
                samples: pick(self.bound.samples, base.bound.samples),
            },
            eigenbasis: EigenOverrides {
                v1_index: pick(self.eigenbasis.v1_index, base.eigenbasis.v1_index),
                v2_index: pick(self.eigenbasis.v2_index, base.eigenbasis.v2_index),
                kappa_index: pick(self.eigenbasis.kappa_index, base.eigenbasis.kappa_index),
                epsilon_index: pick(self.eigenbasis.epsilon_index, base.eigenbasis.epsilon_index),
            },
        }
    }
}

pub const DEFAULT_SHOTS: usize = 10_000;
pub const DEFAULT_GRID_STEP: f64 = 0.01;
pub const DEFAULT_REFINE_TOL: f64 = 1e-10;
pub const DEFAULT_BOUND_SAMPLES: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundParams {
    pub step: f64,
    pub tol: f64,
    pub samples: u64,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub units: UnitSystem,
    pub state: StateSpec,
    pub shots: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub bound: BoundParams,
    pub eigenbasis: AppendixConfig,
}

fn parse_rational(name: &str, s: &str) -> Result<Rational64, CliError> {
    s.trim()
        .parse::<Rational64>()
        .map_err(|_| CliError::Config(format!("{name} must be a rational such as 1 or 3/2, got `{s}`")))
}

fn build_grid(g: &GridOverrides, default: (usize, usize), units: UnitSystem) -> Result<GridSpec, CliError> {
    let m = g.m.unwrap_or(default.0);
    let k = g.k.unwrap_or(default.1);
    let grid = match g.n {
        Some(n) => GridSpec::with_points(m, k, n, units),
        None => GridSpec::new(m, k, units),
    };
    grid.map_err(|e| CliError::Config(e.to_string()))
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<Self, CliError> {
        let hbar = o.units.hbar.as_deref().map(|s| parse_rational("hbar", s)).transpose()?;
        let p0 = o.units.p0.as_deref().map(|s| parse_rational("p0", s)).transpose()?;
        let units = UnitSystem::new(
            hbar.unwrap_or_else(|| Rational64::from_integer(1)),
            p0.unwrap_or_else(|| Rational64::from_integer(1)),
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let grid = build_grid(&o.grid, (4, 8), units)?;

        let shots = o.shots.unwrap_or(DEFAULT_SHOTS);
        if shots == 0 {
            return Err(CliError::Config("shots must be at least 1".into()));
        }

        let mut eigen = AppendixConfig::with_units(units).map_err(|e| CliError::Config(e.to_string()))?;
        if o.grid.m.is_some() || o.grid.k.is_some() || o.grid.n.is_some() {
            let default = appendix_grid(units).map_err(|e| CliError::Config(e.to_string()))?;
            eigen.grid = build_grid(&o.grid, (default.m(), default.k()), units)?;
        }
        let e = &o.eigenbasis;
        eigen.v = VEigenstateParams::new(e.v1_index.unwrap_or(eigen.v.n1), e.v2_index.unwrap_or(eigen.v.n2));
        eigen.modular = ModularEigenstateParams::new(
            e.kappa_index.unwrap_or(eigen.modular.t),
            e.epsilon_index.unwrap_or(eigen.modular.e),
            e.v2_index.unwrap_or(eigen.modular.n2),
        );
        eigen.seed = o.seed.unwrap_or(0);

        Ok(RunConfig {
            grid,
            units,
            state: o.state.unwrap_or_else(|| StateSpec::gaussian([0.0; 2], [0.0; 2], 1.0)),
            shots,
            seed: o.seed.unwrap_or(0),
            out: o.out,
            format: o.format.unwrap_or_default(),
            bound: BoundParams {
                step: o.bound.step.unwrap_or(DEFAULT_GRID_STEP),
                tol: o.bound.tol.unwrap_or(DEFAULT_REFINE_TOL),
                samples: o.bound.samples.unwrap_or(DEFAULT_BOUND_SAMPLES),
            },
            eigenbasis: eigen,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: Overrides = serde_json::from_str(r#"{"grid": {"M": 2, "K": 3}, "seed": 5, "shots": 7}"#).unwrap();
        let flags = Overrides {
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(flags.over(file)).unwrap();
        assert_eq!((cfg.grid.m(), cfg.grid.k(), cfg.grid.n()), (2, 3, 12));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.shots, 7);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(Overrides::default()).unwrap();
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(cfg.shots, DEFAULT_SHOTS);
        assert_eq!(cfg.eigenbasis.grid.n(), 64);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_n = Overrides {
            grid: GridOverrides { m: None, k: None, n: Some(63) },
            ..Default::default()
        };
        assert!(RunConfig::resolve(bad_n).is_err());
        let zero_shots = Overrides {
            shots: Some(0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(zero_shots).is_err());
        assert!(serde_json::from_str::<Overrides>(r#"{"gird": {}}"#).is_err());
    }
}
