//! Initial states from JSON-friendly specifications.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, Representation};
use super::wavefunction::{Ensemble, WaveFunction};
use crate::appendix_basis::{modular_eigenstate, v_eigenstate, ModularEigenstateParams, VEigenstateParams};
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn default_envelope() -> f64 {
    2.0
}

/// A state family and its parameters, tagged by `"family"` in JSON:
///
/// ```json
/// {"family": "gaussian", "center": [0.5, 0.0], "momentum": [0.0, 1.0], "sigma": 1.0}
/// {"family": "mixture", "components": [{"weight": 0.5, "state": {"family": "random", "seed": 1}}]}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateSpec {
    /// Product of two Gaussians with mean positions `center`, mean momenta
    /// `momentum` and position spread `sigma`.
    Gaussian {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        momentum: [f64; 2],
        #[serde(default = "one")]
        sigma: f64,
    },
    /// Normalized coherent sum of pure states with complex `[re, im]`
    /// amplitudes.
    Superposition { components: Vec<Amplitude> },
    /// Standard complex normal amplitudes under a Gaussian envelope.
    Random {
        seed: u64,
        #[serde(default = "default_envelope")]
        envelope: f64,
    },
    /// Constant amplitude in position space.
    Uniform,
    VEigenstate(VEigenstateParams),
    ModularEigenstate(ModularEigenstateParams),
    Mixture { components: Vec<Weighted> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub amplitude: [f64; 2],
    pub state: StateSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weighted {
    pub weight: f64,
    pub state: StateSpec,
}

impl StateSpec {
    pub fn gaussian(center: [f64; 2], momentum: [f64; 2], sigma: f64) -> Self {
        StateSpec::Gaussian { center, momentum, sigma }
    }

    pub fn random(seed: u64) -> Self {
        StateSpec::Random {
            seed,
            envelope: default_envelope(),
        }
    }

    pub fn is_mixed(&self) -> bool {
        matches!(self, StateSpec::Mixture { .. })
    }
}

/// Builds a pure state in the position representation.
pub fn make_state(spec: &StateSpec, grid: &GridSpec) -> Result<WaveFunction> {
    match spec {
        StateSpec::Gaussian { center, momentum, sigma } => gaussian(grid, *center, *momentum, *sigma),
        StateSpec::Superposition { components } => {
            if components.is_empty() {
                return Err(Error::State("superposition has no components".into()));
            }
            let n = grid.n();
            let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
            for c in components {
                let psi = make_state(&c.state, grid)?;
                let z = Complex64::new(c.amplitude[0], c.amplitude[1]);
                for (a, b) in amps.iter_mut().zip(psi.amplitudes()) {
                    *a += z * b;
                }
            }
            WaveFunction::normalized(amps, Representation::POSITION, *grid)
        }
        StateSpec::Random { seed, envelope } => random(grid, *seed, *envelope),
        StateSpec::Uniform => {
            let n = grid.n();
            let amps = vec![Complex64::new(1.0 / n as f64, 0.0); n * n];
            WaveFunction::from_amplitudes(amps, Representation::POSITION, *grid)
        }
        StateSpec::VEigenstate(p) => v_eigenstate(p, grid),
        StateSpec::ModularEigenstate(p) => modular_eigenstate(p, grid),
        StateSpec::Mixture { .. } => Err(Error::State("a mixture is not a pure state".into())),
    }
}

/// Builds any state as an ensemble; pure specs give a single member.
pub fn make_ensemble(spec: &StateSpec, grid: &GridSpec) -> Result<Ensemble> {
    match spec {
        StateSpec::Mixture { components } => {
            let members = components
                .iter()
                .map(|c| {
                    if c.state.is_mixed() {
                        return Err(Error::State("nested mixtures are not supported".into()));
                    }
                    Ok((c.weight, make_state(&c.state, grid)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ensemble::new(members)
        }
        pure => Ok(Ensemble::pure(make_state(pure, grid)?)),
    }
}

/// Distance from `c` to `x` on the periodic box, in `[-L/2, L/2)`.
fn minimal_image(x: f64, c: f64, length: f64) -> f64 {
    let d = x - c;
    d - length * (d / length).round()
}

fn gaussian(grid: &GridSpec, center: [f64; 2], momentum: [f64; 2], sigma: f64) -> Result<WaveFunction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::State(format!("sigma must be positive, got {sigma}")));
    }
    for c in center {
        if !grid.contains(c) {
            return Err(Error::State(format!("center {c} lies outside the box")));
        }
    }
    let n = grid.n();
    let hbar = grid.units().hbar_f64();
    let length = grid.box_length();
    let factor = |j: usize, mode: usize| {
        let x = grid.x(j);
        let d = minimal_image(x, center[mode], length);
        Complex64::from_polar((-d * d / (4.0 * sigma * sigma)).exp(), momentum[mode] * x / hbar)
    };
    let f1: Vec<Complex64> = (0..n).map(|j| factor(j, 0)).collect();
    let f2: Vec<Complex64> = (0..n).map(|j| factor(j, 1)).collect();
    let amps = f1.iter().flat_map(|a| f2.iter().map(move |b| a * b)).collect();
    WaveFunction::normalized(amps, Representation::POSITION, *grid)
}

fn random(grid: &GridSpec, seed: u64, envelope: f64) -> Result<WaveFunction> {
    if !(envelope > 0.0 && envelope.is_finite()) {
        return Err(Error::State(format!("envelope must be positive, got {envelope}")));
    }
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = Vec::with_capacity(n * n);
    for j1 in 0..n {
        for j2 in 0..n {
            let (x1, x2) = (grid.x(j1), grid.x(j2));
            let w = (-(x1 * x1 + x2 * x2) / (4.0 * envelope * envelope)).exp();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            amps.push(w * Complex64::new(re, im));
        }
    }
    WaveFunction::normalized(amps, Representation::POSITION, *grid)
}

/// The built-in state list used by parameter sweeps: six pure families and
/// two mixtures.
pub fn sweep_states() -> Vec<(String, StateSpec)> {
    let g0 = StateSpec::gaussian([0.0, 0.0], [0.0, 0.0], 1.0);
    let g1 = StateSpec::gaussian([1.3, -2.1], [0.7, -0.4], 0.8);
    let mixture_a = StateSpec::Mixture {
        components: vec![
            Weighted { weight: 0.5, state: StateSpec::gaussian([-4.0, 0.0], [0.0, 0.0], 0.7) },
            Weighted { weight: 0.5, state: StateSpec::gaussian([4.0, 0.0], [0.0, 0.0], 0.7) },
        ],
    };
    let mixture_b = StateSpec::Mixture {
        components: vec![
            Weighted { weight: 0.2, state: StateSpec::random(11) },
            Weighted { weight: 0.3, state: g1.clone() },
            Weighted { weight: 0.5, state: StateSpec::Uniform },
        ],
    };
    vec![
        ("gaussian".into(), g0),
        ("displaced_gaussian".into(), g1),
        (
            "superposition".into(),
            StateSpec::Superposition {
                components: vec![
                    Amplitude { amplitude: [1.0, 0.0], state: StateSpec::gaussian([-3.0, 1.0], [0.5, 0.0], 1.0) },
                    Amplitude { amplitude: [0.0, 1.0], state: StateSpec::gaussian([3.0, -1.0], [-0.5, 0.0], 1.0) },
                ],
            },
        ),
        ("random_1".into(), StateSpec::random(1)),
        ("random_2".into(), StateSpec::random(2)),
        ("random_3".into(), StateSpec::random(3)),
        ("mixture_two_gaussians".into(), mixture_a),
        ("mixture_three_states".into(), mixture_b),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_is_normalized() {
        let g = GridSpec::default();
        let psi = make_state(&StateSpec::gaussian([0.0; 2], [0.0; 2], 1.0), &g).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_is_deterministic() {
        let g = GridSpec::default();
        let a = make_state(&StateSpec::random(7), &g).unwrap();
        let b = make_state(&StateSpec::random(7), &g).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let c = make_state(&StateSpec::random(8), &g).unwrap();
        assert_ne!(a.amplitudes(), c.amplitudes());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = GridSpec::default();
        let bad_sigma = StateSpec::gaussian([0.0; 2], [0.0; 2], 0.0);
        assert!(matches!(make_state(&bad_sigma, &g), Err(Error::State(_))));
        let outside = StateSpec::gaussian([100.0, 0.0], [0.0; 2], 1.0);
        assert!(matches!(make_state(&outside, &g), Err(Error::State(_))));
    }

    #[test]
    fn json_round_trip() {
        for (_, spec) in sweep_states() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: StateSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back);
        }
        let parsed: StateSpec = serde_json::from_str(r#"{"family":"gaussian"}"#).unwrap();
        assert_eq!(parsed, StateSpec::gaussian([0.0; 2], [0.0; 2], 1.0));
    }

    #[test]
    fn sweep_has_two_mixtures() {
        let states = sweep_states();
        assert_eq!(states.len(), 8);
        assert_eq!(states.iter().filter(|(_, s)| s.is_mixed()).count(), 2);
    }
}
