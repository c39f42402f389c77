//! Two-mode wavefunction simulator on a commensurate periodic grid.
//!
//! States live on an `N × N` grid in one of six representations. Every
//! modular observable is diagonal in at least one of them, where it acts as
//! multiplication by an exact lattice phase, so the context identities and
//! the Lüders projections hold to rounding error.

mod grid;
mod measurement;
mod observables;
mod states;
mod wavefunction;

pub use grid::{Axis, GridSpec, Representation};
pub use measurement::{
    empirical_marginal, measure_context, measure_context_ordered, outcome_distribution, shots_csv,
    summarize_shots, ShotRecord, ShotSummary,
};
pub use observables::{
    apply_adjoint, apply_complex_observable, apply_context, apply_observable_power, apply_real_parts,
    apply_weyl, born_distribution, class_map, common_representation, context_expectations, expectation,
    observable_expectation, preferred_representation, s_statistic, spectrum, BornDistribution, ClassMap,
};
pub use states::{make_ensemble, make_state, sweep_states, Amplitude, StateSpec, Weighted};
pub use wavefunction::{Ensemble, StateRef, WaveFunction, NORM_TOL};
