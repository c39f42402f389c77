//! Modular-variable contextuality toolkit.
//!
//! * [`weyl_algebra`]: exact displacement-operator algebra and the context
//!   product identities.
//! * [`classical_bound`]: noncontextual bound, optimizer and random models.
//! * [`cv_sim`]: two-mode grid simulator with sequential projective
//!   measurement.
//! * [`appendix_basis`]: common eigenbases of `{C, c, γ}` on the grid.

pub mod error;
pub mod classical_bound;
pub mod weyl_algebra;
pub mod cv_sim;
pub mod appendix_basis;

pub use error::{Error, Result};
