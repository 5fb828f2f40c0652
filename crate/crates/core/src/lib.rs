//! Spherically symmetric Vlasov–Poisson dynamics in shell representation,
//! with the tools to decide whether a solution disperses.
//!
//! * [`model`]: particles, cumulative mass, energies, moments, concentration.
//! * [`dynamics`]: leapfrog integration of the radial characteristics.
//! * [`kurth`]: the homologous uniform-ball solutions, in closed form.
//! * [`scenarios`]: escaping shells, static cores and their superposition.
//! * [`classify`]: finite-horizon dispersion labels and consistency checks.
//! * [`cli`]: configuration files, CSV output and batch commands.
//!
//! Units are `m = 4πG = 1`, so the radial force is `M(<r)/(4πr²)`.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod kurth;
pub mod model;
pub mod scenarios;
pub mod sum;

pub use error::{Error, Result};
