//! Simulator for the mechanical analog of electromagnetically induced
//! transparency: magnetized nanomechanical resonators coupled to a spin
//! ensemble, producing narrow transparency windows in the ensemble's
//! magnetic susceptibility and the associated slow-signal propagation.
//!
//! The crate is organised as
//! - [`model`]: parameter types and the SI boundary (tip geometry to
//!   dimensionless couplings, susceptibility prefactor);
//! - [`response`]: closed-form complex susceptibility, refractive index,
//!   and group velocity;
//! - [`modes`]: undamped normal-mode analysis, peak and window detection;
//! - [`oracle`]: time-domain Langevin integration and exact
//!   diagonalization, used as independent cross-checks;
//! - [`config`]: the JSON run-configuration schema and figure presets;
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod modes;
pub mod oracle;
pub mod poly;
pub mod response;

pub use error::{Error, Result};
pub use model::{MaterialParams, OscillatorParams, SystemParams};
pub use response::{Spectrum, SpectrumPoint};
