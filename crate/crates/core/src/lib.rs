//! Density-matrix simulation of position-selective dark-state laser cooling
//! of a single trapped atom.
//!
//! The crate is organised bottom-up: [`model`] holds configuration and the
//! density matrix, [`basis`] builds trap eigenbases on a grid, [`pulsemap`]
//! assembles and applies the cycle map, and [`engine`] runs pulse sequences
//! and parameter sweeps.

pub mod basis;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod model;
pub mod pulsemap;
pub mod quadrature;

pub use error::{Error, Result};
