//! Hybrid quantum-classical regression of excited-state properties from
//! molecular ground states.
//!
//! The pipeline: integral bundles are mapped to qubit operators
//! ([`operators`]), exactly diagonalized into labelled target series and
//! regression datasets ([`spectra`]), and learned by a spin-symmetric
//! pooling circuit ([`ansatz`]) whose measured Z-observable is weighted by a
//! small neural network ([`model`], [`training`]). Classical baselines and
//! the benchmark harness live in [`baselines`] and [`bench`].

pub mod ansatz;
pub mod baselines;
pub mod bench;
mod error;
pub mod model;
pub mod operators;
pub mod rng;
pub mod simulator;
pub mod spectra;
pub mod training;

pub use error::{Error, Result};
