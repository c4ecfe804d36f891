//! Quasi-joint-spectral distributions of (generally non-commuting)
//! observables, the quantisation / quasi-classicalisation pairs they induce,
//! phase-space representations on sampled grids, and the quantum
//! correlations, conditional expectations and weak values built on top.

pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod phase_space;
pub mod qjsd;
pub mod random;
pub mod spectral;
pub mod stats;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
