//! Classical and coined quantum Metropolis walks over discretized
//! torsion-angle energy landscapes, with time-to-solution analysis,
//! spectral-gap checks and OpenQASM export of the two-angle circuit.

pub mod analysis;
pub mod cli;
pub mod cwalk;
pub mod error;
pub mod init;
pub mod landscape;
pub mod qasm;
pub mod qwalk;
pub mod schedule;
pub mod spectral;
pub mod suite;

pub use error::{Error, Result};
