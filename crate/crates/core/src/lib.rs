//! Quantum Otto cycle with a transverse-field Ising chain as working
//! substance, simulated exactly with free-fermion (Gaussian state) methods.

pub mod analysis;
pub mod chain_model;
pub mod dynamics;
pub mod oracle;
pub mod otto_engine;
pub mod thermal_bath;
pub mod error;

pub use error::{Error, Result};
