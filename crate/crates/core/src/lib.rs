//! Vibronic monomer/dimer absorption spectra and Gaussian-process surrogate fitting.

pub mod config;
pub mod cost;
pub mod error;
pub mod evaluate;
pub mod gpr;
pub mod landscape;
pub mod manifest;
pub mod model;
pub mod pipeline;
pub mod spectra;

pub use error::{Error, Result};
