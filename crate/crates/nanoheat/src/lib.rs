//! Photothermal response of small 2D nanoparticles.
//!
//! The crate chains a Lorentz permittivity model and resonance frequency
//! selection, volume integral scattering (TM and TE), heat layer potentials,
//! a finite-difference transmission solver and the dominant-term heat
//! formulas, with brute-force cross-checks for each link.

pub mod acceptance;
pub mod asymptotics;
pub mod config;
pub mod error;
pub mod geometry;
pub mod heatkernels;
pub mod heatref;
pub mod kernels;
pub mod material;
pub mod oracle;
pub mod pipeline;
pub mod quad;
pub mod scatter;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
