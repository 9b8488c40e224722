//! Spectral toolkit for periodic Navier–Stokes with randomized rough data.
//!
//! Fields live on the truncated Fourier lattice `[-M, M]^d` of the
//! 2π-periodic torus ([`grid`], [`field`]). [`spectral`] holds the Fourier
//! multipliers and the exactly dealiased advection term. [`randomize`]
//! builds `f^ω` and [`heatflow`] evaluates and probes `e^{tΔ} f^ω`.
//! [`galerkin`] integrates the truncated difference equation for
//! `w = u − e^{tΔ} f^ω`; [`verify`] turns trajectories into diagnostics.

pub mod checkpoint;
pub mod cli;
pub mod datum;
pub mod error;
mod fft;
pub mod field;
pub mod galerkin;
pub mod grid;
pub mod heatflow;
pub mod phi;
pub mod randomize;
pub mod spectral;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::GridSpec;
pub use randomize::{MultiplierLaw, SeedSpec};
