//! Simulation kernels for broadband parametric down-conversion sources built on
//! chirped periodically poled structures, and for the photon-counting
//! coherence-domain imaging (CDI) systems that use them.
//!
//! The crate covers the full numerical chain:
//!
//! 1. [`material`]: temperature-dependent refractive index and thermal
//!    expansion of the nonlinear medium, as pluggable data.
//! 2. [`grating`]: realized poling profiles `d(z)` of linearly chirped
//!    periodically poled structures.
//! 3. [`qpm`]: phase mismatch, the quasi-phase-matching integral, down-converted
//!    power spectral densities, temperature sweeps, and an inverse design search
//!    over chirp parameters.
//! 4. [`interferometry`]: Michelson interferogram synthesis, analytic-signal
//!    envelopes, and spectrum estimation by Fourier transform.
//! 5. [`detection`]: wavelength-dependent quantum efficiency and Poisson
//!    photon-counting detector models.
//! 6. [`scan`]: A-scan/B-scan acquisition over synthetic sample phantoms.
//!
//! Everything here is pure computation on owned buffers: `no_std` + `alloc`,
//! deterministic, and safe to evaluate concurrently. File formats, configuration
//! parsing, and the batch CLI live in the companion `cdi-cli` crate.

#![no_std]
#![deny(unreachable_patterns)]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod detection;
pub mod fft;
pub mod grating;
pub mod interferometry;
pub mod material;
pub mod optimize;
pub mod qpm;
pub mod rng;
pub mod scan;
#[cfg(test)]
pub(crate) mod test_support;
pub mod units;

pub use grating::{GratingPreset, GratingRealization, GratingSpec};
pub use num_complex::Complex64;
pub use material::{DispersionModel, ThermalExpansion};
pub use qpm::{BrightnessMap, Normalization, PumpConfig, Spectrum};
