//! Batch front end for the coherence-domain imaging simulator.
//!
//! Everything stateful lives here: run-configuration parsing, material
//! definition files, CSV and 16-bit graymap writers, run manifests with
//! content hashes, and the deterministic thread pool. The physics is all in
//! `cdi-core`.

pub mod config;
pub mod manifest;
pub mod material_file;
pub mod parallel;
pub mod pgm;
pub mod runner;
pub mod textio;

pub use config::{parse_config, Experiment, RunConfig};
pub use runner::run;
