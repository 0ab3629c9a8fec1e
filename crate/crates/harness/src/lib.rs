//! Reproducibility layer: synthetic bag data, file formats, experiment
//! protocols and the command-line interface.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod synth;

pub use error::{HResult, HarnessError};
