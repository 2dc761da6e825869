//! Scenario synthesis, the case matrix and experiment drivers for the
//! building-cluster dispatch study.

pub mod cases;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod synth;

pub use error::{HarnessError, Result};
