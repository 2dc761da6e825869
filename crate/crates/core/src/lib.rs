//! Building-cluster energy dispatch model and an improved normal-boundary
//! intersection (INBI) toolkit: NBI frontier generation, adaptive weighted-sum
//! densification, axis-uniform point selection and a Mahalanobis
//! double-base-point compromise.

pub mod auam;
pub mod aws;
pub mod building;
pub mod compromise;
pub mod error;
pub mod frontier;
pub mod model;
pub mod nbi;
pub mod pipeline;
pub mod problem;
pub mod solver;
pub mod toy;
pub mod trr;

pub use error::{Error, Result};
pub use frontier::{FrontierSet, ParetoPoint, Source};
pub use pipeline::{run, run_all, AlgorithmId, PipelineConfig, RunResult};
pub use problem::{MooProblem, NormalizationBounds};
