//! A laboratory for modular particle swarm optimization.
//!
//! The crate is organised as a pipeline:
//!
//! * [`benchmark`] builds seeded, transformed test problems (shifted, rotated,
//!   noisy and composed functions) with known optima.
//! * [`swarm`] composes PSO variants from interchangeable modules around the
//!   generalized velocity update `v' = w1 v + DNPP + Pert`.
//! * [`runner`] enumerates the module design space and runs the fixed-budget
//!   protocol, producing one [`runner::PerformanceDataset`] per problem.
//! * [`fanova`] fits a categorical random forest to a dataset and decomposes
//!   its variance into main, pairwise and triple module effects.
//! * [`cluster`] groups problems by their effect vectors with agglomerative
//!   clustering and a silhouette-driven grid search.
//! * [`report`] writes summaries, clustermaps, manifests and SVG renderings.

pub mod benchmark;
pub mod cluster;
pub mod fanova;
pub mod linalg;
pub mod report;
pub mod rng;
pub mod runner;
pub mod swarm;

pub use benchmark::{FunctionId, ProblemInstance, ProblemSpec};
pub use fanova::{EffectVector, SurrogateForest};
pub use runner::{ExperimentPlan, PerformanceDataset};
pub use swarm::{ModuleConfiguration, RunResult};



