//! Disentangled graph homophily: label, structural, and feature metrics, a
//! synthetic generator with all three controlled, the analytic
//! node-distinguishability factors they predict, and a sweep harness
//! connecting the two.

pub mod csbm;
pub mod error;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod rng;
mod sampling;
pub mod stats;
pub mod trihom;

pub use error::{Error, Result};
pub use graph::{Dataset, Graph, NeighborDistribution};
pub use matrix::Matrix;

/// Pairwise metrics evaluate all node pairs exactly up to this many nodes
/// and switch to seeded sampling above it.
pub const PAIRWISE_EXACT_THRESHOLD: usize = 2000;
