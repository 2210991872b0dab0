//! Measure flows and proper `ℓ^p` cocycles on finite hyperbolic graphs.
//!
//! The library builds finite graphs as exact integer metric spaces, computes
//! their four-point hyperbolicity constant, and constructs the equivariant
//! family of probability measures `mu_x(a)` obtained by repeatedly projecting
//! a Dirac mass onto annular spheres around a center. From the measure family
//! it assembles cocycle fields `c = mu_o - mu_{o'}`, evaluates their `ℓ^p`
//! growth, and verifies the quantitative support, decay and disjointness
//! properties of the construction by exhaustive scans.
//!
//! Everything metric is exact integer arithmetic; all measure masses are
//! exact rationals. Floating point only enters in `ℓ^p` norms for p ∉ {1, ∞}
//! and in reported decay-rate constants.
//!
//! With the default `parallel` feature the heavy scans fan out through rayon;
//! disabling it falls back to equivalent sequential loops with identical
//! (deterministic) results.

pub mod cayley;
pub mod cocycle;
pub mod doc;
mod exec;
pub mod flow;
pub mod graph;
pub mod hyperbolicity;
pub mod isometry;
pub mod measure;
pub mod metric;
pub mod report;
pub mod rescale;
pub mod spaces;
mod util;

pub use graph::{FiniteGraph, GraphError, VertexId};
pub use measure::SparseProbMeasure;
pub use metric::{
    ball, eps_geod, pair_index, sphere, FiniteMetric, LazyMetric, Metric, MetricTable, PairIndex,
};
