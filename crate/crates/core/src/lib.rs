//! Sublinear-time estimation of maximum matching size beyond the factor 1/2.
//!
//! A random-order greedy maximal matching is augmented by one round of
//! vertex-disjoint length-3 augmenting paths. Local oracles reproduce any
//! vertex's role in that process while inspecting only a small neighborhood,
//! and sampling a few vertices yields an estimate of the matching size.
//!
//! Modules, bottom up:
//! - [`graph`], [`access`], [`generators`]: input graphs and probe-counted access.
//! - [`rank`]: parameters and the random order over edge copies.
//! - [`reference`]: the global process, exact maximum matching and audits.
//! - [`oracle`]: the local vertex and edge oracles.
//! - [`virtual_h`]: the implicit graph used for adjacency-matrix input.
//! - [`estimators`]: the sampling estimators and instance racing.
//! - [`cli`]: the `mmest` command line.

pub mod access;
pub mod cli;
pub mod estimators;
pub mod generators;
pub mod graph;
pub mod oracle;
pub mod rank;
pub mod reference;
pub mod verify;
pub mod virtual_h;

pub use access::{ListAccess, ListModel, MatrixAccess, ProbeCounts};
pub use graph::{Graph, GraphError, Vertex};
pub use rank::{Backend, ParamSet, Seed};
