//! Hard-core model toolkit.
//!
//! Exact oracles on small graphs, loopy belief propagation with
//! contraction diagnostics, the path-coupling weights built from the BP
//! fixed point, Glauber dynamics with coupled pairs and local statistics,
//! and estimators that tie them together. The crate is `no_std` and only
//! needs an allocator; file formats and the CLI live in `hardcore-lab`.

#![no_std]

extern crate alloc;

pub mod bp;
pub mod dynamics;
pub mod estimators;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use graph::{Graph, GraphError, OrientedView};
pub use model::{lambda_c, IndependentSet, ModelError, ModelParams};
