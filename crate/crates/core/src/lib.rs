//! Massive spanning forests on finite graphs.
//!
//! The `λ`-massive spanning forest of a graph picks a spanning forest `f`
//! with probability proportional to `λ^{#components} · ∏ |component|`. This
//! crate provides:
//!
//! * [`graph`]: multigraphs, Laplacians, incidence matrices;
//! * [`determinantal`]: the exact characteristic polynomial, the resolvent,
//!   the transfer current kernel and edge-event probabilities;
//! * [`oracle`]: exhaustive enumeration with exact rational weights;
//! * [`sampler`]: Wilson's algorithm with killing;
//! * [`shape`]: canonical forms and automorphisms of rooted trees;
//! * [`limit`]: shape laws of vertex 0's component on `K_n` and of its local
//!   limits, plus samplers for the limit trees;
//! * [`stats`]: histograms, total variation, chi-square and convergence tables;
//! * [`verify`]: the oracle-versus-formula suites behind `lsf verify`.

pub mod determinantal;
pub mod error;
pub mod graph;
pub mod limit;
pub mod oracle;
pub mod rational;
pub mod sampler;
pub mod shape;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use graph::Graph;
pub use rational::Rational;
pub use shape::RootedShape;
