//! Overlapping community detection by neighborhood-inflated seed expansion.
//!
//! The pipeline has four phases:
//!
//! 1. [`filtering`]: split the graph into its biconnected core and the
//!    whiskers hanging off it.
//! 2. [`seeding`]: pick seed vertices in the core.
//! 3. [`expansion`]: grow each seed's closed neighborhood into a
//!    low-conductance community with personalized PageRank and a sweep cut.
//! 4. [`propagation`]: attach whiskers to every community that holds their
//!    bridge endpoint.
//!
//! [`evaluation`] scores the result and [`pipeline`] wires everything into
//! a reproducible batch run.

pub mod error;
pub mod evaluation;
pub mod expansion;
pub mod filtering;
pub mod graph;
pub mod partition;
pub mod pipeline;
pub mod propagation;
pub mod rng;
pub mod seeding;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId, VertexSet};
