//! Strongly-local flow-based clustering: grow a seed set into a
//! low-conductance cluster while penalizing the exclusion of seed nodes.

pub mod driver;
pub mod error;
pub mod eval;
pub mod flow;
pub mod graph;
pub mod io;
pub mod local;
pub mod objective;
pub mod synth;

pub use driver::{cluster, AlphaUpdate, ClusterResult, Mode, SolveOptions};
pub use error::{Error, Result};
pub use graph::{Graph, NodeSet};
pub use objective::SeedSpec;
