//! Vertex-cut edge partitioning by parallel neighbor expansion.
//!
//! The engine runs `|P|` expansion processes, each growing one partition
//! greedily from the boundary vertex with the fewest unallocated edges, and
//! `|P|` allocation processes that own a 2D-hashed shard of the graph and
//! resolve edge claims in four bulk-synchronous phases (one-hop claiming,
//! replica synchronization, two-hop closure, remaining-degree scoring).
//!
//! Alongside the engine the crate ships the hash baselines (1D random,
//! 2D grid, degree-based hashing), a sequential expansion partitioner, and
//! the quality metrics used to compare them.

pub mod allocation;
pub mod baselines;
pub mod csr;
pub mod engine;
mod error;
pub mod expansion;
pub mod format;
pub mod graph;
pub mod hash;
pub mod metrics;
pub mod placement;
pub mod runtime;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, Graph, PartitionId, VertexId};
pub use metrics::{PartitionAssignment, QualityReport};
