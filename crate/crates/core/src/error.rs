use crate::graph::PartitionId;
use crate::metrics::Violation;
use crate::runtime::{Phase, ProcessId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange { vertex: u64, vertex_count: usize },

    #[error("unknown process {0}")]
    UnknownProcess(ProcessId),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("deadlock in iteration {iteration} ({phase}): {process} never arrived at the barrier: {reason}")]
    Deadlock {
        iteration: u64,
        phase: Phase,
        process: ProcessId,
        reason: String,
    },

    #[error("replication bound violated: {replicas} vertex replicas exceed |E|+|V|+|P| = {limit}")]
    BoundViolation { replicas: u64, limit: u64 },

    #[error("partition {partition} holds {size} edges, above cap {cap:.3} plus {last_batch} edges received in its final iteration")]
    CapExceeded {
        partition: PartitionId,
        size: u64,
        cap: f64,
        last_batch: u64,
    },

    #[error("invalid assignment ({} violations, first: {})", .0.len(), .0.first().map(|v| v.to_string()).unwrap_or_default())]
    InvalidAssignment(Vec<Violation>),

    #[error("zeta({0}) diverges")]
    Divergent(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
