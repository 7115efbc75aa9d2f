//! Initial placement of edges onto allocation processes.
//!
//! Processes form an `r x c` grid. A canonical edge `(src, dst)` lands in
//! row `h1(src) mod r` and column `h2(dst) mod c`, so every edge of `v` sits
//! in row `h1(v)` or column `h2(v)` and the set of processes that may hold `v`
//! follows from the id alone.

use crate::graph::{Edge, EdgeId, Graph, VertexId};
use crate::hash::{salted, COL_SALT, ROW_SALT};
use crate::{Error, Result};

/// 2D hash placement over `rows * cols` processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPlacement {
    rows: u32,
    cols: u32,
    row_salt: u64,
    col_salt: u64,
}

impl GridPlacement {
    /// Grid with the fixed salts. `rows` is the largest divisor of
    /// `num_procs` not above its square root (1 for primes).
    pub fn new(num_procs: usize) -> Result<Self> {
        Self::seeded(num_procs, 0)
    }

    /// Grid whose hash functions also depend on `seed`.
    pub fn seeded(num_procs: usize, seed: u64) -> Result<Self> {
        if num_procs == 0 || num_procs > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "process count must be in 1..=2^32-1, got {num_procs}"
            )));
        }
        let n = num_procs as u64;
        let rows = (1..=n)
            .take_while(|r| r * r <= n)
            .filter(|r| n.is_multiple_of(*r))
            .max()
            .unwrap();
        Ok(GridPlacement {
            rows: rows as u32,
            cols: (n / rows) as u32,
            row_salt: ROW_SALT ^ seed,
            col_salt: COL_SALT ^ seed.rotate_left(17),
        })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn num_procs(&self) -> usize {
        (self.rows * self.cols) as usize
    }

    pub fn row_of(&self, v: VertexId) -> u32 {
        (salted(v as u64, self.row_salt) % self.rows as u64) as u32
    }

    pub fn col_of(&self, v: VertexId) -> u32 {
        (salted(v as u64, self.col_salt) % self.cols as u64) as u32
    }

    pub fn process_of(&self, e: Edge) -> u32 {
        self.row_of(e.src) * self.cols + self.col_of(e.dst)
    }

    /// Processes that may store edges of `v`: its grid row plus its grid
    /// column, ascending.
    pub fn replicas(&self, v: VertexId) -> Vec<u32> {
        let (row, col) = (self.row_of(v), self.col_of(v));
        let mut out: Vec<u32> = (0..self.cols)
            .map(|c| row * self.cols + c)
            .chain((0..self.rows).map(|r| r * self.cols + col))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Whether `proc` is among the replicas of `v`.
    pub fn is_replica(&self, v: VertexId, proc: u32) -> bool {
        proc / self.cols == self.row_of(v) || proc % self.cols == self.col_of(v)
    }
}

/// Assigns every edge of `graph` to exactly one process; returns the edge ids
/// held by each process.
pub fn place_edges_2d(graph: &Graph, placement: &GridPlacement) -> Vec<Vec<EdgeId>> {
    let mut shards = vec![Vec::new(); placement.num_procs()];
    for (id, &e) in graph.edges().iter().enumerate() {
        shards[placement.process_of(e) as usize].push(id as EdgeId);
    }
    shards
}

/// How the engine spreads the edge set over its allocation processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShardLayout {
    /// 2D hash placement.
    Grid,
    /// Every edge on allocation process 0; the others hold nothing. Used to
    /// script conflict outcomes against a single edge store.
    SingleShard,
}

/// A placement the engine can route messages with.
#[derive(Debug, Clone, Copy)]
pub enum Placement {
    Grid(GridPlacement),
    SingleShard { num_procs: usize },
}

impl Placement {
    pub fn new(layout: ShardLayout, num_procs: usize, seed: u64) -> Result<Self> {
        let grid = GridPlacement::seeded(num_procs, seed)?;
        Ok(match layout {
            ShardLayout::Grid => Placement::Grid(grid),
            ShardLayout::SingleShard => Placement::SingleShard { num_procs },
        })
    }

    pub fn num_procs(&self) -> usize {
        match self {
            Placement::Grid(g) => g.num_procs(),
            Placement::SingleShard { num_procs } => *num_procs,
        }
    }

    pub fn process_of(&self, e: Edge) -> u32 {
        match self {
            Placement::Grid(g) => g.process_of(e),
            Placement::SingleShard { .. } => 0,
        }
    }

    pub fn replicas(&self, v: VertexId) -> Vec<u32> {
        match self {
            Placement::Grid(g) => g.replicas(v),
            Placement::SingleShard { .. } => vec![0],
        }
    }

    pub fn is_replica(&self, v: VertexId, proc: u32) -> bool {
        match self {
            Placement::Grid(g) => g.is_replica(v, proc),
            Placement::SingleShard { .. } => proc == 0,
        }
    }

    pub fn shards(&self, graph: &Graph) -> Vec<Vec<EdgeId>> {
        let mut shards = vec![Vec::new(); self.num_procs()];
        for (id, &e) in graph.edges().iter().enumerate() {
            shards[self.process_of(e) as usize].push(id as EdgeId);
        }
        shards
    }
}
