//! Simple undirected graphs: ingestion, serialization and synthetic generators.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Dense vertex id in `0..|V|`.
pub type VertexId = u32;
/// Index of an edge in [`Graph::edges`].
pub type EdgeId = u32;
/// Partition id in `0..|P|`.
pub type PartitionId = u32;

/// An undirected edge stored with `src < dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    /// Canonical form of `{a, b}`; `None` for self-loops.
    pub fn new(a: VertexId, b: VertexId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge { src: a, dst: b }),
            std::cmp::Ordering::Greater => Some(Edge { src: b, dst: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// The endpoint opposite to `v`.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.src == v {
            self.dst
        } else {
            self.src
        }
    }
}

/// Immutable simple undirected graph.
///
/// Edges keep the order in which they were first seen, so serializing a loaded
/// graph and loading it again reproduces the same dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<Edge>,
    degrees: Vec<u32>,
    labels: Vec<u64>,
}

impl Graph {
    /// Builds a graph over `0..vertex_count` from arbitrary pairs, dropping
    /// self-loops and duplicates. Vertex labels are the ids themselves.
    pub fn from_pairs(
        vertex_count: usize,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (a, b) in pairs {
            for v in [a, b] {
                if v as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: v as u64,
                        vertex_count,
                    });
                }
            }
            if let Some(e) = Edge::new(a, b) {
                if seen.insert(e) {
                    edges.push(e);
                }
            }
        }
        let labels = (0..vertex_count as u64).collect();
        Ok(Self::assemble(vertex_count, edges, labels))
    }

    fn assemble(vertex_count: usize, edges: Vec<Edge>, labels: Vec<u64>) -> Self {
        let mut degrees = vec![0u32; vertex_count];
        for e in &edges {
            degrees[e.src as usize] += 1;
            degrees[e.dst as usize] += 1;
        }
        Graph {
            vertex_count,
            edges,
            degrees,
            labels,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id as usize]
    }

    pub fn degree(&self, v: VertexId) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Original label of dense vertex `v` (the id used in the input file).
    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v as usize]
    }

    /// Map from original label back to dense id.
    pub fn label_index(&self) -> HashMap<u64, VertexId> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as VertexId))
            .collect()
    }

    /// Map from canonical edge to its id.
    pub fn edge_index(&self) -> HashMap<Edge, EdgeId> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i as EdgeId))
            .collect()
    }

    /// Number of vertices without any incident edge.
    pub fn isolated_count(&self) -> usize {
        self.degrees.iter().filter(|&&d| d == 0).count()
    }
}

/// Reads a whitespace-separated `u v` edge list. Lines starting with `#` and
/// blank lines are skipped. Ids are remapped to `0..|V|` in order of first
/// appearance; self-loops are dropped before remapping.
pub fn load_edge_list(reader: impl BufRead) -> Result<Graph> {
    let mut ids: HashMap<u64, VertexId> = HashMap::new();
    let mut labels = Vec::new();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok = fields.next().ok_or_else(|| Error::Parse {
                line: line_no,
                reason: format!("missing {what} vertex"),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("invalid vertex id {tok:?}"),
            })
        };
        let a = next("source")?;
        let b = next("target")?;
        if let Some(extra) = fields.next() {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("unexpected trailing field {extra:?}"),
            });
        }
        if a == b {
            continue;
        }
        let mut dense = |label: u64| -> Result<VertexId> {
            if let Some(&v) = ids.get(&label) {
                return Ok(v);
            }
            let v = VertexId::try_from(labels.len()).map_err(|_| Error::Parse {
                line: line_no,
                reason: "too many vertices".into(),
            })?;
            ids.insert(label, v);
            labels.push(label);
            Ok(v)
        };
        let (da, db) = (dense(a)?, dense(b)?);
        let e = Edge::new(da, db).expect("distinct labels map to distinct ids");
        if seen.insert(e) {
            edges.push(e);
        }
    }

    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    Ok(Graph::assemble(labels.len(), edges, labels))
}

/// Writes one `u v` line per edge using the original vertex labels.
pub fn write_edge_list(graph: &Graph, mut out: impl Write) -> Result<()> {
    for e in graph.edges() {
        writeln!(out, "{} {}", graph.label(e.src), graph.label(e.dst))?;
    }
    Ok(())
}

/// Graph500 quadrant probabilities.
pub const GRAPH500_PROBABILITIES: [f64; 4] = [0.57, 0.19, 0.19, 0.05];

/// Parameters of the recursive-matrix generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    /// `|V| = 2^scale`.
    pub scale: u32,
    /// Samples drawn per vertex.
    pub edge_factor: u32,
    /// Quadrant probabilities `a, b, c, d`.
    pub probabilities: [f64; 4],
    pub seed: u64,
}

impl RmatParams {
    pub fn new(scale: u32, edge_factor: u32, seed: u64) -> Self {
        RmatParams {
            scale,
            edge_factor,
            probabilities: GRAPH500_PROBABILITIES,
            seed,
        }
    }

    pub fn with_probabilities(mut self, probabilities: [f64; 4]) -> Self {
        self.probabilities = probabilities;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale < 1 {
            return Err(Error::InvalidParameter(
                "rmat scale must be at least 1".into(),
            ));
        }
        if self.scale > 31 {
            return Err(Error::InvalidParameter(format!(
                "rmat scale {} overflows 32-bit vertex ids",
                self.scale
            )));
        }
        if self.edge_factor < 1 {
            return Err(Error::InvalidParameter(
                "rmat edge factor must be at least 1".into(),
            ));
        }
        if self
            .probabilities
            .iter()
            .any(|&p| !(0.0..=1.0).contains(&p))
        {
            return Err(Error::InvalidParameter(
                "rmat probabilities must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "rmat probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Generates an R-MAT graph with `2^scale` vertices from `2^scale * edge_factor`
/// directed samples, then drops self-loops and duplicate undirected edges.
/// Vertices that receive no edge stay in the graph as isolated vertices.
pub fn generate_rmat(params: &RmatParams) -> Result<Graph> {
    params.validate()?;
    let n = 1usize << params.scale;
    let samples = n
        .checked_mul(params.edge_factor as usize)
        .ok_or_else(|| Error::InvalidParameter("rmat sample count overflows".into()))?;
    let [a, b, c, _] = params.probabilities;
    let (ab, abc) = (a + b, a + b + c);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let pairs = (0..samples).map(|_| {
        let (mut src, mut dst) = (0u32, 0u32);
        for _ in 0..params.scale {
            let r: f64 = rng.gen();
            let (sb, db) = if r < a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            src = (src << 1) | sb;
            dst = (dst << 1) | db;
        }
        (src, dst)
    });
    Graph::from_pairs(n, pairs.collect::<Vec<_>>())
}

/// Uniform random simple graph with `vertex_count` vertices and `edge_count`
/// distinct edges (the G(n, m) model).
pub fn generate_erdos_renyi(vertex_count: usize, edge_count: usize, seed: u64) -> Result<Graph> {
    if vertex_count < 2 {
        return Err(Error::InvalidParameter("need at least two vertices".into()));
    }
    let max = vertex_count * (vertex_count - 1) / 2;
    if edge_count > max {
        return Err(Error::InvalidParameter(format!(
            "{edge_count} edges do not fit in a simple graph on {vertex_count} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(edge_count);
    let mut pairs = Vec::with_capacity(edge_count);
    while pairs.len() < edge_count {
        let a = rng.gen_range(0..vertex_count) as VertexId;
        let b = rng.gen_range(0..vertex_count) as VertexId;
        if let Some(e) = Edge::new(a, b) {
            if seen.insert(e) {
                pairs.push((a, b));
            }
        }
    }
    Graph::from_pairs(vertex_count, pairs)
}
