//! Partition quality: replication factor, balance, the replication upper
//! bound and its power-law expectation, plus assignment validation.

use std::collections::HashMap;
use std::fmt;

use crate::graph::{Edge, EdgeId, Graph, PartitionId, VertexId};
use crate::{Error, Result};

/// Owner value of an edge that has not been assigned.
pub const UNASSIGNED: PartitionId = PartitionId::MAX;

/// A total edge-to-partition map, indexed by [`EdgeId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    num_partitions: usize,
    owners: Vec<PartitionId>,
}

/// A defect found by [`validate_assignment`] or [`validate_claims`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Edge of the graph with no partition.
    Missing(Edge),
    /// Edge claimed more than once; lists every claimed partition.
    Duplicate {
        edge: Edge,
        partitions: Vec<PartitionId>,
    },
    /// Claimed edge that is not in the graph.
    UnknownEdge(Edge),
    PartitionOutOfRange {
        edge: Edge,
        partition: PartitionId,
        num_partitions: usize,
    },
    /// Assignment covers a different number of edges than the graph has.
    LengthMismatch { assigned: usize, edges: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Missing(e) => write!(f, "edge ({}, {}) is not assigned", e.src, e.dst),
            Violation::Duplicate { edge, partitions } => write!(
                f,
                "edge ({}, {}) assigned {} times: {:?}",
                edge.src,
                edge.dst,
                partitions.len(),
                partitions
            ),
            Violation::UnknownEdge(e) => {
                write!(f, "edge ({}, {}) is not in the graph", e.src, e.dst)
            }
            Violation::PartitionOutOfRange {
                edge,
                partition,
                num_partitions,
            } => write!(
                f,
                "edge ({}, {}) assigned to partition {partition}, outside 0..{num_partitions}",
                edge.src, edge.dst
            ),
            Violation::LengthMismatch { assigned, edges } => {
                write!(f, "assignment covers {assigned} edges, graph has {edges}")
            }
        }
    }
}

impl PartitionAssignment {
    /// Wraps an owner array, rejecting unassigned edges and out-of-range ids.
    pub fn from_owners(
        graph: &Graph,
        num_partitions: usize,
        owners: Vec<PartitionId>,
    ) -> Result<Self> {
        let a = PartitionAssignment {
            num_partitions,
            owners,
        };
        let violations = validate_assignment(&a, graph);
        if violations.is_empty() {
            Ok(a)
        } else {
            Err(Error::InvalidAssignment(violations))
        }
    }

    /// Builds an assignment from `(edge, partition)` claims; every graph
    /// edge must be claimed exactly once.
    pub fn from_claims(
        graph: &Graph,
        num_partitions: usize,
        claims: &[(Edge, PartitionId)],
    ) -> Result<Self> {
        let violations = validate_claims(graph, num_partitions, claims);
        if !violations.is_empty() {
            return Err(Error::InvalidAssignment(violations));
        }
        let index = graph.edge_index();
        let mut owners = vec![UNASSIGNED; graph.edge_count()];
        for (e, p) in claims {
            owners[index[e] as usize] = *p;
        }
        Ok(PartitionAssignment {
            num_partitions,
            owners,
        })
    }

    pub fn num_partitions(&self) -> usize {
        self.num_partitions
    }

    pub fn owners(&self) -> &[PartitionId] {
        &self.owners
    }

    pub fn partition_of(&self, edge: EdgeId) -> PartitionId {
        self.owners[edge as usize]
    }

    /// `|E_p|` for every partition.
    pub fn partition_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![0u64; self.num_partitions];
        for &p in &self.owners {
            sizes[p as usize] += 1;
        }
        sizes
    }

    /// `|V(E_p)|` for every partition.
    pub fn vertex_cover_sizes(&self, graph: &Graph) -> Vec<u64> {
        let mut pairs = self.vertex_partition_pairs(graph);
        pairs.dedup();
        let mut sizes = vec![0u64; self.num_partitions];
        for (_, p) in pairs {
            sizes[p as usize] += 1;
        }
        sizes
    }

    /// `Σ_p |V(E_p)|`.
    pub fn replica_count(&self, graph: &Graph) -> u64 {
        let mut pairs = self.vertex_partition_pairs(graph);
        pairs.dedup();
        pairs.len() as u64
    }

    /// Number of partitions holding each vertex.
    pub fn replicas_per_vertex(&self, graph: &Graph) -> Vec<u32> {
        let mut pairs = self.vertex_partition_pairs(graph);
        pairs.dedup();
        let mut counts = vec![0u32; graph.vertex_count()];
        for (v, _) in pairs {
            counts[v as usize] += 1;
        }
        counts
    }

    fn vertex_partition_pairs(&self, graph: &Graph) -> Vec<(VertexId, PartitionId)> {
        let mut pairs: Vec<(VertexId, PartitionId)> = graph
            .edges()
            .iter()
            .zip(&self.owners)
            .flat_map(|(e, &p)| [(e.src, p), (e.dst, p)])
            .collect();
        pairs.sort_unstable();
        pairs
    }
}

/// Checks that `assignment` is a total map over the edges of `graph` into
/// `0..|P|`. Returns every violation found.
pub fn validate_assignment(assignment: &PartitionAssignment, graph: &Graph) -> Vec<Violation> {
    let mut out = Vec::new();
    if assignment.owners.len() != graph.edge_count() {
        out.push(Violation::LengthMismatch {
            assigned: assignment.owners.len(),
            edges: graph.edge_count(),
        });
    }
    for (&e, &p) in graph.edges().iter().zip(&assignment.owners) {
        if p == UNASSIGNED {
            out.push(Violation::Missing(e));
        } else if p as usize >= assignment.num_partitions {
            out.push(Violation::PartitionOutOfRange {
                edge: e,
                partition: p,
                num_partitions: assignment.num_partitions,
            });
        }
    }
    for &e in graph.edges().iter().skip(assignment.owners.len()) {
        out.push(Violation::Missing(e));
    }
    out
}

/// Checks a list of `(edge, partition)` claims against `graph`: every edge
/// claimed exactly once, only graph edges, partition ids in range.
pub fn validate_claims(
    graph: &Graph,
    num_partitions: usize,
    claims: &[(Edge, PartitionId)],
) -> Vec<Violation> {
    let index = graph.edge_index();
    let mut claimed: Vec<Vec<PartitionId>> = vec![Vec::new(); graph.edge_count()];
    let mut out = Vec::new();
    for &(e, p) in claims {
        let Some(&id) = index.get(&e) else {
            out.push(Violation::UnknownEdge(e));
            continue;
        };
        if p as usize >= num_partitions {
            out.push(Violation::PartitionOutOfRange {
                edge: e,
                partition: p,
                num_partitions,
            });
        }
        claimed[id as usize].push(p);
    }
    for (id, parts) in claimed.into_iter().enumerate() {
        let e = graph.edge(id as EdgeId);
        match parts.len() {
            0 => out.push(Violation::Missing(e)),
            1 => {}
            _ => out.push(Violation::Duplicate {
                edge: e,
                partitions: parts,
            }),
        }
    }
    out
}

/// `Σ_p |V(E_p)| / |V|`. Isolated vertices count in `|V|`.
pub fn replication_factor(assignment: &PartitionAssignment, graph: &Graph) -> Result<f64> {
    let violations = validate_assignment(assignment, graph);
    if !violations.is_empty() {
        return Err(Error::InvalidAssignment(violations));
    }
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(assignment.replica_count(graph) as f64 / graph.vertex_count() as f64)
}

/// `max / mean`.
pub fn balance(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("balance of an empty list".into()));
    }
    if values.iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidParameter(
            "balance needs non-negative values".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        return Err(Error::InvalidParameter("balance of all-zero values".into()));
    }
    Ok(values.iter().cloned().fold(0.0, f64::max) / mean)
}

fn balance_u64(values: &[u64]) -> Result<f64> {
    balance(&values.iter().map(|&v| v as f64).collect::<Vec<_>>())
}

pub fn edge_balance(assignment: &PartitionAssignment) -> Result<f64> {
    balance_u64(&assignment.partition_sizes())
}

pub fn vertex_balance(assignment: &PartitionAssignment, graph: &Graph) -> Result<f64> {
    balance_u64(&assignment.vertex_cover_sizes(graph))
}

/// Upper bound on the replication factor of any expansion-based partition:
/// `(|E| + |V| + |P|) / |V|`.
pub fn theoretical_upper_bound(vertices: usize, edges: usize, partitions: usize) -> Result<f64> {
    if vertices == 0 || partitions == 0 {
        return Err(Error::InvalidParameter(format!(
            "bound needs |V| > 0 and |P| > 0, got |V|={vertices} |P|={partitions}"
        )));
    }
    Ok((edges + vertices + partitions) as f64 / vertices as f64)
}

/// The same bound on `Σ_p |V(E_p)|`, in integers.
pub fn replica_limit(vertices: usize, edges: usize, partitions: usize) -> u64 {
    (edges + vertices + partitions) as u64
}

const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta for real `s > 1`.
///
/// Sums the first `N - 1` terms directly and closes with the Euler-Maclaurin
/// tail; the last correction term bounds the error, and `N` doubles until it
/// is below `1e-12` relative.
pub fn zeta(s: f64) -> Result<f64> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Divergent(s));
    }
    let mut n = 16u64;
    loop {
        let (value, err) = zeta_em(s, n);
        if err <= 1e-12 * value || n > 1 << 20 {
            return Ok(value);
        }
        n *= 2;
    }
}

fn zeta_em(s: f64, n: u64) -> (f64, f64) {
    let head: f64 = (1..n).rev().map(|k| (k as f64).powf(-s)).sum();
    let nf = n as f64;
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) / (2j)!
    let mut coef = s / 2.0;
    let mut term = 0.0;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let k = 2 * j as i32 + 1;
        term = b * coef * nf.powf(-s - k as f64);
        tail += term;
        let m = 2.0 * j as f64;
        coef *= (s + m + 1.0) * (s + m + 2.0) / ((m + 3.0) * (m + 4.0));
    }
    let value = head + tail;
    (value, term.abs())
}

/// Expected replication bound on a power-law graph with exponent `alpha`:
/// `ζ(α-1) / (2 ζ(α)) + 1`. Needs `2 < alpha < 3`.
pub fn powerlaw_expected_ub(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 2.0 {
        return Err(Error::Divergent(alpha - 1.0));
    }
    if alpha >= 3.0 {
        return Err(Error::InvalidParameter(format!(
            "power-law exponent must be below 3, got {alpha}"
        )));
    }
    Ok(0.5 * zeta(alpha - 1.0)? / zeta(alpha)? + 1.0)
}

/// A complete graph `K_n` next to a ring of `n(n-1)/2` vertices, with one
/// partition per ring vertex. Under the scripted picks every partition first
/// takes one ring edge and then one edge of `K_n`, which puts the replication
/// factor within `n / |V|` of the upper bound.
#[derive(Debug, Clone)]
pub struct TightnessFixture {
    pub n: usize,
    pub graph: Graph,
    pub num_partitions: usize,
    /// Vertices each partition picks when its boundary is empty, in order.
    pub script: Vec<Vec<VertexId>>,
    /// `Σ_p |V(E_p)|` produced by the script.
    pub expected_replicas: u64,
    pub expected_rf: f64,
    pub expected_ub: f64,
}

impl TightnessFixture {
    pub fn ratio(&self) -> f64 {
        self.expected_rf / self.expected_ub
    }
}

/// Builds the ring-plus-clique fixture for `n >= 3`. Clique vertices are
/// `0..n`, ring vertices `n..n + n(n-1)/2`.
pub fn build_tightness_fixture(n: usize) -> Result<TightnessFixture> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "fixture needs n >= 3, got {n}"
        )));
    }
    let ring = n * (n - 1) / 2;
    let vertices = n + ring;
    let mut pairs = Vec::with_capacity(2 * ring);
    for a in 0..n {
        for b in a + 1..n {
            pairs.push((a as VertexId, b as VertexId));
        }
    }
    for i in 0..ring {
        pairs.push(((n + i) as VertexId, (n + (i + 1) % ring) as VertexId));
    }
    let graph = Graph::from_pairs(vertices, pairs)?;

    // clique vertex a is the second pick of n-1-a partitions, so that the
    // partitions picking a take exactly the edges (a, b) with b > a
    let second: Vec<VertexId> = (0..n)
        .flat_map(|a| std::iter::repeat_n(a as VertexId, n - 1 - a))
        .collect();
    let script = (0..ring)
        .map(|p| vec![(n + p) as VertexId, second[p]])
        .collect();

    let replicas = 2 * n * (n - 1);
    Ok(TightnessFixture {
        n,
        graph,
        num_partitions: ring,
        script,
        expected_replicas: replicas as u64,
        expected_rf: replicas as f64 / vertices as f64,
        expected_ub: (replicas + n) as f64 / vertices as f64,
    })
}

/// One row of the quality CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub graph: String,
    pub partitioner: String,
    pub num_partitions: usize,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub replication_factor: f64,
    pub upper_bound: f64,
    pub edge_balance: f64,
    pub vertex_balance: f64,
    pub iterations: Option<u64>,
    pub elapsed_ms: f64,
}

pub const CSV_HEADER: &str =
    "graph,partitioner,P,alpha,lambda,seed,rf,ub,eb,vb,iterations,elapsed_ms";

impl QualityReport {
    /// Measures `assignment`; run metadata is left empty.
    pub fn measure(graph: &Graph, assignment: &PartitionAssignment) -> Result<Self> {
        let p = assignment.num_partitions();
        Ok(QualityReport {
            graph: String::new(),
            partitioner: String::new(),
            num_partitions: p,
            alpha: None,
            lambda: None,
            seed: 0,
            replication_factor: replication_factor(assignment, graph)?,
            upper_bound: theoretical_upper_bound(graph.vertex_count(), graph.edge_count(), p)?,
            edge_balance: edge_balance(assignment)?,
            vertex_balance: vertex_balance(assignment, graph)?,
            iterations: None,
            elapsed_ms: 0.0,
        })
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{:.3}",
            csv_field(&self.graph),
            csv_field(&self.partitioner),
            self.num_partitions,
            opt(self.alpha),
            opt(self.lambda),
            self.seed,
            self.replication_factor,
            self.upper_bound,
            self.edge_balance,
            self.vertex_balance,
            self.iterations.map(|i| i.to_string()).unwrap_or_default(),
            self.elapsed_ms
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Per-vertex count of distinct partitions, keyed by vertex. Only vertices
/// with edges appear.
pub fn replica_map(assignment: &PartitionAssignment, graph: &Graph) -> HashMap<VertexId, u32> {
    assignment
        .replicas_per_vertex(graph)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(v, c)| (v as VertexId, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_pairs(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn rf_single_partition() {
        let g = path3();
        let a = PartitionAssignment::from_owners(&g, 1, vec![0, 0]).unwrap();
        assert_eq!(replication_factor(&a, &g).unwrap(), 1.0);
    }

    #[test]
    fn rf_split_path() {
        let g = path3();
        let a = PartitionAssignment::from_owners(&g, 2, vec![0, 1]).unwrap();
        assert_eq!(replication_factor(&a, &g).unwrap(), 4.0 / 3.0);
    }

    #[test]
    fn balance_examples() {
        assert_eq!(balance(&[3.0, 3.0, 3.0]).unwrap(), 1.0);
        assert_eq!(balance(&[2.0, 0.0]).unwrap(), 2.0);
        assert!(balance(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn bound_examples() {
        assert!((theoretical_upper_bound(10, 12, 6).unwrap() - 2.8).abs() < 1e-12);
        assert_eq!(theoretical_upper_bound(2, 1, 1).unwrap(), 2.0);
        assert!(theoretical_upper_bound(0, 1, 1).is_err());
    }

    #[test]
    fn zeta_domain() {
        assert!(matches!(zeta(1.0), Err(Error::Divergent(_))));
        assert!(matches!(
            powerlaw_expected_ub(2.0),
            Err(Error::Divergent(_))
        ));
        assert!((zeta(2.0).unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
    }

    #[test]
    fn missing_and_duplicate_claims() {
        let g = path3();
        let e01 = g.edge(0);
        let e12 = g.edge(1);
        assert!(validate_claims(&g, 2, &[(e01, 0), (e12, 1)]).is_empty());
        assert_eq!(
            validate_claims(&g, 2, &[(e01, 0)]),
            vec![Violation::Missing(e12)]
        );
        assert_eq!(
            validate_claims(&g, 2, &[(e01, 0), (e12, 1), (e01, 1)]),
            vec![Violation::Duplicate {
                edge: e01,
                partitions: vec![0, 1]
            }]
        );
    }

    #[test]
    fn fixture_n4() {
        let f = build_tightness_fixture(4).unwrap();
        assert_eq!(f.graph.vertex_count(), 10);
        assert_eq!(f.graph.edge_count(), 12);
        assert_eq!(f.num_partitions, 6);
        assert!((f.expected_rf - 2.4).abs() < 1e-12);
        assert!((f.expected_ub - 2.8).abs() < 1e-12);
        assert!(build_tightness_fixture(2).is_err());
    }

    #[test]
    fn csv_row_shape() {
        let g = path3();
        let a = PartitionAssignment::from_owners(&g, 2, vec![0, 1]).unwrap();
        let mut r = QualityReport::measure(&g, &a).unwrap();
        r.graph = "a,b".into();
        let row = r.csv_row();
        assert!(row.starts_with("\"a,b\",,2,,,0,1.333333"));
        assert_eq!(
            CSV_HEADER.split(',').count(),
            row.replace("\"a,b\"", "x").split(',').count()
        );
    }
}
