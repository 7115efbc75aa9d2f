//! Compressed sparse row storage for one shard of the edge set.

use crate::graph::{Edge, EdgeId, Graph, VertexId};
use crate::{Error, Result};

/// CSR adjacency over the vertices that have at least one local edge.
///
/// Every undirected edge is stored once in `edges` and appears twice in the
/// adjacency (once per endpoint); both adjacency slots point at the same local
/// edge index, so per-edge state kept alongside is shared by both directions.
#[derive(Debug, Clone, Default)]
pub struct SubGraph {
    /// Sorted global ids of local vertices.
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    /// Global id of each adjacency entry's neighbor.
    neighbors: Vec<VertexId>,
    /// Local index of each adjacency entry's neighbor.
    neighbor_slots: Vec<u32>,
    /// Local edge index of each adjacency entry.
    edge_slots: Vec<u32>,
    edges: Vec<Edge>,
    /// Global id of each local edge.
    edge_ids: Vec<EdgeId>,
}

/// Builds a CSR from canonical edges; local edge `i` gets global id `i`.
pub fn build_csr(edges: &[Edge], vertex_count: usize) -> Result<SubGraph> {
    let ids: Vec<EdgeId> = (0..edges.len() as EdgeId).collect();
    SubGraph::build(edges.to_vec(), ids, vertex_count)
}

impl SubGraph {
    /// CSR of the edges of `graph` listed in `edge_ids`.
    pub fn from_graph(graph: &Graph, edge_ids: &[EdgeId]) -> Self {
        let edges = edge_ids.iter().map(|&id| graph.edge(id)).collect();
        Self::build(edges, edge_ids.to_vec(), graph.vertex_count())
            .expect("graph edges are in range")
    }

    fn build(edges: Vec<Edge>, edge_ids: Vec<EdgeId>, vertex_count: usize) -> Result<Self> {
        for e in &edges {
            for v in [e.src, e.dst] {
                if v as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: v as u64,
                        vertex_count,
                    });
                }
            }
        }
        let mut vertices: Vec<VertexId> = edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        vertices.sort_unstable();
        vertices.dedup();

        let slot = |v: VertexId| vertices.binary_search(&v).unwrap();
        let mut offsets = vec![0usize; vertices.len() + 1];
        for e in &edges {
            offsets[slot(e.src) + 1] += 1;
            offsets[slot(e.dst) + 1] += 1;
        }
        for i in 0..vertices.len() {
            offsets[i + 1] += offsets[i];
        }

        let total = offsets[vertices.len()];
        let mut entries: Vec<(u32, VertexId, u32)> = Vec::with_capacity(total);
        for (i, e) in edges.iter().enumerate() {
            entries.push((slot(e.src) as u32, e.dst, i as u32));
            entries.push((slot(e.dst) as u32, e.src, i as u32));
        }
        // group by owner, neighbors ascending within a row
        entries.sort_unstable();

        let mut neighbors = Vec::with_capacity(total);
        let mut neighbor_slots = Vec::with_capacity(total);
        let mut edge_slots = Vec::with_capacity(total);
        for (_, nbr, e) in entries {
            neighbors.push(nbr);
            neighbor_slots.push(slot(nbr) as u32);
            edge_slots.push(e);
        }

        Ok(SubGraph {
            vertices,
            offsets,
            neighbors,
            neighbor_slots,
            edge_slots,
            edges,
            edge_ids,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbors(&self) -> &[VertexId] {
        &self.neighbors
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Local slot of global vertex `v`, if it has local edges.
    pub fn slot(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn vertex(&self, slot: usize) -> VertexId {
        self.vertices[slot]
    }

    pub fn degree(&self, slot: usize) -> usize {
        self.offsets[slot + 1] - self.offsets[slot]
    }

    /// Adjacency of local vertex `slot`: `(neighbor id, neighbor slot, local edge)`.
    pub fn adjacency(&self, slot: usize) -> impl Iterator<Item = (VertexId, usize, usize)> + '_ {
        let range = self.offsets[slot]..self.offsets[slot + 1];
        range.map(move |i| {
            (
                self.neighbors[i],
                self.neighbor_slots[i] as usize,
                self.edge_slots[i] as usize,
            )
        })
    }

    /// Global id of local edge `local`.
    pub fn edge_id(&self, local: usize) -> EdgeId {
        self.edge_ids[local]
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.edge_ids
    }

    /// Local slots of the two endpoints of local edge `local`.
    pub fn endpoint_slots(&self, local: usize) -> (usize, usize) {
        let e = self.edges[local];
        (self.slot(e.src).unwrap(), self.slot(e.dst).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: VertexId, b: VertexId) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn single_edge_layout() {
        let g = build_csr(&[e(0, 1)], 2).unwrap();
        assert_eq!(g.offsets(), &[0, 1, 2]);
        assert_eq!(g.neighbors(), &[1, 0]);
        let shared: Vec<_> = (0..2)
            .flat_map(|s| g.adjacency(s).map(|(_, _, le)| le))
            .collect();
        assert_eq!(shared, vec![0, 0]);
    }

    #[test]
    fn triangle_degrees() {
        let g = build_csr(&[e(0, 1), e(1, 2), e(0, 2)], 3).unwrap();
        for s in 0..3 {
            assert_eq!(g.degree(s), 2);
        }
    }

    #[test]
    fn out_of_range_endpoint() {
        assert!(matches!(
            build_csr(&[e(0, 5)], 5),
            Err(Error::VertexOutOfRange { vertex: 5, .. })
        ));
    }

    #[test]
    fn compact_over_sparse_ids() {
        let g = build_csr(&[e(10, 40)], 100).unwrap();
        assert_eq!(g.vertices(), &[10, 40]);
        assert_eq!(g.slot(40), Some(1));
        assert_eq!(g.slot(11), None);
        assert_eq!(g.adjacency(0).collect::<Vec<_>>(), vec![(40, 1, 0)]);
    }
}
