//! Reference partitioners: 1D hash, 2D grid hash, degree-based hashing and
//! single-threaded neighbor expansion.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::csr::build_csr;
use crate::graph::{Graph, PartitionId, VertexId};
use crate::hash::{pair, salted};
use crate::metrics::{PartitionAssignment, UNASSIGNED};
use crate::placement::GridPlacement;
use crate::{Error, Result};

const RANDOM_SALT: u64 = 0xa409_3822_299f_31d0;
const DBH_SALT: u64 = 0x082e_fa98_ec4e_6c89;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Random1D,
    Grid2D,
    Dbh,
    SequentialNe,
}

fn check(graph: &Graph, partitions: usize) -> Result<()> {
    if partitions == 0 || partitions > u32::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "invalid partition count {partitions}"
        )));
    }
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(())
}

fn hashed(
    graph: &Graph,
    partitions: usize,
    f: impl Fn(usize) -> u64,
) -> Result<PartitionAssignment> {
    let owners = (0..graph.edge_count())
        .map(|i| (f(i) % partitions as u64) as PartitionId)
        .collect();
    PartitionAssignment::from_owners(graph, partitions, owners)
}

/// Every edge hashed independently.
pub fn partition_random(
    graph: &Graph,
    partitions: usize,
    seed: u64,
) -> Result<PartitionAssignment> {
    check(graph, partitions)?;
    let salt = RANDOM_SALT ^ seed;
    hashed(graph, partitions, |i| {
        let e = graph.edges()[i];
        pair(e.src as u64, e.dst as u64, salt)
    })
}

/// Edge placed in the grid cell of its endpoints' hashes.
pub fn partition_grid(graph: &Graph, partitions: usize, seed: u64) -> Result<PartitionAssignment> {
    check(graph, partitions)?;
    let grid = GridPlacement::seeded(partitions, seed)?;
    hashed(graph, partitions, |i| {
        grid.process_of(graph.edges()[i]) as u64
    })
}

/// Edge placed by the hash of its lower-degree endpoint (the smaller id on
/// equal degrees).
pub fn partition_dbh(graph: &Graph, partitions: usize, seed: u64) -> Result<PartitionAssignment> {
    check(graph, partitions)?;
    let salt = DBH_SALT ^ seed;
    hashed(graph, partitions, |i| {
        let e = graph.edges()[i];
        let (du, dv) = (graph.degree(e.src), graph.degree(e.dst));
        let key = if dv < du { e.dst } else { e.src };
        salted(key as u64, salt)
    })
}

/// Builds partitions one after another by greedy neighbor expansion with
/// exact remaining degrees. Each partition except the last stops once it
/// holds at least `alpha * |E| / |P|` edges; the last takes what is left.
pub fn partition_sequential_ne(
    graph: &Graph,
    partitions: usize,
    alpha: f64,
    seed: u64,
) -> Result<PartitionAssignment> {
    check(graph, partitions)?;
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be >= 1, got {alpha}"
        )));
    }
    let n = graph.vertex_count();
    let csr = build_csr(graph.edges(), n)?;
    let mut owners = vec![UNASSIGNED; graph.edge_count()];
    let mut drest: Vec<u32> = graph.degrees().to_vec();
    let mut remaining = graph.edge_count();

    let mut order: Vec<VertexId> = (0..n as VertexId).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut next_seed = 0usize;

    // stamps: boundary[v] == p + 1 means v is in S for partition p,
    // core[v] == p + 1 that it has been expanded
    let mut boundary = vec![0u32; n];
    let mut core = vec![0u32; n];
    let cap = alpha * graph.edge_count() as f64 / partitions as f64;

    for p in 0..partitions as PartitionId {
        let stamp = p + 1;
        let last = p as usize + 1 == partitions;
        let mut size = 0usize;
        let mut heap: BinaryHeap<Reverse<(u32, VertexId)>> = BinaryHeap::new();

        let assign = |le: usize,
                      owners: &mut Vec<PartitionId>,
                      drest: &mut Vec<u32>,
                      heap: &mut BinaryHeap<_>,
                      boundary: &[u32],
                      core: &[u32]| {
            owners[csr.edge_id(le) as usize] = p;
            let e = csr.edges()[le];
            for v in [e.src, e.dst] {
                drest[v as usize] -= 1;
                if boundary[v as usize] == stamp && core[v as usize] != stamp {
                    heap.push(Reverse((drest[v as usize], v)));
                }
            }
        };

        while remaining > 0 && (last || (size as f64) < cap) {
            let x = loop {
                match heap.pop() {
                    Some(Reverse((d, v))) => {
                        if core[v as usize] == stamp || d != drest[v as usize] || d == 0 {
                            continue;
                        }
                        break v;
                    }
                    None => {
                        while drest[order[next_seed] as usize] == 0 {
                            next_seed += 1;
                        }
                        break order[next_seed];
                    }
                }
            };
            core[x as usize] = stamp;
            if boundary[x as usize] != stamp {
                boundary[x as usize] = stamp;
            }
            let xs = csr.slot(x).unwrap();
            for (y, ys, le) in csr.adjacency(xs) {
                if owners[csr.edge_id(le) as usize] != UNASSIGNED {
                    continue;
                }
                assign(le, &mut owners, &mut drest, &mut heap, &boundary, &core);
                size += 1;
                remaining -= 1;
                if boundary[y as usize] == stamp {
                    continue;
                }
                boundary[y as usize] = stamp;
                // y joins the vertex set: edges to other members add no replica
                for (z, _, le2) in csr.adjacency(ys) {
                    if boundary[z as usize] == stamp
                        && owners[csr.edge_id(le2) as usize] == UNASSIGNED
                    {
                        assign(le2, &mut owners, &mut drest, &mut heap, &boundary, &core);
                        size += 1;
                        remaining -= 1;
                    }
                }
                if drest[y as usize] > 0 {
                    heap.push(Reverse((drest[y as usize], y)));
                }
            }
        }
    }
    PartitionAssignment::from_owners(graph, partitions, owners)
}

/// Runs the baseline named by `kind`. `alpha` only affects sequential NE.
pub fn partition_baseline(
    kind: BaselineKind,
    graph: &Graph,
    partitions: usize,
    alpha: f64,
    seed: u64,
) -> Result<PartitionAssignment> {
    match kind {
        BaselineKind::Random1D => partition_random(graph, partitions, seed),
        BaselineKind::Grid2D => partition_grid(graph, partitions, seed),
        BaselineKind::Dbh => partition_dbh(graph, partitions, seed),
        BaselineKind::SequentialNe => partition_sequential_ne(graph, partitions, alpha, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::replication_factor;

    #[test]
    fn single_partition_everywhere() {
        let g = Graph::from_pairs(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        for kind in [
            BaselineKind::Random1D,
            BaselineKind::Grid2D,
            BaselineKind::Dbh,
            BaselineKind::SequentialNe,
        ] {
            let a = partition_baseline(kind, &g, 1, 1.1, 3).unwrap();
            assert!(a.owners().iter().all(|&p| p == 0));
        }
    }

    #[test]
    fn triangle_seqne_rf_one() {
        let g = Graph::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let a = partition_sequential_ne(&g, 1, 1.0, 0).unwrap();
        assert_eq!(replication_factor(&a, &g).unwrap(), 1.0);
    }

    #[test]
    fn dbh_tie_uses_smaller_id() {
        let g = Graph::from_pairs(2, [(0, 1)]).unwrap();
        let a = partition_dbh(&g, 16, 5).unwrap();
        assert_eq!(a.partition_of(0) as u64, salted(0, DBH_SALT ^ 5) % 16);
    }

    #[test]
    fn seqne_two_triangles_split_cleanly() {
        let g = Graph::from_pairs(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        for seed in 0..10 {
            let a = partition_sequential_ne(&g, 2, 1.0, seed).unwrap();
            assert_eq!(replication_factor(&a, &g).unwrap(), 1.0, "seed {seed}");
        }
    }
}
