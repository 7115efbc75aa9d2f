use std::collections::{BTreeMap, BTreeSet, HashSet};

use dne::allocation::{final_leftover_sweep, AllocationShard, ClaimOrder};
use dne::graph::generate_erdos_renyi;
use dne::metrics::UNASSIGNED;
use dne::placement::{Placement, ShardLayout};
use dne::{Graph, PartitionId, VertexId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn whole(graph: &Graph, partitions: usize) -> AllocationShard {
    let ids: Vec<u32> = (0..graph.edge_count() as u32).collect();
    AllocationShard::from_graph(graph, &ids, partitions)
}

#[test]
fn racing_claims_assign_each_edge_once() {
    let g = generate_erdos_renyi(20_000, 100_000, 4).unwrap();
    let shard = whole(&g, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // every vertex requested by three different partitions, spread over threads
    let mut batch: Vec<(VertexId, PartitionId)> = (0..g.vertex_count() as u32)
        .flat_map(|v| {
            let mut ps: Vec<u32> = (0..16).collect();
            ps.shuffle(&mut rng);
            [(v, ps[0]), (v, ps[1]), (v, ps[2])]
        })
        .collect();
    batch.shuffle(&mut rng);
    let results: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = batch
            .chunks(batch.len().div_ceil(8))
            .map(|c| {
                let shard = &shard;
                s.spawn(move || shard.allocate_one_hop(c, ClaimOrder::Sequential))
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut claimed: Vec<(u32, u32)> = results
        .iter()
        .flat_map(|r| r.edges.iter().copied())
        .collect();
    claimed.sort_unstable();
    assert_eq!(claimed.len(), g.edge_count());
    let ids: Vec<u32> = claimed.iter().map(|&(e, _)| e).collect();
    assert_eq!(ids, (0..g.edge_count() as u32).collect::<Vec<_>>());
    let owners: BTreeMap<u32, u32> = shard.owners().collect();
    for &(e, p) in &claimed {
        assert_eq!(owners[&e], p);
    }
    let total: u64 = (0..16).map(|p| shard.local_count(p)).sum();
    assert_eq!(total, g.edge_count() as u64);
    assert_eq!(shard.unallocated(), 0);
    assert!((0..g.vertex_count() as u32).all(|v| shard.remaining_degree(v) == 0));
    // both endpoints of every claimed edge carry its partition
    for &(e, p) in &claimed {
        let edge = g.edge(e);
        assert!(shard.tags(edge.src).contains(&p));
        assert!(shard.tags(edge.dst).contains(&p));
    }
}

#[test]
fn concurrent_batch_matches_validity_oracle() {
    let g = generate_erdos_renyi(3000, 12_000, 2).unwrap();
    let shard = whole(&g, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let batch: Vec<(u32, u32)> = (0..4000)
        .map(|_| (rng.gen_range(0..3000), rng.gen_range(0..8)))
        .collect();
    let out = shard.allocate_one_hop_concurrent(&batch, ClaimOrder::RoundRobin, 6);
    let requested: HashSet<(u32, u32)> = batch.iter().copied().collect();
    for &(e, p) in &out.edges {
        let edge = g.edge(e);
        assert!(requested.contains(&(edge.src, p)) || requested.contains(&(edge.dst, p)));
    }
    // an edge with a requested endpoint cannot stay open
    let owners: BTreeMap<u32, u32> = shard.owners().collect();
    for (id, edge) in g.edges().iter().enumerate() {
        let touched = (0..8)
            .any(|p| requested.contains(&(edge.src, p)) || requested.contains(&(edge.dst, p)));
        assert_eq!(owners[&(id as u32)] != UNASSIGNED, touched, "edge {id}");
    }
}

#[test]
fn replicas_agree_after_sync() {
    let g = generate_erdos_renyi(400, 3000, 5).unwrap();
    for procs in [4, 6, 9] {
        let placement = Placement::new(ShardLayout::Grid, procs, 1).unwrap();
        let shards: Vec<AllocationShard> = placement
            .shards(&g)
            .iter()
            .map(|ids| AllocationShard::from_graph(&g, ids, procs))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(procs as u64);
        let batch: Vec<(u32, u32)> = (0..60)
            .map(|_| (rng.gen_range(0..400), rng.gen_range(0..procs as u32)))
            .collect();
        let mut union: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
        let mut inbox: Vec<Vec<(u32, u32)>> = vec![Vec::new(); procs];
        for (i, s) in shards.iter().enumerate() {
            let one = s.allocate_one_hop(&batch, ClaimOrder::Sequential);
            for &(v, p) in &one.new_tags {
                union.entry(v).or_default().insert(p);
            }
            for (to, pairs) in s.sync_targets(&placement, i as u32, &one.new_tags) {
                inbox[to as usize].extend(pairs);
            }
        }
        for (i, s) in shards.iter().enumerate() {
            s.apply_sync(&placement, i as u32, &inbox[i]).unwrap();
        }
        for (i, s) in shards.iter().enumerate() {
            for &v in s.subgraph().vertices() {
                let expect: Vec<u32> = union
                    .get(&v)
                    .map(|t| t.iter().copied().collect())
                    .unwrap_or_default();
                assert_eq!(s.tags(v), expect, "vertex {v} on shard {i}");
            }
        }
    }
}

#[test]
fn sync_to_a_non_replica_is_rejected() {
    let g = generate_erdos_renyi(100, 400, 1).unwrap();
    let placement = Placement::new(ShardLayout::Grid, 9, 0).unwrap();
    let shard = AllocationShard::from_graph(&g, &placement.shards(&g)[0], 9);
    let v = (0..100).find(|&v| !placement.is_replica(v, 0)).unwrap();
    assert!(shard.apply_sync(&placement, 0, &[(v, 1)]).is_err());
}

// a-b-c triangle plus pendant d on c: partition 0 expands a, partition 1
// expands d; b-c is closed by 0, the only partition tagged on both ends.
#[test]
fn two_hop_closes_triangle() {
    let g = Graph::from_pairs(4, [(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
    let shard = whole(&g, 2);
    let one = shard.allocate_one_hop(&[(0, 0), (3, 1)], ClaimOrder::Sequential);
    assert_eq!(one.edges, vec![(0, 0), (1, 0), (3, 1)]);
    assert_eq!(one.new_tags, vec![(0, 0), (1, 0), (2, 0), (2, 1), (3, 1)]);
    let two = shard.allocate_two_hop(&one.new_tags);
    assert_eq!(two, vec![(2, 0)]);
    assert_eq!(shard.unallocated(), 0);
}

#[test]
fn two_hop_prefers_smaller_partition_and_skips_retired() {
    // 0-1 is open; both endpoints are tagged 0 and 1 through the other edges
    let pairs = [(0, 1), (0, 2), (1, 3), (0, 4), (1, 5), (2, 6), (3, 7)];
    let build = || {
        let g = Graph::from_pairs(8, pairs).unwrap();
        let s = whole(&g, 2);
        // partition 0 gets more edges than partition 1
        s.allocate_one_hop(&[(2, 0), (3, 0), (4, 1), (5, 1)], ClaimOrder::Sequential);
        s
    };
    let s = build();
    assert_eq!((s.local_count(0), s.local_count(1)), (4, 2));
    assert_eq!(s.allocate_two_hop(&[(0, 0)]), vec![(0, 1)]);

    let mut s = build();
    s.retire(1);
    assert_eq!(s.allocate_two_hop(&[(0, 0)]), vec![(0, 0)]);
    let mut s = build();
    s.retire(0);
    s.retire(1);
    assert!(s.allocate_two_hop(&[(0, 0)]).is_empty());
}

#[test]
fn local_drest_matches_recount() {
    let g = generate_erdos_renyi(500, 2500, 3).unwrap();
    let placement = Placement::new(ShardLayout::Grid, 6, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ids in placement.shards(&g) {
        let s = AllocationShard::from_graph(&g, &ids, 6);
        let batch: Vec<(u32, u32)> = (0..80)
            .map(|_| (rng.gen_range(0..500), rng.gen_range(0..6)))
            .collect();
        let one = s.allocate_one_hop(&batch, ClaimOrder::Sequential);
        s.allocate_two_hop(&one.new_tags);
        let probe: Vec<(u32, u32)> = (0..500).map(|v| (v, 0)).collect();
        let owners: BTreeMap<u32, u32> = s.owners().collect();
        for (v, _, d) in s.compute_local_drest(&probe) {
            let recount = ids
                .iter()
                .filter(|&&e| owners[&e] == UNASSIGNED)
                .filter(|&&e| g.edge(e).src == v || g.edge(e).dst == v)
                .count() as u64;
            assert_eq!(d, recount, "vertex {v}");
        }
    }
}

#[test]
fn leftover_sweep_fixture() {
    // 0-1 tagged by 1 only; 2-3 untagged; 4-5 tagged 0 and 2
    let g = Graph::from_pairs(9, [(0, 1), (2, 3), (4, 5), (0, 6), (4, 7), (5, 8)]).unwrap();
    let s = whole(&g, 3);
    s.allocate_one_hop(&[(6, 1), (7, 0), (8, 2)], ClaimOrder::Sequential);
    assert_eq!(s.unallocated(), 3);
    // partition 2 is the emptiest globally, 0 is heavier than 1
    let mut sizes = vec![10, 7, 3];
    let swept = final_leftover_sweep(&[&s], &mut sizes);
    assert_eq!(swept, vec![(0, 1), (1, 2), (2, 2)]);
    assert_eq!(sizes, vec![10, 8, 5]);
    assert_eq!(s.unallocated(), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_hop_never_double_assigns(seed in 0u64..10_000, threads in 1usize..6, rr in any::<bool>()) {
        let g = generate_erdos_renyi(80, 300, seed).unwrap();
        let shard = whole(&g, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let batch: Vec<(u32, u32)> = (0..50).map(|_| (rng.gen_range(0..80), rng.gen_range(0..5))).collect();
        let order = if rr { ClaimOrder::RoundRobin } else { ClaimOrder::Sequential };
        let out = shard.allocate_one_hop_concurrent(&batch, order, threads);
        let ids: HashSet<u32> = out.edges.iter().map(|&(e, _)| e).collect();
        prop_assert_eq!(ids.len(), out.edges.len());
        let assigned = shard.owners().filter(|&(_, p)| p != UNASSIGNED).count();
        prop_assert_eq!(assigned, out.edges.len());
        let total: u64 = (0..5).map(|p| shard.local_count(p)).sum();
        prop_assert_eq!(total as usize, out.edges.len());
    }
}
