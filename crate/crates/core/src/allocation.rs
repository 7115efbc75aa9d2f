//! Edge allocation on one shard: one-hop claiming, tag synchronization,
//! two-hop closure and remaining-degree scoring.
//!
//! Per-edge ownership is an atomic word moved from [`UNASSIGNED`] to a
//! partition id by compare-and-swap, so concurrent claimers for different
//! partitions never both win. Vertex tags (the partitions a vertex belongs
//! to) are per-vertex bitsets that only grow.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use crate::csr::SubGraph;
use crate::graph::{EdgeId, Graph, PartitionId, VertexId};
use crate::metrics::UNASSIGNED;
use crate::placement::Placement;
use crate::runtime::{Actor, Envelope, Message, Outbox, Phase, ProcessId, StepInfo, StepOutcome};
use crate::{Error, Result};

/// Order in which the entries of a one-hop batch claim their edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClaimOrder {
    /// Each `(v, p)` claims all of its edges before the next entry starts.
    #[default]
    Sequential,
    /// Entries take turns, one successful claim each per round, until no
    /// entry can claim anything.
    RoundRobin,
}

/// Result of [`AllocationShard::allocate_one_hop`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OneHop {
    /// `(vertex, partition)` tags set for the first time, sorted.
    pub new_tags: Vec<(VertexId, PartitionId)>,
    /// Claimed `(edge, partition)` pairs, sorted.
    pub edges: Vec<(EdgeId, PartitionId)>,
}

/// One allocation process's share of the graph and its allocation state.
#[derive(Debug)]
pub struct AllocationShard {
    sub: SubGraph,
    num_partitions: usize,
    words: usize,
    owners: Vec<AtomicU32>,
    tags: Vec<AtomicU64>,
    remaining: Vec<AtomicU32>,
    counts: Vec<AtomicU64>,
    live: Vec<u64>,
}

impl AllocationShard {
    pub fn new(sub: SubGraph, num_partitions: usize) -> Self {
        let words = num_partitions.div_ceil(64).max(1);
        let n = sub.vertex_count();
        let mut live = vec![0u64; words];
        for p in 0..num_partitions {
            live[p / 64] |= 1 << (p % 64);
        }
        AllocationShard {
            owners: (0..sub.edge_count())
                .map(|_| AtomicU32::new(UNASSIGNED))
                .collect(),
            tags: (0..n * words).map(|_| AtomicU64::new(0)).collect(),
            remaining: (0..n)
                .map(|s| AtomicU32::new(sub.degree(s) as u32))
                .collect(),
            counts: (0..num_partitions).map(|_| AtomicU64::new(0)).collect(),
            sub,
            num_partitions,
            words,
            live,
        }
    }

    pub fn from_graph(graph: &Graph, edges: &[EdgeId], num_partitions: usize) -> Self {
        Self::new(SubGraph::from_graph(graph, edges), num_partitions)
    }

    pub fn subgraph(&self) -> &SubGraph {
        &self.sub
    }

    pub fn num_partitions(&self) -> usize {
        self.num_partitions
    }

    /// Owner of local edge `local`, or `UNASSIGNED`.
    pub fn owner(&self, local: usize) -> PartitionId {
        self.owners[local].load(Ordering::Acquire)
    }

    /// `(global edge id, owner)` for every local edge.
    pub fn owners(&self) -> impl Iterator<Item = (EdgeId, PartitionId)> + '_ {
        (0..self.sub.edge_count()).map(|i| (self.sub.edge_id(i), self.owner(i)))
    }

    /// Locally stored edges allocated to `p`.
    pub fn local_count(&self, p: PartitionId) -> u64 {
        self.counts[p as usize].load(Ordering::Relaxed)
    }

    /// Partition tags of `v` on this shard (empty if `v` has no local edges).
    pub fn tags(&self, v: VertexId) -> Vec<PartitionId> {
        match self.sub.slot(v) {
            Some(s) => self.slot_tags(s),
            None => Vec::new(),
        }
    }

    fn slot_tags(&self, slot: usize) -> Vec<PartitionId> {
        let mut out = Vec::new();
        for w in 0..self.words {
            let mut bits = self.tags[slot * self.words + w].load(Ordering::Acquire);
            while bits != 0 {
                out.push((w * 64 + bits.trailing_zeros() as usize) as PartitionId);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Unallocated local edges of `v`.
    pub fn remaining_degree(&self, v: VertexId) -> u64 {
        self.sub
            .slot(v)
            .map(|s| self.remaining[s].load(Ordering::Acquire) as u64)
            .unwrap_or(0)
    }

    pub fn unallocated(&self) -> usize {
        self.owners
            .iter()
            .filter(|o| o.load(Ordering::Acquire) == UNASSIGNED)
            .count()
    }

    /// Stops two-hop claims for `p`.
    pub fn retire(&mut self, p: PartitionId) {
        self.live[p as usize / 64] &= !(1 << (p % 64));
    }

    pub fn is_live(&self, p: PartitionId) -> bool {
        self.live[p as usize / 64] & (1 << (p % 64)) != 0
    }

    /// Unallocated -> `p`. Losing the race returns false and changes nothing.
    fn claim(&self, local: usize, p: PartitionId) -> bool {
        if self.owners[local]
            .compare_exchange(UNASSIGNED, p, Ordering::AcqRel, Ordering::Acquire)
            .is_err()
        {
            return false;
        }
        self.counts[p as usize].fetch_add(1, Ordering::Relaxed);
        let (a, b) = self.sub.endpoint_slots(local);
        self.remaining[a].fetch_sub(1, Ordering::AcqRel);
        self.remaining[b].fetch_sub(1, Ordering::AcqRel);
        true
    }

    /// Sets tag `p` on local vertex `slot`; true if it was not set before.
    fn tag(&self, slot: usize, p: PartitionId) -> bool {
        let bit = 1u64 << (p % 64);
        let prev = self.tags[slot * self.words + p as usize / 64].fetch_or(bit, Ordering::AcqRel);
        prev & bit == 0
    }

    fn has_tag(&self, slot: usize, p: PartitionId) -> bool {
        let bits = self.tags[slot * self.words + p as usize / 64].load(Ordering::Acquire);
        bits & (1 << (p % 64)) != 0
    }

    /// For each `(v, p)`, claims every local unallocated edge of `v` for `p`
    /// and tags both endpoints of each claimed edge. Vertices without local
    /// edges are ignored; repeated pairs are harmless.
    pub fn allocate_one_hop(&self, batch: &[(VertexId, PartitionId)], order: ClaimOrder) -> OneHop {
        let mut out = OneHop::default();
        let mut claimed =
            |slot: usize, v: VertexId, nbr_slot: usize, nbr: VertexId, le: usize, p| {
                out.edges.push((self.sub.edge_id(le), p));
                if self.tag(nbr_slot, p) {
                    out.new_tags.push((nbr, p));
                }
                if self.tag(slot, p) {
                    out.new_tags.push((v, p));
                }
            };
        let entries: Vec<(usize, VertexId, PartitionId)> = batch
            .iter()
            .filter(|(_, p)| (*p as usize) < self.num_partitions)
            .filter_map(|&(v, p)| self.sub.slot(v).map(|s| (s, v, p)))
            .collect();
        match order {
            ClaimOrder::Sequential => {
                for &(slot, v, p) in &entries {
                    for (nbr, nbr_slot, le) in self.sub.adjacency(slot) {
                        if self.owner(le) == UNASSIGNED && self.claim(le, p) {
                            claimed(slot, v, nbr_slot, nbr, le, p);
                        }
                    }
                }
            }
            ClaimOrder::RoundRobin => {
                let mut cursors: Vec<usize> = entries
                    .iter()
                    .map(|&(s, _, _)| self.sub.offsets()[s])
                    .collect();
                loop {
                    let mut progress = false;
                    for (i, &(slot, v, p)) in entries.iter().enumerate() {
                        let end = self.sub.offsets()[slot + 1];
                        let mut adj = self
                            .sub
                            .adjacency(slot)
                            .skip(cursors[i] - self.sub.offsets()[slot]);
                        while cursors[i] < end {
                            let (nbr, nbr_slot, le) = adj.next().unwrap();
                            cursors[i] += 1;
                            if self.owner(le) == UNASSIGNED && self.claim(le, p) {
                                claimed(slot, v, nbr_slot, nbr, le, p);
                                progress = true;
                                break;
                            }
                        }
                    }
                    if !progress {
                        break;
                    }
                }
            }
        }
        out.new_tags.sort_unstable();
        out.new_tags.dedup();
        out.edges.sort_unstable();
        out
    }

    /// [`allocate_one_hop`](Self::allocate_one_hop) with the batch split over
    /// `threads` workers racing on the same shard.
    pub fn allocate_one_hop_concurrent(
        &self,
        batch: &[(VertexId, PartitionId)],
        order: ClaimOrder,
        threads: usize,
    ) -> OneHop {
        if threads <= 1 || batch.len() < 2 {
            return self.allocate_one_hop(batch, order);
        }
        let chunk = batch.len().div_ceil(threads);
        let parts: Vec<OneHop> = std::thread::scope(|s| {
            let hs: Vec<_> = batch
                .chunks(chunk)
                .map(|c| s.spawn(move || self.allocate_one_hop(c, order)))
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut out = OneHop::default();
        for p in parts {
            out.new_tags.extend(p.new_tags);
            out.edges.extend(p.edges);
        }
        out.new_tags.sort_unstable();
        out.new_tags.dedup();
        out.edges.sort_unstable();
        out
    }

    /// Groups new tags by the other replicas of their vertex:
    /// `(process, pairs)` for every process except `me`.
    pub fn sync_targets(
        &self,
        placement: &Placement,
        me: u32,
        new_tags: &[(VertexId, PartitionId)],
    ) -> BTreeMap<u32, Vec<(VertexId, PartitionId)>> {
        let mut out: BTreeMap<u32, Vec<_>> = BTreeMap::new();
        for &(v, p) in new_tags {
            for r in placement.replicas(v) {
                if r != me {
                    out.entry(r).or_default().push((v, p));
                }
            }
        }
        out
    }

    /// Applies tags received from other replicas. Every vertex must map to
    /// `me` under `placement`; vertices without local edges are skipped.
    /// Returns the pairs that concern local vertices.
    pub fn apply_sync(
        &self,
        placement: &Placement,
        me: u32,
        pairs: &[(VertexId, PartitionId)],
    ) -> Result<Vec<(VertexId, PartitionId)>> {
        let mut out = Vec::with_capacity(pairs.len());
        for &(v, p) in pairs {
            if !placement.is_replica(v, me) {
                return Err(Error::Protocol(format!(
                    "tag sync for vertex {v} sent to allocator {me}, which is not among its replicas"
                )));
            }
            if p as usize >= self.num_partitions {
                return Err(Error::Protocol(format!("tag sync names partition {p}")));
            }
            if let Some(slot) = self.sub.slot(v) {
                self.tag(slot, p);
                out.push((v, p));
            }
        }
        Ok(out)
    }

    /// For every distinct vertex `u` in `bp_new` and every local unallocated
    /// edge `(u, w)`, claims the edge for the live partition in
    /// `tags(u) ∩ tags(w)` with the fewest local edges (ties: smaller id).
    /// Such a claim adds no vertex to any partition.
    pub fn allocate_two_hop(
        &self,
        bp_new: &[(VertexId, PartitionId)],
    ) -> Vec<(EdgeId, PartitionId)> {
        let mut vertices: Vec<VertexId> = bp_new.iter().map(|&(v, _)| v).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let mut out = Vec::new();
        let mut common = vec![0u64; self.words];
        for u in vertices {
            let Some(us) = self.sub.slot(u) else { continue };
            for (_, ws, le) in self.sub.adjacency(us) {
                if self.owner(le) != UNASSIGNED {
                    continue;
                }
                let mut any = false;
                for (w, c) in common.iter_mut().enumerate() {
                    *c = self.tags[us * self.words + w].load(Ordering::Acquire)
                        & self.tags[ws * self.words + w].load(Ordering::Acquire)
                        & self.live[w];
                    any |= *c != 0;
                }
                if !any {
                    continue;
                }
                let mut best: Option<(u64, PartitionId)> = None;
                for (w, &c) in common.iter().enumerate() {
                    let mut bits = c;
                    while bits != 0 {
                        let p = (w * 64 + bits.trailing_zeros() as usize) as PartitionId;
                        bits &= bits - 1;
                        let key = (self.local_count(p), p);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
                let p = best.unwrap().1;
                if self.claim(le, p) {
                    out.push((self.sub.edge_id(le), p));
                }
            }
        }
        out
    }

    /// `(v, p, unallocated local edges of v)` for every pair in `bp_new`
    /// whose vertex is stored here.
    pub fn compute_local_drest(
        &self,
        bp_new: &[(VertexId, PartitionId)],
    ) -> Vec<(VertexId, PartitionId, u64)> {
        bp_new
            .iter()
            .filter_map(|&(v, p)| {
                self.sub
                    .slot(v)
                    .map(|s| (v, p, self.remaining[s].load(Ordering::Acquire) as u64))
            })
            .collect()
    }

    /// A vertex with unallocated local edges chosen by `token`, if any.
    pub fn pick_vertex(&self, token: u64) -> Option<VertexId> {
        let candidates: Vec<usize> = (0..self.sub.vertex_count())
            .filter(|&s| self.remaining[s].load(Ordering::Acquire) > 0)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        Some(
            self.sub
                .vertex(candidates[(token % candidates.len() as u64) as usize]),
        )
    }

    /// Assigns `local` to `p` unconditionally (it must be unallocated),
    /// tagging both endpoints.
    fn force(&self, local: usize, p: PartitionId) -> bool {
        if !self.claim(local, p) {
            return false;
        }
        let (a, b) = self.sub.endpoint_slots(local);
        self.tag(a, p);
        self.tag(b, p);
        true
    }
}

/// Assigns every unallocated edge of `shards` to the smallest partition
/// (by `sizes`, ties to the smaller id) among those tagged on either
/// endpoint, or to the globally smallest partition if neither endpoint is
/// tagged. Updates `sizes` as it goes.
pub fn final_leftover_sweep(
    shards: &[&AllocationShard],
    sizes: &mut [u64],
) -> Vec<(EdgeId, PartitionId)> {
    let mut out = Vec::new();
    for shard in shards {
        for le in 0..shard.sub.edge_count() {
            if shard.owner(le) != UNASSIGNED {
                continue;
            }
            let (a, b) = shard.sub.endpoint_slots(le);
            let candidates: Vec<PartitionId> = (0..shard.num_partitions as PartitionId)
                .filter(|&p| shard.has_tag(a, p) || shard.has_tag(b, p))
                .collect();
            let pool: Vec<PartitionId> = if candidates.is_empty() {
                (0..sizes.len() as PartitionId).collect()
            } else {
                candidates
            };
            let p = *pool
                .iter()
                .min_by_key(|&&p| (sizes[p as usize], p))
                .unwrap();
            if shard.force(le, p) {
                sizes[p as usize] += 1;
                out.push((shard.sub.edge_id(le), p));
            }
        }
    }
    out
}

/// The allocation process: owns one shard and runs the allocation phases.
pub struct AllocationProcess {
    index: u32,
    shard: AllocationShard,
    placement: Placement,
    order: ClaimOrder,
    claim_threads: usize,
    pending: Vec<(VertexId, PartitionId)>,
    new_tags: Vec<(VertexId, PartitionId)>,
    bp_new: Vec<(VertexId, PartitionId)>,
    claimed: Vec<(EdgeId, PartitionId)>,
}

impl AllocationProcess {
    pub fn new(
        index: u32,
        shard: AllocationShard,
        placement: Placement,
        order: ClaimOrder,
        claim_threads: usize,
    ) -> Self {
        AllocationProcess {
            index,
            shard,
            placement,
            order,
            claim_threads: claim_threads.max(1),
            pending: Vec::new(),
            new_tags: Vec::new(),
            bp_new: Vec::new(),
            claimed: Vec::new(),
        }
    }

    pub fn shard(&self) -> &AllocationShard {
        &self.shard
    }

    /// New boundary pairs of the current iteration (after the sync phase).
    pub fn boundary_pairs(&self) -> &[(VertexId, PartitionId)] {
        &self.bp_new
    }

    fn num_procs(&self) -> u32 {
        self.placement.num_procs() as u32
    }

    fn handle_random(
        &mut self,
        partition: PartitionId,
        token: u64,
        hops: u32,
        out: &mut Outbox,
    ) -> Result<bool> {
        if let Some(v) = self.shard.pick_vertex(token) {
            let targets: Vec<ProcessId> = self
                .placement
                .replicas(v)
                .into_iter()
                .map(ProcessId::allocation)
                .collect();
            out.multicast(
                &targets,
                Message::VertexMulticast {
                    partition,
                    vertices: vec![v],
                },
            )?;
            return Ok(false);
        }
        if hops + 1 >= self.num_procs() {
            // nothing left anywhere
            return Ok(false);
        }
        out.send(
            ProcessId::allocation((self.index + 1) % self.num_procs()),
            Message::RandomRequest {
                partition,
                token,
                hops: hops + 1,
            },
        )?;
        Ok(true)
    }
}

impl Actor for AllocationProcess {
    fn id(&self) -> ProcessId {
        ProcessId::allocation(self.index)
    }

    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> Result<StepOutcome> {
        let mut forwarded = false;
        let mut synced = Vec::new();
        for env in inbox {
            match env.msg {
                Message::Retire { partition } => self.shard.retire(partition),
                Message::VertexMulticast {
                    partition,
                    vertices,
                } if matches!(info.phase, Phase::RandomPick | Phase::OneHop) => {
                    self.pending
                        .extend(vertices.into_iter().map(|v| (v, partition)));
                }
                Message::RandomRequest {
                    partition,
                    token,
                    hops,
                } if info.phase == Phase::RandomPick => {
                    forwarded |= self.handle_random(partition, token, hops, out)?;
                }
                Message::BoundarySync { pairs } if info.phase == Phase::Sync => {
                    synced.extend(self.shard.apply_sync(&self.placement, self.index, &pairs)?);
                }
                msg => {
                    return Err(Error::Protocol(format!(
                        "{} received {} from {} in phase {}",
                        self.id(),
                        msg.variant(),
                        env.sender,
                        info.phase
                    )))
                }
            }
        }

        match info.phase {
            Phase::OneHop => {
                let batch = std::mem::take(&mut self.pending);
                let res =
                    self.shard
                        .allocate_one_hop_concurrent(&batch, self.order, self.claim_threads);
                for (proc, pairs) in
                    self.shard
                        .sync_targets(&self.placement, self.index, &res.new_tags)
                {
                    out.send(ProcessId::allocation(proc), Message::BoundarySync { pairs })?;
                }
                self.new_tags = res.new_tags;
                self.claimed = res.edges;
            }
            Phase::Sync => {
                let mut bp = std::mem::take(&mut self.new_tags);
                bp.extend(synced);
                bp.sort_unstable();
                bp.dedup();
                self.bp_new = bp;
            }
            Phase::TwoHop => {
                let two_hop = self.shard.allocate_two_hop(&self.bp_new);
                self.claimed.extend(two_hop);
            }
            Phase::Report => {
                let mut boundary: BTreeMap<PartitionId, Vec<(VertexId, u64)>> = BTreeMap::new();
                for (v, p, d) in self.shard.compute_local_drest(&self.bp_new) {
                    if d > 0 {
                        boundary.entry(p).or_default().push((v, d));
                    }
                }
                let mut edges: BTreeMap<PartitionId, Vec<EdgeId>> = BTreeMap::new();
                for (e, p) in std::mem::take(&mut self.claimed) {
                    edges.entry(p).or_default().push(e);
                }
                for (partition, entries) in boundary {
                    out.send(
                        ProcessId::expansion(partition),
                        Message::NewBoundary { partition, entries },
                    )?;
                }
                for (partition, mut list) in edges {
                    list.sort_unstable();
                    out.send(
                        ProcessId::expansion(partition),
                        Message::NewEdges {
                            partition,
                            edges: list,
                        },
                    )?;
                }
                self.bp_new.clear();
            }
            _ => {}
        }
        Ok(StepOutcome::Arrived { vote: !forwarded })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn shard(pairs: &[(VertexId, VertexId)], n: usize, parts: usize) -> (Graph, AllocationShard) {
        let g = Graph::from_pairs(n, pairs.iter().copied()).unwrap();
        let ids: Vec<EdgeId> = (0..g.edge_count() as EdgeId).collect();
        let s = AllocationShard::from_graph(&g, &ids, parts);
        (g, s)
    }

    #[test]
    fn star_center_claims_all() {
        let (_, s) = shard(&[(0, 1), (0, 2), (0, 3)], 4, 2);
        let r = s.allocate_one_hop(&[(0, 1)], ClaimOrder::Sequential);
        assert_eq!(r.edges, vec![(0, 1), (1, 1), (2, 1)]);
        assert_eq!(r.new_tags, vec![(0, 1), (1, 1), (2, 1), (3, 1)]);
        assert_eq!(s.local_count(1), 3);
        let again = s.allocate_one_hop(&[(0, 0)], ClaimOrder::Sequential);
        assert_eq!(again, OneHop::default());
    }

    #[test]
    fn two_hop_argmin_and_empty_intersection() {
        // 0-1 (p1), 0-2 (p2), 1-2 open; tags(1)={1}, tags(2)={2}
        let (_, s) = shard(&[(0, 1), (0, 2), (1, 2)], 3, 3);
        s.allocate_one_hop(&[(1, 1)], ClaimOrder::Sequential);
        assert_eq!(s.owner(0), 1);
        assert_eq!(s.owner(2), 1);
        let (_, s) = shard(&[(0, 1), (0, 2), (1, 2)], 3, 3);
        assert!(s.force(0, 1));
        assert!(s.force(1, 2));
        assert!(s.allocate_two_hop(&[(1, 1), (2, 2)]).is_empty());
    }

    #[test]
    fn two_hop_prefers_smaller_local_count() {
        // edge (0,1) open; both endpoints tagged {1,2}; p2 holds fewer edges
        let (_, s) = shard(&[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (3, 4)], 5, 3);
        for le in [1, 2, 5] {
            assert!(s.force(le, 1));
        }
        for le in [3, 4] {
            assert!(s.force(le, 2));
        }
        assert_eq!(s.allocate_two_hop(&[(0, 1)]), vec![(0, 2)]);
    }

    #[test]
    fn retired_partition_skipped_in_two_hop() {
        let (_, mut s) = shard(&[(0, 1), (0, 2), (1, 2)], 3, 2);
        s.force(1, 0);
        s.force(2, 0);
        s.retire(0);
        assert!(s.allocate_two_hop(&[(0, 0)]).is_empty());
    }

    #[test]
    fn local_drest_counts_unallocated() {
        let (_, s) = shard(&[(0, 1), (0, 2), (0, 3), (0, 4)], 5, 1);
        s.force(0, 0);
        assert_eq!(s.compute_local_drest(&[(0, 0)]), vec![(0, 0, 3)]);
        for le in 1..4 {
            s.force(le, 0);
        }
        assert_eq!(s.compute_local_drest(&[(0, 0)]), vec![(0, 0, 0)]);
    }

    #[test]
    fn round_robin_interleaves_claims() {
        // path 1-0-2-3 expanded from 0 (p0) and 2 (p1)
        let (_, s) = shard(&[(0, 1), (0, 2), (2, 3)], 4, 2);
        let r = s.allocate_one_hop(&[(0, 0), (2, 1)], ClaimOrder::RoundRobin);
        assert_eq!(r.edges, vec![(0, 0), (1, 1), (2, 1)]);
        let (_, s) = shard(&[(0, 1), (0, 2), (2, 3)], 4, 2);
        let r = s.allocate_one_hop(&[(0, 0), (2, 1)], ClaimOrder::Sequential);
        assert_eq!(r.edges, vec![(0, 0), (1, 0), (2, 1)]);
    }

    #[test]
    fn leftover_follows_tags_then_size() {
        let (_, s) = shard(&[(0, 1), (1, 2), (3, 4)], 5, 3);
        s.force(0, 2);
        let mut sizes = vec![5, 0, 1];
        let left = final_leftover_sweep(&[&s], &mut sizes);
        assert_eq!(left, vec![(1, 2), (2, 1)]);
        assert_eq!(sizes, vec![5, 1, 2]);
    }
}
