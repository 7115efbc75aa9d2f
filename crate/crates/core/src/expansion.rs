//! The expansion process: grows one partition from its boundary.
//!
//! Each iteration pops the `k = max(1, ceil(λ|B|))` boundary vertices with
//! the fewest unallocated edges and sends them to the allocators holding
//! their replicas. When the boundary is empty the colocated allocator is
//! asked for a random vertex instead. After allocation the process merges
//! the new boundary scores and claimed edges, and everyone agrees on the
//! total allocated count to decide whether to stop.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{PartitionId, VertexId};
use crate::hash::mix64;
use crate::placement::Placement;
use crate::runtime::{
    all_gather_sum, Actor, Envelope, Message, Outbox, Phase, ProcessId, StepInfo, StepOutcome,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    /// Imbalance factor; each partition stops once it holds more than
    /// `alpha * |E| / |P|` edges.
    pub alpha: f64,
    /// Fraction of the boundary expanded per iteration.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            alpha: 1.1,
            lambda: 0.1,
            seed: 0,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 1, got {}",
                self.alpha
            )));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be in (0, 1], got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Edge cap of one partition.
    pub fn cap(&self, edges: usize, partitions: usize) -> f64 {
        self.alpha * edges as f64 / partitions as f64
    }
}

/// Number of vertices popped from a boundary of `len` entries.
pub fn select_k(len: usize, lambda: f64) -> usize {
    ((lambda * len as f64).ceil() as usize).max(1)
}

/// Candidate vertices ordered by `(score, id)`.
#[derive(Debug, Clone, Default)]
pub struct Boundary {
    order: BTreeSet<(u64, VertexId)>,
    scores: HashMap<VertexId, u64>,
}

impl Boundary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn score(&self, v: VertexId) -> Option<u64> {
        self.scores.get(&v).copied()
    }

    /// Sets the score of `v`; a zero score removes it.
    pub fn set(&mut self, v: VertexId, score: u64) {
        if let Some(old) = self.scores.remove(&v) {
            self.order.remove(&(old, v));
        }
        if score > 0 {
            self.scores.insert(v, score);
            self.order.insert((score, v));
        }
    }

    /// Removes and returns the `k` smallest entries.
    pub fn pop_k(&mut self, k: usize) -> Vec<(VertexId, u64)> {
        let mut out = Vec::with_capacity(k.min(self.len()));
        while out.len() < k {
            let Some((score, v)) = self.order.pop_first() else {
                break;
            };
            self.scores.remove(&v);
            out.push((v, score));
        }
        out
    }

    /// Entries in `(score, id)` order.
    pub fn entries(&self) -> impl Iterator<Item = (VertexId, u64)> + '_ {
        self.order.iter().map(|&(s, v)| (v, s))
    }
}

/// Pops the vertices to expand this iteration; see [`select_k`].
pub fn select_expansion_vertices(boundary: &mut Boundary, lambda: f64) -> Vec<VertexId> {
    let k = select_k(boundary.len(), lambda);
    boundary.pop_k(k).into_iter().map(|(v, _)| v).collect()
}

/// Sums the per-allocator contributions of each vertex and stores the totals
/// in `boundary`, replacing earlier scores. Zero totals are not inserted.
/// Returns the summed `(vertex, score)` pairs, zeros included, by vertex.
pub fn update_boundary(
    boundary: &mut Boundary,
    contributions: &[(VertexId, u64)],
) -> Vec<(VertexId, u64)> {
    let mut sums: BTreeMap<VertexId, u64> = BTreeMap::new();
    for &(v, d) in contributions {
        *sums.entry(v).or_default() += d;
    }
    for (&v, &d) in &sums {
        if d > 0 {
            boundary.set(v, d);
        }
    }
    sums.into_iter().collect()
}

/// Progress of one partition in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationLog {
    pub iteration: u64,
    pub partition: PartitionId,
    pub boundary: usize,
    pub edges: u64,
    pub k: usize,
}

pub struct ExpansionProcess {
    partition: PartitionId,
    num_partitions: usize,
    placement: Placement,
    lambda: f64,
    cap: f64,
    total_edges: u64,
    boundary: Boundary,
    edges: u64,
    last_batch: u64,
    rng: ChaCha8Rng,
    script: VecDeque<VertexId>,
    terminated: bool,
    selected: usize,
    last_update: Vec<(VertexId, u64)>,
    log: Vec<IterationLog>,
}

impl ExpansionProcess {
    pub fn new(
        partition: PartitionId,
        placement: Placement,
        config: &ExpansionConfig,
        total_edges: usize,
        script: Vec<VertexId>,
    ) -> Self {
        let num_partitions = placement.num_procs();
        ExpansionProcess {
            partition,
            num_partitions,
            placement,
            lambda: config.lambda,
            cap: config.cap(total_edges, num_partitions),
            total_edges: total_edges as u64,
            boundary: Boundary::new(),
            edges: 0,
            last_batch: 0,
            rng: ChaCha8Rng::seed_from_u64(mix64(config.seed) ^ partition as u64),
            script: script.into(),
            terminated: false,
            selected: 0,
            last_update: Vec::new(),
            log: Vec::new(),
        }
    }

    pub fn partition(&self) -> PartitionId {
        self.partition
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    /// Edges received in the last iteration that added any.
    pub fn last_batch(&self) -> u64 {
        self.last_batch
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// Summed boundary scores received in the latest update phase.
    pub fn last_update(&self) -> &[(VertexId, u64)] {
        &self.last_update
    }

    pub fn log(&self) -> &[IterationLog] {
        &self.log
    }

    fn select(&mut self, info: &StepInfo, out: &mut Outbox) -> Result<()> {
        let boundary_len = self.boundary.len();
        if !self.boundary.is_empty() {
            let picked = select_expansion_vertices(&mut self.boundary, self.lambda);
            self.selected = picked.len();
            let mut per_target: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
            for v in picked {
                for r in self.placement.replicas(v) {
                    per_target.entry(r).or_default().push(v);
                }
            }
            for (r, vertices) in per_target {
                out.send(
                    ProcessId::allocation(r),
                    Message::VertexMulticast {
                        partition: self.partition,
                        vertices,
                    },
                )?;
            }
        } else if let Some(v) = self.script.pop_front() {
            self.selected = 1;
            let targets: Vec<ProcessId> = self
                .placement
                .replicas(v)
                .into_iter()
                .map(ProcessId::allocation)
                .collect();
            out.multicast(
                &targets,
                Message::VertexMulticast {
                    partition: self.partition,
                    vertices: vec![v],
                },
            )?;
        } else {
            self.selected = 1;
            out.send(
                ProcessId::allocation(self.partition),
                Message::RandomRequest {
                    partition: self.partition,
                    token: self.rng.gen(),
                    hops: 0,
                },
            )?;
        }
        self.log.push(IterationLog {
            iteration: info.iteration,
            partition: self.partition,
            boundary: boundary_len,
            edges: self.edges,
            k: self.selected,
        });
        Ok(())
    }
}

impl Actor for ExpansionProcess {
    fn id(&self) -> ProcessId {
        ProcessId::expansion(self.partition)
    }

    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> Result<StepOutcome> {
        match info.phase {
            Phase::Select => {
                if let Some(env) = inbox.first() {
                    return Err(unexpected(self.id(), env, info));
                }
                if !self.terminated {
                    self.select(info, out)?;
                }
            }
            Phase::Update => {
                let mut contributions = Vec::new();
                let mut received = 0u64;
                for env in inbox {
                    match env.msg {
                        Message::NewBoundary { partition, entries }
                            if partition == self.partition =>
                        {
                            contributions.extend(entries);
                        }
                        Message::NewEdges { partition, edges } if partition == self.partition => {
                            received += edges.len() as u64;
                        }
                        _ => return Err(unexpected(self.id(), &env, info)),
                    }
                }
                if self.terminated && (received > 0 || !contributions.is_empty()) {
                    return Err(Error::Protocol(format!(
                        "{} received allocation results after it stopped",
                        self.id()
                    )));
                }
                self.last_update = update_boundary(&mut self.boundary, &contributions);
                self.edges += received;
                if received > 0 {
                    self.last_batch = received;
                }
                let everyone: Vec<ProcessId> = (0..self.num_partitions as u32)
                    .map(ProcessId::expansion)
                    .collect();
                out.multicast(
                    &everyone,
                    Message::GatherCount {
                        count: self.edges,
                        live: !self.terminated,
                    },
                )?;
            }
            Phase::Check => {
                let mut from = vec![false; self.num_partitions];
                for env in &inbox {
                    match env.msg {
                        Message::GatherCount { .. } => from[env.sender.index as usize] = true,
                        _ => return Err(unexpected(self.id(), env, info)),
                    }
                }
                let missing: Vec<String> = from
                    .iter()
                    .enumerate()
                    .filter(|(_, &seen)| !seen)
                    .map(|(i, _)| ProcessId::expansion(i as u32).to_string())
                    .collect();
                if !missing.is_empty() {
                    return Ok(StepOutcome::Stalled {
                        reason: format!("waiting for edge counts from {}", missing.join(", ")),
                    });
                }
                let total = all_gather_sum(&inbox, info.iteration)?;
                if !self.terminated && (self.edges as f64 > self.cap || total >= self.total_edges) {
                    self.terminated = true;
                    let allocators: Vec<ProcessId> = (0..self.num_partitions as u32)
                        .map(ProcessId::allocation)
                        .collect();
                    out.multicast(
                        &allocators,
                        Message::Retire {
                            partition: self.partition,
                        },
                    )?;
                }
                return Ok(StepOutcome::Arrived {
                    vote: self.terminated,
                });
            }
            _ => {
                if let Some(env) = inbox.first() {
                    return Err(unexpected(self.id(), env, info));
                }
            }
        }
        Ok(StepOutcome::Arrived { vote: true })
    }
}

fn unexpected(me: ProcessId, env: &Envelope, info: &StepInfo) -> Error {
    Error::Protocol(format!(
        "{me} received {} from {} in phase {}",
        env.msg.variant(),
        env.sender,
        info.phase
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary(entries: &[(VertexId, u64)]) -> Boundary {
        let mut b = Boundary::new();
        for &(v, d) in entries {
            b.set(v, d);
        }
        b
    }

    #[test]
    fn full_lambda_takes_everything() {
        let mut b = boundary(&[(3, 1), (7, 2)]);
        assert_eq!(select_expansion_vertices(&mut b, 1.0), vec![3, 7]);
        assert!(b.is_empty());
    }

    #[test]
    fn ceiling_rounds_up() {
        let mut b = boundary(&[(3, 1), (7, 2), (9, 5)]);
        assert_eq!(select_k(3, 0.34), 2);
        assert_eq!(select_expansion_vertices(&mut b, 0.34), vec![3, 7]);
        assert_eq!(b.entries().collect::<Vec<_>>(), vec![(9, 5)]);
    }

    #[test]
    fn ties_go_to_lower_id() {
        let mut b = boundary(&[(5, 2), (2, 2)]);
        assert_eq!(b.pop_k(1), vec![(2, 2)]);
        assert_eq!(select_k(0, 0.1), 1);
        assert_eq!(select_k(10, 0.01), 1);
    }

    #[test]
    fn zero_score_is_skipped() {
        let mut b = Boundary::new();
        update_boundary(&mut b, &[(4, 0)]);
        assert!(b.is_empty());
    }

    #[test]
    fn contributions_are_summed() {
        let mut b = Boundary::new();
        let sums = update_boundary(&mut b, &[(4, 2), (1, 1), (4, 3)]);
        assert_eq!(sums, vec![(1, 1), (4, 5)]);
        assert_eq!(b.score(4), Some(5));
        assert_eq!(b.len(), 2);
        update_boundary(&mut b, &[(4, 1)]);
        assert_eq!(b.score(4), Some(1));
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn config_validation() {
        assert!(ExpansionConfig::default().validate().is_ok());
        let bad = |alpha, lambda| {
            ExpansionConfig {
                alpha,
                lambda,
                ..Default::default()
            }
            .validate()
            .is_err()
        };
        assert!(bad(0.9, 0.1));
        assert!(bad(1.1, 0.0));
        assert!(bad(1.1, 1.5));
        assert!(!bad(1.0, 1.0));
    }
}
