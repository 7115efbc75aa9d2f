//! Wires expansion and allocation processes together and runs them.

use std::time::Instant;

use crate::allocation::{final_leftover_sweep, AllocationProcess, AllocationShard, ClaimOrder};
use crate::expansion::{ExpansionConfig, ExpansionProcess, IterationLog};
use crate::graph::{EdgeId, Graph, PartitionId, VertexId};
use crate::metrics::{replica_limit, PartitionAssignment, UNASSIGNED};
use crate::placement::{Placement, ShardLayout};
use crate::runtime::{
    run_deterministic, run_parallel, Actor, Envelope, Message, Network, Outbox, Phase, Plan,
    ProcessId, Scheduler, StepInfo, StepOutcome, TraceRecord,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub num_partitions: usize,
    pub expansion: ExpansionConfig,
    pub scheduler: Scheduler,
    pub layout: ShardLayout,
    pub claim_order: ClaimOrder,
    /// Threads each allocator uses for its one-hop batch.
    pub claim_threads: usize,
    /// Record every delivery.
    pub trace: bool,
    /// Vertices each partition picks, in order, whenever its boundary is
    /// empty, before falling back to random picks.
    pub script: Option<Vec<Vec<VertexId>>>,
}

impl EngineConfig {
    pub fn new(num_partitions: usize) -> Self {
        EngineConfig {
            num_partitions,
            expansion: ExpansionConfig::default(),
            scheduler: Scheduler::Parallel {
                workers: num_partitions,
            },
            layout: ShardLayout::Grid,
            claim_order: ClaimOrder::Sequential,
            claim_threads: 1,
            trace: false,
            script: None,
        }
    }

    pub fn deterministic(mut self) -> Self {
        self.scheduler = Scheduler::Deterministic;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.expansion.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.expansion.alpha = alpha;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.expansion.lambda = lambda;
        self
    }
}

#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub assignment: PartitionAssignment,
    pub iterations: u64,
    /// Edges placed by the leftover sweep.
    pub leftover: usize,
    pub trace: Vec<TraceRecord>,
    pub log: Vec<IterationLog>,
    pub elapsed_ms: f64,
}

/// Superstep schedule of one iteration. Random-pick rounds repeat while a
/// request is still being forwarded; the run ends after the check phase in
/// which every expansion process has stopped.
#[derive(Debug, Clone, Copy)]
pub struct IterationPlan;

impl Plan for IterationPlan {
    fn start(&self) -> StepInfo {
        StepInfo {
            iteration: 0,
            superstep: 0,
            phase: Phase::Select,
            round: 0,
        }
    }

    fn next(&self, cur: &StepInfo, all_voted: bool) -> Option<StepInfo> {
        let (phase, round, iteration) = match cur.phase {
            Phase::Select => (Phase::RandomPick, 0, cur.iteration),
            Phase::RandomPick if !all_voted => (Phase::RandomPick, cur.round + 1, cur.iteration),
            Phase::RandomPick => (Phase::OneHop, 0, cur.iteration),
            Phase::OneHop => (Phase::Sync, 0, cur.iteration),
            Phase::Sync => (Phase::TwoHop, 0, cur.iteration),
            Phase::TwoHop => (Phase::Report, 0, cur.iteration),
            Phase::Report => (Phase::Update, 0, cur.iteration),
            Phase::Update => (Phase::Check, 0, cur.iteration),
            Phase::Check if all_voted => return None,
            Phase::Check => (Phase::Select, 0, cur.iteration + 1),
        };
        Some(StepInfo {
            iteration,
            superstep: cur.superstep + 1,
            phase,
            round,
        })
    }
}

/// A process of either kind.
pub enum Process {
    Expansion(ExpansionProcess),
    Allocation(AllocationProcess),
}

impl Actor for Process {
    fn id(&self) -> ProcessId {
        match self {
            Process::Expansion(e) => e.id(),
            Process::Allocation(a) => a.id(),
        }
    }

    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> Result<StepOutcome> {
        match self {
            Process::Expansion(e) => e.step(info, inbox, out),
            Process::Allocation(a) => a.step(info, inbox, out),
        }
    }
}

/// Read access to every process between supersteps (deterministic runs).
pub struct EngineView<'a> {
    pub info: &'a StepInfo,
    pub graph: &'a Graph,
    num_partitions: usize,
    procs: &'a [Process],
}

impl<'a> EngineView<'a> {
    pub fn expansions(&self) -> impl Iterator<Item = &'a ExpansionProcess> + 'a {
        self.procs.iter().filter_map(|p| match p {
            Process::Expansion(e) => Some(e),
            _ => None,
        })
    }

    pub fn allocators(&self) -> impl Iterator<Item = &'a AllocationProcess> + 'a {
        self.procs.iter().filter_map(|p| match p {
            Process::Allocation(a) => Some(a),
            _ => None,
        })
    }

    pub fn num_partitions(&self) -> usize {
        self.num_partitions
    }

    /// Current owner of every edge, `UNASSIGNED` where open.
    pub fn owners(&self) -> Vec<PartitionId> {
        collect_owners(self.graph, self.allocators().map(|a| a.shard()))
    }
}

fn collect_owners<'s>(
    graph: &Graph,
    shards: impl Iterator<Item = &'s AllocationShard>,
) -> Vec<PartitionId> {
    let mut owners = vec![UNASSIGNED; graph.edge_count()];
    for s in shards {
        for (e, p) in s.owners() {
            owners[e as usize] = p;
        }
    }
    owners
}

/// `Σ_p |V(E_p)|` over the assigned edges of a partial owner map.
pub fn replicas_of(graph: &Graph, owners: &[PartitionId]) -> u64 {
    let mut pairs: Vec<(VertexId, PartitionId)> = graph
        .edges()
        .iter()
        .zip(owners)
        .filter(|(_, &p)| p != UNASSIGNED)
        .flat_map(|(e, &p)| [(e.src, p), (e.dst, p)])
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.len() as u64
}

fn build(graph: &Graph, config: &EngineConfig) -> Result<(Vec<Process>, Placement)> {
    let p = config.num_partitions;
    if p == 0 {
        return Err(Error::InvalidParameter(
            "need at least one partition".into(),
        ));
    }
    if p > u32::MAX as usize / 2 {
        return Err(Error::InvalidParameter(format!("too many partitions: {p}")));
    }
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    config.expansion.validate()?;
    if let Some(script) = &config.script {
        if script.len() != p {
            return Err(Error::InvalidParameter(format!(
                "script has {} entries for {p} partitions",
                script.len()
            )));
        }
        if let Some(&v) = script
            .iter()
            .flatten()
            .find(|&&v| v as usize >= graph.vertex_count())
        {
            return Err(Error::VertexOutOfRange {
                vertex: v as u64,
                vertex_count: graph.vertex_count(),
            });
        }
    }
    let placement = Placement::new(config.layout, p, config.expansion.seed)?;
    let shards = placement.shards(graph);
    let mut procs = Vec::with_capacity(2 * p);
    for i in 0..p {
        let script = config
            .script
            .as_ref()
            .map(|s| s[i].clone())
            .unwrap_or_default();
        procs.push(Process::Expansion(ExpansionProcess::new(
            i as PartitionId,
            placement,
            &config.expansion,
            graph.edge_count(),
            script,
        )));
    }
    for (i, edges) in shards.iter().enumerate() {
        let shard = AllocationShard::from_graph(graph, edges, p);
        procs.push(Process::Allocation(AllocationProcess::new(
            i as u32,
            shard,
            placement,
            config.claim_order,
            config.claim_threads,
        )));
    }
    Ok((procs, placement))
}

/// Partitions `graph`.
pub fn run(graph: &Graph, config: &EngineConfig) -> Result<EngineOutput> {
    match config.scheduler {
        Scheduler::Deterministic => run_observed(graph, config, |_| Ok(())),
        Scheduler::Parallel { workers } => {
            let start = Instant::now();
            let (procs, _) = build(graph, config)?;
            let network = Network::new(config.num_partitions, config.trace);
            let (procs, last) = run_parallel(procs, workers, &IterationPlan, &network)?;
            finish(graph, config, procs, last, &network, start)
        }
    }
}

/// Partitions `graph` with the deterministic scheduler, calling `observe`
/// after every superstep.
pub fn run_observed(
    graph: &Graph,
    config: &EngineConfig,
    mut observe: impl FnMut(&EngineView) -> Result<()>,
) -> Result<EngineOutput> {
    let start = Instant::now();
    let (mut procs, _) = build(graph, config)?;
    let network = Network::new(config.num_partitions, config.trace);
    let p = config.num_partitions;
    let last = run_deterministic(&mut procs, &IterationPlan, &network, |info, procs| {
        observe(&EngineView {
            info,
            graph,
            num_partitions: p,
            procs,
        })
    })?;
    finish(graph, config, procs, last, &network, start)
}

fn finish(
    graph: &Graph,
    config: &EngineConfig,
    procs: Vec<Process>,
    last: StepInfo,
    network: &Network,
    start: Instant,
) -> Result<EngineOutput> {
    // the final check phase announces retirements nobody needs any more
    if let Some(env) = network
        .drain()
        .into_iter()
        .find(|e| !matches!(e.msg, Message::Retire { .. }))
    {
        return Err(Error::Protocol(format!(
            "{} from {} to {} left undelivered",
            env.msg.variant(),
            env.sender,
            env.receiver
        )));
    }
    let p = config.num_partitions;
    let mut expansions = Vec::with_capacity(p);
    let mut allocators = Vec::with_capacity(p);
    for proc in procs {
        match proc {
            Process::Expansion(e) => expansions.push(e),
            Process::Allocation(a) => allocators.push(a),
        }
    }

    let shards: Vec<&AllocationShard> = allocators.iter().map(|a| a.shard()).collect();
    let mut sizes = vec![0u64; p];
    for s in &shards {
        for (part, size) in sizes.iter_mut().enumerate() {
            *size += s.local_count(part as PartitionId);
        }
    }
    for e in &expansions {
        let part = e.partition() as usize;
        if sizes[part] != e.edge_count() {
            return Err(Error::Protocol(format!(
                "partition {part} counted {} edges, allocators hold {}",
                e.edge_count(),
                sizes[part]
            )));
        }
        if e.edge_count() as f64 > e.cap() + e.last_batch() as f64 {
            return Err(Error::CapExceeded {
                partition: part as PartitionId,
                size: e.edge_count(),
                cap: e.cap(),
                last_batch: e.last_batch(),
            });
        }
    }

    let leftover = final_leftover_sweep(&shards, &mut sizes).len();
    let owners = collect_owners(graph, shards.iter().copied());
    let replicas = replicas_of(graph, &owners);
    let limit = replica_limit(graph.vertex_count(), graph.edge_count(), p);
    if replicas > limit {
        return Err(Error::BoundViolation { replicas, limit });
    }
    let assignment = PartitionAssignment::from_owners(graph, p, owners)?;

    let mut log: Vec<IterationLog> = expansions
        .iter()
        .flat_map(|e| e.log().iter().copied())
        .collect();
    log.sort_by_key(|l| (l.iteration, l.partition));
    Ok(EngineOutput {
        assignment,
        iterations: last.iteration + 1,
        leftover,
        trace: network.take_trace(),
        log,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Edge ids each partition received, for inspection.
pub fn partition_edges(assignment: &PartitionAssignment) -> Vec<Vec<EdgeId>> {
    let mut out = vec![Vec::new(); assignment.num_partitions()];
    for (e, &p) in assignment.owners().iter().enumerate() {
        out[p as usize].push(e as EdgeId);
    }
    out
}
