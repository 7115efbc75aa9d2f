//! Bulk-synchronous message passing between expansion and allocation processes.
//!
//! Execution proceeds in supersteps. During a superstep every process reads
//! the messages addressed to it in the previous superstep, computes, and
//! queues outgoing messages; a barrier closes the superstep. Each barrier also
//! reduces a boolean vote (logical AND) so that all processes agree on the
//! control flow without a coordinator.
//!
//! Two executors drive the same [`Actor`]s: a deterministic single-threaded
//! one, which steps processes in id order, and a parallel one with one thread
//! per group of colocated processes. Mailboxes are drained in
//! `(sender, enqueue order)` order in both.

use std::fmt;
use std::sync::{Condvar, Mutex};

use crate::graph::{EdgeId, PartitionId, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcessKind {
    Expansion,
    Allocation,
}

/// Address of one process. Expansion and allocation processes with the same
/// index are colocated on one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProcessId {
    pub kind: ProcessKind,
    pub index: u32,
}

impl ProcessId {
    pub fn expansion(index: u32) -> Self {
        ProcessId {
            kind: ProcessKind::Expansion,
            index,
        }
    }

    pub fn allocation(index: u32) -> Self {
        ProcessId {
            kind: ProcessKind::Allocation,
            index,
        }
    }

    /// Dense slot in `0..2|P|`: expansion processes first.
    pub fn slot(&self, num_procs: usize) -> usize {
        match self.kind {
            ProcessKind::Expansion => self.index as usize,
            ProcessKind::Allocation => num_procs + self.index as usize,
        }
    }

    pub fn from_slot(slot: usize, num_procs: usize) -> Self {
        if slot < num_procs {
            ProcessId::expansion(slot as u32)
        } else {
            ProcessId::allocation((slot - num_procs) as u32)
        }
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ProcessKind::Expansion => 'E',
            ProcessKind::Allocation => 'A',
        };
        write!(f, "{k}{}", self.index)
    }
}

/// Superstep kinds of one expansion iteration, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Select,
    RandomPick,
    OneHop,
    Sync,
    TwoHop,
    Report,
    Update,
    Check,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Select => "select",
            Phase::RandomPick => "random-pick",
            Phase::OneHop => "one-hop",
            Phase::Sync => "sync",
            Phase::TwoHop => "two-hop",
            Phase::Report => "report",
            Phase::Update => "update",
            Phase::Check => "check",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Protocol payloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    /// Expansion request: claim the unallocated edges of `vertices` for `partition`.
    VertexMulticast {
        partition: PartitionId,
        vertices: Vec<VertexId>,
    },
    /// Ask an allocator to pick a random vertex with unallocated edges on
    /// behalf of `partition`; forwarded to the next allocator when it has none.
    RandomRequest {
        partition: PartitionId,
        token: u64,
        hops: u32,
    },
    /// Newly appended vertex partition tags, sent to the vertex's replicas.
    BoundarySync { pairs: Vec<(VertexId, PartitionId)> },
    /// New boundary vertices of `partition` with this allocator's share of
    /// their remaining degree.
    NewBoundary {
        partition: PartitionId,
        entries: Vec<(VertexId, u64)>,
    },
    /// Edges claimed for `partition` this iteration.
    NewEdges {
        partition: PartitionId,
        edges: Vec<EdgeId>,
    },
    /// Contribution to the all-gather of allocated edge counts.
    GatherCount { count: u64, live: bool },
    /// `partition` stopped expanding; exclude it from two-hop claims.
    Retire { partition: PartitionId },
}

impl Message {
    pub fn variant(&self) -> &'static str {
        match self {
            Message::VertexMulticast { .. } => "VertexMulticast",
            Message::RandomRequest { .. } => "RandomRequest",
            Message::BoundarySync { .. } => "BoundarySync",
            Message::NewBoundary { .. } => "NewBoundary",
            Message::NewEdges { .. } => "NewEdges",
            Message::GatherCount { .. } => "GatherCount",
            Message::Retire { .. } => "Retire",
        }
    }

    /// Number of payload items.
    pub fn size(&self) -> usize {
        match self {
            Message::VertexMulticast { vertices, .. } => vertices.len(),
            Message::BoundarySync { pairs } => pairs.len(),
            Message::NewBoundary { entries, .. } => entries.len(),
            Message::NewEdges { edges, .. } => edges.len(),
            Message::RandomRequest { .. }
            | Message::GatherCount { .. }
            | Message::Retire { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub iteration: u64,
    pub superstep: u64,
    pub phase: Phase,
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub seq: u64,
    pub msg: Message,
}

/// Position in the execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    pub iteration: u64,
    pub superstep: u64,
    pub phase: Phase,
    /// Repetition count of `phase` within the iteration.
    pub round: u32,
}

/// Decides the next superstep from the reduced vote of the current one.
/// Every worker evaluates its own copy, so this must be a pure function.
pub trait Plan: Sync {
    fn start(&self) -> StepInfo;
    fn next(&self, current: &StepInfo, all_voted: bool) -> Option<StepInfo>;
}

pub enum StepOutcome {
    /// The process reached the barrier with this vote.
    Arrived { vote: bool },
    /// The process cannot finish the superstep (it is waiting for input that
    /// was never sent).
    Stalled { reason: String },
}

/// A process driven by an executor.
pub trait Actor: Send {
    fn id(&self) -> ProcessId;
    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> Result<StepOutcome>;
}

/// Messages queued by one process during one superstep.
#[derive(Debug)]
pub struct Outbox {
    sender: ProcessId,
    num_procs: usize,
    queued: Vec<(ProcessId, Message)>,
}

impl Outbox {
    pub fn new(sender: ProcessId, num_procs: usize) -> Self {
        Outbox {
            sender,
            num_procs,
            queued: Vec::new(),
        }
    }

    pub fn sender(&self) -> ProcessId {
        self.sender
    }

    pub fn send(&mut self, to: ProcessId, msg: Message) -> Result<()> {
        if to.index as usize >= self.num_procs {
            return Err(Error::UnknownProcess(to));
        }
        self.queued.push((to, msg));
        Ok(())
    }

    /// Enqueues `msg` once per distinct target.
    pub fn multicast(&mut self, targets: &[ProcessId], msg: Message) -> Result<()> {
        if targets.is_empty() {
            return Err(Error::Protocol(format!(
                "{} multicast {} with no targets",
                self.sender,
                msg.variant()
            )));
        }
        let mut targets = targets.to_vec();
        targets.sort_unstable();
        targets.dedup();
        if let Some(bad) = targets.iter().find(|t| t.index as usize >= self.num_procs) {
            return Err(Error::UnknownProcess(*bad));
        }
        let last = targets.pop().unwrap();
        for t in targets {
            self.queued.push((t, msg.clone()));
        }
        self.queued.push((last, msg));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.queued.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queued.is_empty()
    }
}

/// One delivered message, as written to the trace log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub iteration: u64,
    pub superstep: u64,
    pub phase: Phase,
    pub sender: ProcessId,
    pub receiver: ProcessId,
    pub seq: u64,
    pub variant: &'static str,
    pub size: usize,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.iteration, self.phase, self.sender, self.receiver, self.variant, self.size
        )
    }
}

/// Double-buffered mailboxes: messages posted in superstep `s` land in buffer
/// `(s + 1) % 2` and are drained in superstep `s + 1`, so senders and readers
/// of the same superstep never touch the same buffer.
pub struct Network {
    num_procs: usize,
    buffers: [Vec<Mutex<Vec<Envelope>>>; 2],
    trace: Option<Mutex<Vec<TraceRecord>>>,
}

impl Network {
    pub fn new(num_procs: usize, trace: bool) -> Self {
        let boxes = || (0..2 * num_procs).map(|_| Mutex::new(Vec::new())).collect();
        Network {
            num_procs,
            buffers: [boxes(), boxes()],
            trace: trace.then(|| Mutex::new(Vec::new())),
        }
    }

    pub fn num_procs(&self) -> usize {
        self.num_procs
    }

    /// Moves the contents of `out` into the receivers' mailboxes.
    pub fn post(&self, info: &StepInfo, out: Outbox) {
        let buffer = &self.buffers[((info.superstep + 1) % 2) as usize];
        for (seq, (receiver, msg)) in out.queued.into_iter().enumerate() {
            let env = Envelope {
                iteration: info.iteration,
                superstep: info.superstep,
                phase: info.phase,
                sender: out.sender,
                receiver,
                seq: seq as u64,
                msg,
            };
            buffer[receiver.slot(self.num_procs)]
                .lock()
                .unwrap()
                .push(env);
        }
    }

    /// Drains the mailbox of `receiver` for superstep `info`, ordered by
    /// sender slot and enqueue order.
    pub fn deliver(&self, info: &StepInfo, receiver: ProcessId) -> Result<Vec<Envelope>> {
        let slot = receiver.slot(self.num_procs);
        let mut inbox = std::mem::take(
            &mut *self.buffers[(info.superstep % 2) as usize][slot]
                .lock()
                .unwrap(),
        );
        inbox.sort_by_key(|e| (e.sender.slot(self.num_procs), e.seq));
        if let Some(bad) = inbox.iter().find(|e| e.superstep + 1 != info.superstep) {
            return Err(Error::Protocol(format!(
                "{} sent {} in superstep {} ({}), delivered to {} in superstep {} ({})",
                bad.sender,
                bad.msg.variant(),
                bad.superstep,
                bad.phase,
                receiver,
                info.superstep,
                info.phase
            )));
        }
        if let Some(trace) = &self.trace {
            let mut trace = trace.lock().unwrap();
            trace.extend(inbox.iter().map(|e| TraceRecord {
                iteration: info.iteration,
                superstep: info.superstep,
                phase: info.phase,
                sender: e.sender,
                receiver,
                seq: e.seq,
                variant: e.msg.variant(),
                size: e.msg.size(),
            }));
        }
        Ok(inbox)
    }

    /// Number of undelivered messages.
    pub fn pending(&self) -> usize {
        self.buffers
            .iter()
            .flatten()
            .map(|m| m.lock().unwrap().len())
            .sum()
    }

    /// Removes and returns every undelivered message.
    pub fn drain(&self) -> Vec<Envelope> {
        let n = self.num_procs;
        let mut out: Vec<Envelope> = self
            .buffers
            .iter()
            .flatten()
            .flat_map(|m| std::mem::take(&mut *m.lock().unwrap()))
            .collect();
        out.sort_by_key(|e| (e.superstep, e.receiver.slot(n), e.sender.slot(n), e.seq));
        out
    }

    /// Recorded deliveries in canonical order (superstep, receiver, sender,
    /// enqueue order), independent of thread timing.
    pub fn take_trace(&self) -> Vec<TraceRecord> {
        let Some(trace) = &self.trace else {
            return Vec::new();
        };
        let mut records = std::mem::take(&mut *trace.lock().unwrap());
        let n = self.num_procs;
        records.sort_by_key(|r| (r.superstep, r.receiver.slot(n), r.sender.slot(n), r.seq));
        records
    }
}

/// Sums the `GatherCount` contributions in `inbox`. Every contribution must
/// come from `iteration`.
pub fn all_gather_sum(inbox: &[Envelope], iteration: u64) -> Result<u64> {
    let mut sum = 0u64;
    for env in inbox {
        if let Message::GatherCount { count, .. } = env.msg {
            if env.iteration != iteration {
                return Err(Error::Protocol(format!(
                    "gather contribution from {} belongs to iteration {}, expected {iteration}",
                    env.sender, env.iteration
                )));
            }
            sum += count;
        }
    }
    Ok(sum)
}

/// Reusable barrier for a fixed set of parties that also ANDs their votes.
/// All parties of one generation must report the same superstep.
pub struct PhaseBarrier {
    parties: usize,
    state: Mutex<BarrierState>,
    cv: Condvar,
}

struct BarrierState {
    arrived: usize,
    generation: u64,
    superstep: Option<u64>,
    vote: bool,
    result: bool,
    aborted: Option<String>,
}

impl PhaseBarrier {
    pub fn new(parties: usize) -> Self {
        PhaseBarrier {
            parties,
            state: Mutex::new(BarrierState {
                arrived: 0,
                generation: 0,
                superstep: None,
                vote: true,
                result: true,
                aborted: None,
            }),
            cv: Condvar::new(),
        }
    }

    /// Blocks until all parties arrive; returns the AND of their votes.
    pub fn wait(&self, superstep: u64, vote: bool) -> Result<bool> {
        let mut st = self.state.lock().unwrap();
        if let Some(reason) = &st.aborted {
            return Err(Error::Protocol(format!("barrier aborted: {reason}")));
        }
        match st.superstep {
            Some(s) if s != superstep => {
                let reason = format!("superstep {superstep} arrived while barrier waits for {s}");
                st.aborted = Some(reason.clone());
                self.cv.notify_all();
                return Err(Error::Protocol(reason));
            }
            _ => st.superstep = Some(superstep),
        }
        st.vote &= vote;
        st.arrived += 1;
        if st.arrived == self.parties {
            st.result = st.vote;
            st.vote = true;
            st.arrived = 0;
            st.superstep = None;
            st.generation += 1;
            self.cv.notify_all();
            return Ok(st.result);
        }
        let generation = st.generation;
        while st.generation == generation && st.aborted.is_none() {
            st = self.cv.wait(st).unwrap();
        }
        if st.generation != generation {
            Ok(st.result)
        } else {
            Err(Error::Protocol(format!(
                "barrier aborted: {}",
                st.aborted.as_deref().unwrap_or_default()
            )))
        }
    }

    /// Wakes every waiter with an error; later arrivals fail immediately.
    pub fn abort(&self, reason: impl Into<String>) {
        let mut st = self.state.lock().unwrap();
        st.aborted.get_or_insert(reason.into());
        self.cv.notify_all();
    }
}

/// How processes are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    /// One thread steps every process in slot order.
    Deterministic,
    /// Colocated process pairs are spread over `workers` threads.
    Parallel { workers: usize },
}

fn step_one<A: Actor>(actor: &mut A, info: &StepInfo, network: &Network) -> Result<bool> {
    let id = actor.id();
    let inbox = network.deliver(info, id)?;
    let mut out = Outbox::new(id, network.num_procs());
    match actor.step(info, inbox, &mut out)? {
        StepOutcome::Arrived { vote } => {
            network.post(info, out);
            Ok(vote)
        }
        StepOutcome::Stalled { reason } => Err(Error::Deadlock {
            iteration: info.iteration,
            phase: info.phase,
            process: id,
            reason,
        }),
    }
}

/// Runs `actors` to completion on the calling thread. `observe` sees every
/// process after each superstep. Returns the last superstep executed.
pub fn run_deterministic<A: Actor>(
    actors: &mut [A],
    plan: &impl Plan,
    network: &Network,
    mut observe: impl FnMut(&StepInfo, &[A]) -> Result<()>,
) -> Result<StepInfo> {
    let mut info = plan.start();
    loop {
        let mut all = true;
        for actor in actors.iter_mut() {
            all &= step_one(actor, &info, network)?;
        }
        observe(&info, actors)?;
        match plan.next(&info, all) {
            Some(next) => info = next,
            None => return Ok(info),
        }
    }
}

/// Runs `actors` on `workers` threads. Actor `i` of machine `m` (its index)
/// runs on thread `m % workers`. Returns the actors in their original order.
pub fn run_parallel<A: Actor>(
    actors: Vec<A>,
    workers: usize,
    plan: &impl Plan,
    network: &Network,
) -> Result<(Vec<A>, StepInfo)> {
    let num = actors.len();
    let workers = workers.clamp(1, num.max(1));
    let mut groups: Vec<Vec<(usize, A)>> = (0..workers).map(|_| Vec::new()).collect();
    for (pos, actor) in actors.into_iter().enumerate() {
        let w = actor.id().index as usize % workers;
        groups[w].push((pos, actor));
    }
    let barrier = PhaseBarrier::new(workers);

    // per worker: its actors with their positions, last step, whether it raised the error
    type WorkerResult<A> = (Vec<(usize, A)>, Result<StepInfo>, bool);
    let results: Vec<WorkerResult<A>> = std::thread::scope(|scope| {
        let handles: Vec<_> = groups
            .into_iter()
            .map(|mut group| {
                let barrier = &barrier;
                scope.spawn(move || {
                    let mut info = plan.start();
                    loop {
                        let mut vote = true;
                        let stepped = group.iter_mut().try_for_each(|(_, actor)| {
                            vote &= step_one(actor, &info, network)?;
                            Ok::<(), Error>(())
                        });
                        if let Err(e) = stepped {
                            barrier.abort(e.to_string());
                            return (group, Err(e), true);
                        }
                        let all = match barrier.wait(info.superstep, vote) {
                            Ok(all) => all,
                            Err(e) => return (group, Err(e), false),
                        };
                        match plan.next(&info, all) {
                            Some(next) => info = next,
                            None => return (group, Ok(info), false),
                        }
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut first_cause = None;
    let mut other_err = None;
    let mut last = None;
    let mut slots: Vec<Option<A>> = (0..num).map(|_| None).collect();
    for (group, res, originated) in results {
        for (pos, actor) in group {
            slots[pos] = Some(actor);
        }
        match res {
            Ok(info) => last = Some(info),
            Err(e) if originated => {
                first_cause.get_or_insert(e);
            }
            Err(e) => {
                other_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_cause.or(other_err) {
        return Err(e);
    }
    let actors = slots.into_iter().map(|a| a.unwrap()).collect();
    Ok((actors, last.expect("at least one worker")))
}
