use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use dne::runtime::{
    all_gather_sum, run_deterministic, run_parallel, Actor, Envelope, Message, Network, Outbox,
    Phase, PhaseBarrier, Plan, ProcessId, StepInfo, StepOutcome, TraceRecord,
};
use dne::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CYCLE: [Phase; 4] = [Phase::Select, Phase::OneHop, Phase::Sync, Phase::Report];

struct Cycle {
    iterations: u64,
}

impl Plan for Cycle {
    fn start(&self) -> StepInfo {
        StepInfo {
            iteration: 0,
            superstep: 0,
            phase: CYCLE[0],
            round: 0,
        }
    }

    fn next(&self, cur: &StepInfo, _: bool) -> Option<StepInfo> {
        let pos = CYCLE.iter().position(|&p| p == cur.phase).unwrap();
        let (phase, iteration) = if pos + 1 == CYCLE.len() {
            (CYCLE[0], cur.iteration + 1)
        } else {
            (CYCLE[pos + 1], cur.iteration)
        };
        (iteration < self.iterations).then_some(StepInfo {
            iteration,
            superstep: cur.superstep + 1,
            phase,
            round: 0,
        })
    }
}

// Sends random traffic whose variant is fixed by the phase it will be read in.
struct Chatter {
    id: ProcessId,
    procs: u32,
    rng: ChaCha8Rng,
    // timing noise only; kept apart so traffic is the same with or without it
    jitter: Option<ChaCha8Rng>,
    sent: &'static AtomicU64,
    received: u64,
}

impl Actor for Chatter {
    fn id(&self) -> ProcessId {
        self.id
    }

    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> dne::Result<StepOutcome> {
        self.received += inbox.len() as u64;
        if let Some(j) = &mut self.jitter {
            if j.gen_bool(0.05) {
                std::thread::sleep(Duration::from_micros(j.gen_range(0..300)));
            }
        }
        let n = self.rng.gen_range(0..4);
        for _ in 0..n {
            let to = if self.rng.gen() {
                ProcessId::expansion(self.rng.gen_range(0..self.procs))
            } else {
                ProcessId::allocation(self.rng.gen_range(0..self.procs))
            };
            let msg = match info.phase {
                Phase::Select => Message::VertexMulticast {
                    partition: 0,
                    vertices: vec![1, 2],
                },
                Phase::OneHop => Message::BoundarySync {
                    pairs: vec![(3, 0)],
                },
                Phase::Sync if self.rng.gen() => Message::NewEdges {
                    partition: 0,
                    edges: vec![9],
                },
                Phase::Sync => Message::NewBoundary {
                    partition: 0,
                    entries: vec![(4, 1)],
                },
                _ => continue,
            };
            out.send(to, msg)?;
            self.sent.fetch_add(1, Ordering::Relaxed);
        }
        Ok(StepOutcome::Arrived { vote: true })
    }
}

fn chatters(procs: u32, seed: u64, jitter: bool, sent: &'static AtomicU64) -> Vec<Chatter> {
    (0..procs)
        .map(ProcessId::expansion)
        .chain((0..procs).map(ProcessId::allocation))
        .map(|id| Chatter {
            id,
            procs,
            rng: ChaCha8Rng::seed_from_u64(seed ^ (id.slot(procs as usize) as u64 * 7919)),
            jitter: jitter.then(|| ChaCha8Rng::seed_from_u64(id.slot(procs as usize) as u64)),
            sent,
            received: 0,
        })
        .collect()
}

fn expected_phase(variant: &str) -> Phase {
    match variant {
        "VertexMulticast" => Phase::OneHop,
        "BoundarySync" => Phase::Sync,
        _ => Phase::Report,
    }
}

/// Checks that each variant is read only in its phase and that, within an
/// iteration, phase groups are delivered in order.
fn validate_phase_order(trace: &[TraceRecord]) {
    let mut last: Option<(u64, u64)> = None;
    for r in trace {
        assert_eq!(r.phase, expected_phase(r.variant), "{r}");
        let rank = CYCLE.iter().position(|&p| p == r.phase).unwrap() as u64;
        if let Some(prev) = last {
            assert!((r.iteration, rank) >= prev, "{r} after {prev:?}");
        }
        last = Some((r.iteration, rank));
    }
}

#[test]
fn parallel_stress_keeps_phase_order_and_conserves_messages() {
    static SENT: AtomicU64 = AtomicU64::new(0);
    let procs = 16;
    let network = Network::new(procs as usize, true);
    let (actors, last) = run_parallel(
        chatters(procs, 5, true, &SENT),
        16,
        &Cycle { iterations: 100 },
        &network,
    )
    .unwrap();
    assert_eq!(last.iteration, 99);
    let trace = network.take_trace();
    validate_phase_order(&trace);
    let received: u64 = actors.iter().map(|a| a.received).sum();
    let sent = SENT.load(Ordering::Relaxed);
    assert!(sent > 1000);
    assert_eq!(received, sent);
    assert_eq!(trace.len() as u64, sent);
    assert_eq!(network.pending(), 0);
}

#[test]
fn deterministic_replay_and_parallel_agree() {
    static SENT: AtomicU64 = AtomicU64::new(0);
    let plan = Cycle { iterations: 20 };
    let trace = |parallel: bool| {
        let network = Network::new(6, true);
        if parallel {
            run_parallel(chatters(6, 9, true, &SENT), 3, &plan, &network).unwrap();
        } else {
            let mut actors = chatters(6, 9, false, &SENT);
            run_deterministic(&mut actors, &plan, &network, |_, _| Ok(())).unwrap();
        }
        network
            .take_trace()
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let first = trace(false);
    assert!(!first.is_empty());
    assert_eq!(first, trace(false));
    assert_eq!(first, trace(true));
}

struct Gather {
    id: ProcessId,
    procs: u32,
    local: u64,
    result: Option<u64>,
}

impl Actor for Gather {
    fn id(&self) -> ProcessId {
        self.id
    }

    fn step(
        &mut self,
        info: &StepInfo,
        inbox: Vec<Envelope>,
        out: &mut Outbox,
    ) -> dne::Result<StepOutcome> {
        if info.superstep == 0 {
            let all: Vec<ProcessId> = (0..self.procs).map(ProcessId::expansion).collect();
            out.multicast(
                &all,
                Message::GatherCount {
                    count: self.local,
                    live: true,
                },
            )?;
        } else {
            self.result = Some(all_gather_sum(&inbox, info.iteration)?);
        }
        Ok(StepOutcome::Arrived { vote: true })
    }
}

struct TwoSteps;

impl Plan for TwoSteps {
    fn start(&self) -> StepInfo {
        StepInfo {
            iteration: 0,
            superstep: 0,
            phase: Phase::Update,
            round: 0,
        }
    }

    fn next(&self, cur: &StepInfo, _: bool) -> Option<StepInfo> {
        (cur.superstep == 0).then_some(StepInfo {
            superstep: 1,
            phase: Phase::Check,
            ..*cur
        })
    }
}

fn gather(locals: &[u64]) -> Vec<u64> {
    let procs = locals.len() as u32;
    let actors: Vec<Gather> = locals
        .iter()
        .enumerate()
        .map(|(i, &local)| Gather {
            id: ProcessId::expansion(i as u32),
            procs,
            local,
            result: None,
        })
        .collect();
    let network = Network::new(locals.len(), false);
    let (actors, _) = run_parallel(actors, locals.len(), &TwoSteps, &network).unwrap();
    actors.iter().map(|a| a.result.unwrap()).collect()
}

#[test]
fn gather_sum_examples() {
    assert_eq!(gather(&[0; 5]), vec![0; 5]);
    let p = 12u64;
    let locals: Vec<u64> = (1..=p).collect();
    assert_eq!(gather(&locals), vec![p * (p + 1) / 2; p as usize]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.gen_range(1..20);
        let locals: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1_000_000)).collect();
        let oracle: u64 = locals.iter().sum();
        assert!(gather(&locals).iter().all(|&s| s == oracle));
    }
}

struct Staller {
    id: ProcessId,
}

impl Actor for Staller {
    fn id(&self) -> ProcessId {
        self.id
    }

    fn step(
        &mut self,
        info: &StepInfo,
        _: Vec<Envelope>,
        _: &mut Outbox,
    ) -> dne::Result<StepOutcome> {
        if self.id == ProcessId::allocation(2) && info.superstep == 3 {
            return Ok(StepOutcome::Stalled {
                reason: "no input".into(),
            });
        }
        Ok(StepOutcome::Arrived { vote: true })
    }
}

#[test]
fn stalled_process_is_named() {
    let make = || -> Vec<Staller> {
        (0..4)
            .map(ProcessId::expansion)
            .chain((0..4).map(ProcessId::allocation))
            .map(|id| Staller { id })
            .collect()
    };
    let network = Network::new(4, false);
    let err = run_deterministic(&mut make(), &Cycle { iterations: 5 }, &network, |_, _| {
        Ok(())
    })
    .unwrap_err();
    match err {
        Error::Deadlock {
            process, iteration, ..
        } => {
            assert_eq!(process, ProcessId::allocation(2));
            assert_eq!(iteration, 0);
        }
        e => panic!("unexpected {e}"),
    }
    let network = Network::new(4, false);
    let err = run_parallel(make(), 4, &Cycle { iterations: 5 }, &network)
        .err()
        .unwrap();
    assert!(err.to_string().contains("A2"), "{err}");
}

#[test]
fn barrier_waits_for_late_party() {
    let barrier = PhaseBarrier::new(4);
    let waited: Vec<Duration> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4)
            .map(|i| {
                let b = &barrier;
                s.spawn(move || {
                    if i == 3 {
                        std::thread::sleep(Duration::from_millis(60));
                    }
                    let t = Instant::now();
                    b.wait(0, true).unwrap();
                    t.elapsed()
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for d in &waited[..3] {
        assert!(*d >= Duration::from_millis(40), "{d:?}");
    }
}

#[test]
fn multicast_to_every_allocator() {
    let mut out = Outbox::new(ProcessId::expansion(0), 8);
    let all: Vec<ProcessId> = (0..8).map(ProcessId::allocation).collect();
    out.multicast(&all, Message::Retire { partition: 0 })
        .unwrap();
    assert_eq!(out.len(), 8);
    let mut one = Outbox::new(ProcessId::expansion(0), 8);
    one.multicast(&all[3..4], Message::Retire { partition: 0 })
        .unwrap();
    assert_eq!(one.len(), 1);
}
