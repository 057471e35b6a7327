//! Round-synchronous CONGEST simulator.
//!
//! A run is a sequence of rounds. Round 0 calls [`VertexProgram::init`] at
//! every vertex; round `r >= 1` calls [`VertexProgram::on_round`] with the
//! messages sent in round `r - 1`. A directed edge carries at most one
//! message per round. The run ends after the first round at whose end every
//! vertex has halted; `Transcript::rounds` is the index of that round.

mod transcript;
mod tree;

pub use transcript::{RoutingStats, Transcript};
pub use tree::{bfs_build, broadcast, pipelined_convergecast, BfsTree};

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::rng::{vertex_stream, Stream};

/// Default payload bound in words.
pub const DEFAULT_WORDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub tag: u16,
    pub words: Vec<u64>,
}

impl Message {
    pub fn new(tag: u16, words: &[u64]) -> Self {
        Message {
            tag,
            words: words.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("bandwidth violation in round {round}: two messages on {from}->{to}")]
    Bandwidth {
        round: u64,
        from: VertexId,
        to: VertexId,
    },
    #[error("round {round}: {from} sent to non-neighbor {to}")]
    NotNeighbor {
        round: u64,
        from: VertexId,
        to: VertexId,
    },
    #[error("round {round}: message from {from} has {len} words, limit {limit}")]
    Oversized {
        round: u64,
        from: VertexId,
        len: usize,
        limit: usize,
    },
    #[error("round cap must be positive")]
    ZeroRoundCap,
}

/// What a handler can see and do during one round at one vertex.
pub struct Ctx<'a> {
    pub vertex: VertexId,
    pub round: u64,
    pub neighbors: &'a [VertexId],
    rng: &'a mut Stream,
    outbox: Vec<(VertexId, Message)>,
    halt: bool,
}

impl<'a> Ctx<'a> {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    pub fn send(&mut self, to: VertexId, msg: Message) {
        self.outbox.push((to, msg));
    }

    pub fn send_all(&mut self, msg: &Message) {
        for i in 0..self.neighbors.len() {
            self.outbox.push((self.neighbors[i], msg.clone()));
        }
    }

    pub fn halt(&mut self) {
        self.halt = true;
    }

    pub fn rng(&mut self) -> &mut Stream {
        self.rng
    }
}

/// A distributed algorithm. Handlers must depend only on their arguments and
/// the vertex's private stream; the engine may call them in any order.
pub trait VertexProgram: Sync {
    type State: Send + Sync;

    fn init(&self, ctx: &mut Ctx<'_>) -> Self::State;

    /// `inbox` is sorted by sender id.
    fn on_round(&self, state: &mut Self::State, ctx: &mut Ctx<'_>, inbox: &[(VertexId, Message)]);
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub round_cap: u64,
    pub words: usize,
    /// Phase label; also keys the per-vertex random streams.
    pub label: String,
}

impl RunConfig {
    pub fn new(seed: u64, label: &str) -> Self {
        RunConfig {
            seed,
            round_cap: 1_000_000,
            words: DEFAULT_WORDS,
            label: label.to_string(),
        }
    }

    pub fn with_round_cap(mut self, cap: u64) -> Self {
        self.round_cap = cap;
        self
    }
}

#[derive(Debug)]
pub struct RunOutcome<S> {
    pub states: Vec<S>,
    /// Round in which each vertex halted; `None` if it never did.
    pub halt_round: Vec<Option<u64>>,
    pub transcript: Transcript,
}

/// Host thread pool; size from `CONGEST_LAB_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = std::env::var("CONGEST_LAB_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&t| t > 0)
        {
            b = b.num_threads(t);
        }
        b.build().expect("thread pool")
    })
}

struct Slot<S> {
    state: Option<S>,
    rng: Stream,
    halted: bool,
}

pub fn run<P: VertexProgram>(
    g: &Graph,
    program: &P,
    cfg: &RunConfig,
) -> Result<RunOutcome<P::State>, RuntimeError> {
    if cfg.round_cap == 0 {
        return Err(RuntimeError::ZeroRoundCap);
    }
    let n = g.n();
    let mut transcript = Transcript::new(cfg.seed);
    let mut halt_round = vec![None; n];

    let mut slots: Vec<Slot<P::State>> = (0..n)
        .map(|v| Slot {
            state: None,
            rng: vertex_stream(cfg.seed, v, &cfg.label),
            halted: false,
        })
        .collect();

    // Round 0.
    let mut outboxes: Vec<Vec<(VertexId, Message)>> = pool().install(|| {
        slots
            .par_iter_mut()
            .enumerate()
            .map(|(v, slot)| {
                let mut ctx = Ctx {
                    vertex: v,
                    round: 0,
                    neighbors: g.neighbors(v),
                    rng: &mut slot.rng,
                    outbox: Vec::new(),
                    halt: false,
                };
                slot.state = Some(program.init(&mut ctx));
                slot.halted = ctx.halt;
                ctx.outbox
            })
            .collect()
    });
    for v in 0..n {
        if slots[v].halted {
            halt_round[v] = Some(0);
        }
    }

    let mut round = 0u64;
    loop {
        let inboxes = deliver(g, &mut outboxes, round, cfg, &mut transcript)?;
        if slots.iter().all(|s| s.halted) {
            break;
        }
        if round >= cfg.round_cap {
            transcript.round_cap_hit = true;
            break;
        }
        round += 1;
        outboxes = pool().install(|| {
            slots
                .par_iter_mut()
                .zip(inboxes.par_iter())
                .enumerate()
                .map(|(v, (slot, inbox))| {
                    if slot.halted {
                        return Vec::new();
                    }
                    let mut ctx = Ctx {
                        vertex: v,
                        round,
                        neighbors: g.neighbors(v),
                        rng: &mut slot.rng,
                        outbox: Vec::new(),
                        halt: false,
                    };
                    program.on_round(slot.state.as_mut().unwrap(), &mut ctx, inbox);
                    slot.halted = ctx.halt;
                    ctx.outbox
                })
                .collect()
        });
        for v in 0..n {
            if slots[v].halted && halt_round[v].is_none() {
                halt_round[v] = Some(round);
            }
        }
    }
    transcript.rounds = round;
    transcript.phases.insert(cfg.label.clone(), round);
    Ok(RunOutcome {
        states: slots.into_iter().map(|s| s.state.unwrap()).collect(),
        halt_round,
        transcript,
    })
}

/// Checks bandwidth and builds next-round inboxes (sorted by sender).
fn deliver(
    g: &Graph,
    outboxes: &mut [Vec<(VertexId, Message)>],
    round: u64,
    cfg: &RunConfig,
    transcript: &mut Transcript,
) -> Result<Vec<Vec<(VertexId, Message)>>, RuntimeError> {
    let mut inboxes: Vec<Vec<(VertexId, Message)>> = vec![Vec::new(); g.n()];
    for (from, out) in outboxes.iter_mut().enumerate() {
        if out.is_empty() {
            continue;
        }
        out.sort_by_key(|(to, _)| *to);
        for w in out.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(RuntimeError::Bandwidth {
                    round,
                    from,
                    to: w[0].0,
                });
            }
        }
        for (to, msg) in out.drain(..) {
            if !g.has_edge(from, to) {
                return Err(RuntimeError::NotNeighbor { round, from, to });
            }
            if msg.words.len() > cfg.words {
                return Err(RuntimeError::Oversized {
                    round,
                    from,
                    len: msg.words.len(),
                    limit: cfg.words,
                });
            }
            transcript.message_count += 1;
            transcript.channel_load = transcript.channel_load.max(1);
            inboxes[to].push((from, msg));
        }
    }
    // Senders are visited in increasing order, so each inbox is already sorted.
    Ok(inboxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    struct Flood;

    impl VertexProgram for Flood {
        type State = bool;

        fn init(&self, ctx: &mut Ctx<'_>) -> bool {
            if ctx.vertex == 0 {
                ctx.send_all(&Message::new(1, &[]));
                ctx.halt();
                return true;
            }
            false
        }

        fn on_round(&self, got: &mut bool, ctx: &mut Ctx<'_>, inbox: &[(VertexId, Message)]) {
            if !inbox.is_empty() {
                *got = true;
                let senders: Vec<_> = inbox.iter().map(|(s, _)| *s).collect();
                for i in 0..ctx.neighbors.len() {
                    let w = ctx.neighbors[i];
                    if !senders.contains(&w) {
                        ctx.send(w, Message::new(1, &[]));
                    }
                }
                ctx.halt();
            }
        }
    }

    struct DoubleSend;

    impl VertexProgram for DoubleSend {
        type State = ();

        fn init(&self, ctx: &mut Ctx<'_>) {
            if ctx.vertex == 0 {
                let w = ctx.neighbors[0];
                ctx.send(w, Message::new(0, &[1]));
                ctx.send(w, Message::new(0, &[2]));
            }
            ctx.halt();
        }

        fn on_round(&self, _: &mut (), _: &mut Ctx<'_>, _: &[(VertexId, Message)]) {}
    }

    #[test]
    fn flood_rounds() {
        let p5 = generate(&GeneratorSpec::Path { n: 5 }, 0).unwrap();
        let out = run(&p5, &Flood, &RunConfig::new(1, "flood")).unwrap();
        assert!(out.states.iter().all(|&b| b));
        assert_eq!(out.transcript.rounds, 4);
        assert_eq!(out.transcript.channel_load, 1);
        assert_eq!(out.halt_round, vec![Some(0), Some(1), Some(2), Some(3), Some(4)]);

        let k4 = generate(&GeneratorSpec::Clique { n: 4 }, 0).unwrap();
        assert_eq!(run(&k4, &Flood, &RunConfig::new(1, "flood")).unwrap().transcript.rounds, 1);
    }

    #[test]
    fn double_send_is_rejected() {
        let k2 = generate(&GeneratorSpec::Clique { n: 2 }, 0).unwrap();
        assert_eq!(
            run(&k2, &DoubleSend, &RunConfig::new(1, "x")).unwrap_err(),
            RuntimeError::Bandwidth { round: 0, from: 0, to: 1 }
        );
    }

    #[test]
    fn round_cap_is_flagged() {
        let p = generate(&GeneratorSpec::Path { n: 20 }, 0).unwrap();
        let out = run(&p, &Flood, &RunConfig::new(1, "flood").with_round_cap(5)).unwrap();
        assert!(out.transcript.round_cap_hit);
        assert_eq!(out.transcript.rounds, 5);
        assert_eq!(
            run(&p, &Flood, &RunConfig::new(1, "f").with_round_cap(0)).unwrap_err(),
            RuntimeError::ZeroRoundCap
        );
    }
}
