//! Truncated lazy walks, sweep cuts and the distributed Nibble search.
//!
//! [`distributed_nibble`] follows the loop order of the algorithm: scale `b`,
//! then step `t`, then each sampled source in ascending id, then ladder step
//! `x`; the first prefix with conductance at most `12 phi` is returned.
//!
//! Two things keep desk-scale runs tractable without changing the answer:
//! a source whose walk reached a numerical fixed point (L1 change at most
//! [`FIXED_POINT_TOL`]) keeps that distribution for the remaining steps, and a
//! source whose walk was never truncated at some scale is not re-walked at
//! later scales (smaller `eps` cannot truncate it either, so every sweep would
//! repeat). The rounds those steps would have taken are still charged.

mod params;
mod sample;
mod sweep;
mod walk;

pub use params::WalkParams;
pub use sample::{sample_by_degree, SampleMode, ZeroVolume};
pub use sweep::{ladder, ladder_top, qualifies, sweep_cut, sweep_order, SweepPrefix};
pub use walk::{lazy_step, truncate, truncated_walk, Distribution};

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{conductance, Cut, CutSummary, Graph, VertexId, VertexSet};
use crate::rng::{seeded, vertex_stream, Stream};
use crate::runtime::{
    bfs_build, broadcast, pipelined_convergecast, run, Ctx, Message, RunConfig, RuntimeError,
    Transcript, VertexProgram,
};
use sweep::{sort_by_rho, sweep_cut_fast, Ladder};
use walk::WalkState;

/// A walk whose L1 change per step drops to this is treated as stationary.
pub const FIXED_POINT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleConfig {
    pub phi: f64,
    pub seed: u64,
    /// Sampling constant `c` in `K_b`.
    pub c: f64,
    /// Upper bound on `K_b`.
    pub cap_per_b: u64,
    pub sample_mode: SampleMode,
    /// Maximum number of walk steps to compute before giving up.
    pub budget: Option<u64>,
    /// Simulated mode: explicit random binary searches and broadcast labeling.
    pub simulate: bool,
}

impl NibbleConfig {
    pub fn new(phi: f64, seed: u64) -> Self {
        NibbleConfig {
            phi,
            seed,
            c: 4.0,
            cap_per_b: 512,
            sample_mode: SampleMode::ExactK,
            budget: None,
            simulate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NibbleError {
    #[error("phi = {0} violates 0 < phi <= 1/12")]
    PhiOutOfRange(f64),
    #[error(transparent)]
    ZeroVolume(#[from] ZeroVolume),
    #[error("walk budget of {budget} steps exhausted at scale b = {b}")]
    BudgetExhausted { budget: u64, b: u32 },
    #[error("returned prefix failed recertification: {0}")]
    Certificate(String),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NibbleCertificate {
    pub phi_target: f64,
    pub phi_achieved: f64,
    pub b: u32,
    pub t: u64,
    pub x: u64,
    pub source: VertexId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NibbleCut {
    pub cut: Cut,
    pub certificate: NibbleCertificate,
}

impl NibbleCut {
    pub fn summary(&self) -> (CutSummary, NibbleCertificate) {
        (self.cut.summary(), self.certificate.clone())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NibbleStats {
    pub scales_run: u32,
    /// Distinct sources per scale.
    pub sources: Vec<usize>,
    /// Walk steps actually computed.
    pub walk_steps: u64,
    /// `max_{t,u} |Z_t(u)|` over all scales.
    pub max_congestion: u64,
}

#[derive(Debug, Clone)]
pub struct NibbleOutcome {
    pub cut: Option<NibbleCut>,
    pub transcript: Transcript,
    pub stats: NibbleStats,
}

struct Found {
    source: VertexId,
    t: u64,
    prefix: SweepPrefix,
    /// `p~_t` of the winning source.
    dist: Vec<(VertexId, f64)>,
    /// Vertices reached by the winning walk up to `t`.
    reached: Vec<VertexId>,
}

struct ScaleRun {
    found: Option<Found>,
    /// Sources evaluated without any truncation.
    untruncated: Vec<VertexId>,
    step2_rounds: u128,
    step34_rounds: u128,
    max_z: u64,
    walk_steps: u64,
}

/// Distributed Nibble on a connected graph with at least one edge.
pub fn distributed_nibble(g: &Graph, cfg: &NibbleConfig) -> Result<NibbleOutcome, NibbleError> {
    if !(cfg.phi > 0.0 && cfg.phi <= 1.0 / 12.0 + 1e-15) {
        return Err(NibbleError::PhiOutOfRange(cfg.phi));
    }
    if g.m() == 0 {
        return Err(ZeroVolume.into());
    }
    let m = g.m();
    let total = g.total_volume();
    let mut tr = Transcript::new(cfg.seed);
    let mut stats = NibbleStats::default();

    let root = (0..g.n()).find(|&v| g.degree(v) > 0).unwrap();
    let all: Vec<VertexId> = (0..g.n()).collect();
    let (tree, bfs_rounds) = bfs_build(g, &all, root)?;
    let scales = WalkParams::scales(m);
    let scale_count = scales.clone().count();
    tr.charge(
        "nibble.sample",
        bfs_rounds + pipelined_convergecast(&tree, 1) + broadcast(&tree, scale_count),
    );

    let mut exact_done = vec![false; g.n()];
    let mut dist_cache: HashMap<VertexId, Vec<u32>> = HashMap::new();
    let mut budget_left = cfg.budget;

    for b in scales {
        let params = WalkParams::new(cfg.phi, m, b);
        let k = params.sample_count(cfg.c, total).min(cfg.cap_per_b);
        let mut rng = seeded(cfg.seed, 0x6e69_6200 + b as u64);
        let mut sources = sample_by_degree(g, k, &mut rng, cfg.sample_mode)?;
        sources.sort_unstable();
        sources.dedup();
        stats.scales_run = b;
        stats.sources.push(sources.len());

        let (skipped, active): (Vec<VertexId>, Vec<VertexId>) = sources
            .iter()
            .partition(|&&s| !cfg.simulate && exact_done[s]);
        for &s in &skipped {
            dist_cache.entry(s).or_insert_with(|| {
                g.bfs_distances(s)
                    .into_iter()
                    .map(|d| d.map_or(u32::MAX, |d| d as u32))
                    .collect()
            });
        }
        let skipped_dists: Vec<&Vec<u32>> = skipped.iter().map(|s| &dist_cache[s]).collect();
        let run = run_scale(g, cfg, &params, &active, &skipped_dists, &mut budget_left)?;

        stats.walk_steps += run.walk_steps;
        stats.max_congestion = stats.max_congestion.max(run.max_z);
        tr.charge("nibble.walk", clamp(run.step2_rounds));
        tr.charge("nibble.sweep", clamp(run.step34_rounds));

        if let Some(found) = run.found {
            let cut = certify(g, cfg, &found, b)?;
            let label_rounds = label_members(g, cfg, &found)?;
            tr.charge("nibble.announce", tree.depth as u64 * 2 + label_rounds);
            return Ok(NibbleOutcome {
                cut: Some(cut),
                transcript: tr,
                stats,
            });
        }
        for s in run.untruncated {
            exact_done[s] = true;
        }
    }
    tr.charge("nibble.announce", tree.depth as u64 * 2);
    Ok(NibbleOutcome {
        cut: None,
        transcript: tr,
        stats,
    })
}

fn clamp(x: u128) -> u64 {
    x.min(u64::MAX as u128) as u64
}

/// One sampled source of the current scale.
struct Source {
    id: VertexId,
    walk: WalkState,
    truncated: bool,
    done: bool,
    reached: Vec<bool>,
    /// Last step at which the reached set grew; bounds the depth of its BFS tree.
    last_growth: u64,
    search: Stream,
}

/// What one source's step produced, applied to the shared counters afterwards.
struct StepOut {
    old_support: Vec<VertexId>,
    newly_reached: Vec<VertexId>,
    prefix: Option<SweepPrefix>,
    /// Simulated mode: random binary search iterations per ladder step.
    iters: Vec<u64>,
}

fn run_scale(
    g: &Graph,
    cfg: &NibbleConfig,
    params: &WalkParams,
    active: &[VertexId],
    skipped: &[&Vec<u32>],
    budget_left: &mut Option<u64>,
) -> Result<ScaleRun, NibbleError> {
    let n = g.n();
    let phi = cfg.phi;
    let ladder = Ladder::new(phi, g.total_volume());
    let rungs = ladder.values.len() as u128;

    let mut sources: Vec<Source> = active
        .iter()
        .map(|&s| {
            let walk = WalkState::start(g, s, params.eps);
            let mut reached = vec![false; n];
            for &v in &walk.support {
                reached[v] = true;
            }
            Source {
                id: s,
                truncated: walk.dropped > 0,
                done: walk.support.is_empty(),
                walk,
                reached,
                last_growth: 0,
                search: vertex_stream(cfg.seed, s, &format!("nibble-search-{}", params.b)),
            }
        })
        .collect();

    // Skipped sources reach exactly the ball of radius t - 1 at step t - 1.
    let ecc: Vec<u64> = skipped
        .iter()
        .map(|d| d.iter().copied().filter(|&x| x != u32::MAX).max().unwrap_or(0) as u64)
        .collect();
    let max_layer = ecc.iter().copied().max().unwrap_or(0) as usize;
    let mut layers: Vec<Vec<VertexId>> = vec![Vec::new(); if skipped.is_empty() { 0 } else { max_layer + 1 }];
    for d in skipped {
        for (u, &x) in d.iter().enumerate() {
            if x != u32::MAX {
                layers[x as usize].push(u);
            }
        }
    }
    let mut ball_count = vec![0u64; n];
    for &u in layers.first().into_iter().flatten() {
        ball_count[u] += 1;
    }
    let mut active_now = vec![0u64; n];
    let mut active_ever = vec![0u64; n];
    for s in &sources {
        for &v in &s.walk.support {
            active_now[v] += 1;
            active_ever[v] += 1;
        }
    }

    let mut out = ScaleRun {
        found: None,
        untruncated: Vec::new(),
        step2_rounds: 0,
        step34_rounds: 0,
        max_z: 0,
        walk_steps: 0,
    };
    let (mut last_z, mut last_overlap, mut last_iters, mut last_depth) = (0u64, 0u64, 0u128, 0u64);
    let mut t_end = 0u64;

    for t in 1..=params.t0 {
        t_end = t;
        // Z_t(u) is read off the step t-1 distributions; ball_count holds radius t-1.
        let z = (0..n).map(|u| ball_count[u] + active_now[u]).max().unwrap_or(0);
        out.max_z = out.max_z.max(z);
        out.step2_rounds += z as u128;
        last_z = z;

        let stepping = sources.iter().filter(|s| !s.done).count() as u64;
        if let Some(left) = budget_left {
            if *left < stepping {
                return Err(NibbleError::BudgetExhausted {
                    budget: cfg.budget.unwrap_or(0),
                    b: params.b,
                });
            }
            *left -= stepping;
        }
        out.walk_steps += stepping;

        let results: Vec<Option<StepOut>> = crate::runtime::pool().install(|| {
            sources
                .par_iter_mut()
                .map(|s| step_source(g, cfg, params, s, t, &ladder))
                .collect()
        });

        let mut max_support = 0usize;
        let mut iters_per_x: Vec<u64> = if cfg.simulate { vec![0; rungs as usize] } else { Vec::new() };
        for (s, r) in sources.iter().zip(results) {
            max_support = max_support.max(s.walk.support.len());
            let Some(r) = r else { continue };
            for &v in &r.old_support {
                active_now[v] -= 1;
            }
            for &v in &s.walk.support {
                active_now[v] += 1;
            }
            for &v in &r.newly_reached {
                active_ever[v] += 1;
            }
            for (slot, &it) in iters_per_x.iter_mut().zip(&r.iters) {
                *slot = (*slot).max(it);
            }
            if out.found.is_none() {
                if let Some(prefix) = r.prefix {
                    let mut dist: Vec<(VertexId, f64)> =
                        s.walk.support.iter().map(|&v| (v, s.walk.p[v])).collect();
                    dist.sort_unstable_by_key(|e| e.0);
                    out.found = Some(Found {
                        source: s.id,
                        t,
                        prefix,
                        dist,
                        reached: (0..n).filter(|&v| s.reached[v]).collect(),
                    });
                }
            }
        }

        // The search trees for step t span everything reached up to step t.
        if let Some(layer) = layers.get(t as usize) {
            for &u in layer {
                ball_count[u] += 1;
            }
        }
        let overlap = (0..n).map(|u| ball_count[u] + active_ever[u]).max().unwrap_or(0);
        let depth = sources
            .iter()
            .map(|s| s.last_growth.min(t))
            .chain(ecc.iter().map(|&e| e.min(t)))
            .max()
            .unwrap_or(0);
        let iters: u128 = if cfg.simulate {
            iters_per_x.iter().map(|&x| x as u128).sum()
        } else {
            rungs * analytic_search_iters(max_support)
        };
        // Each iteration is a broadcast down and a convergecast up the tree.
        out.step34_rounds += iters * 2 * (depth as u128 + 1) * overlap as u128;
        last_overlap = overlap;
        last_iters = iters;
        last_depth = depth;

        if out.found.is_some() {
            return Ok(out);
        }
        let balls_full = t as usize + 1 >= layers.len();
        if balls_full && sources.iter().all(|s| s.done) {
            break;
        }
    }

    // Steps after every walk settled repeat the last one.
    let rest = (params.t0 - t_end) as u128;
    out.step2_rounds = out.step2_rounds.saturating_add(rest * last_z as u128);
    out.step34_rounds = out.step34_rounds.saturating_add(
        rest.saturating_mul(last_iters)
            .saturating_mul(2 * (last_depth as u128 + 1))
            .saturating_mul(last_overlap as u128),
    );
    out.untruncated = sources.iter().filter(|s| !s.truncated).map(|s| s.id).collect();
    Ok(out)
}

/// Advances one source by a step and sweeps the new distribution.
fn step_source(
    g: &Graph,
    cfg: &NibbleConfig,
    params: &WalkParams,
    s: &mut Source,
    t: u64,
    ladder: &Ladder,
) -> Option<StepOut> {
    if s.done {
        return None;
    }
    let old_support = s.walk.support.clone();
    s.walk.step_truncated(g, params.eps);
    s.truncated |= s.walk.dropped > 0;
    let mut newly_reached = Vec::new();
    for &v in &s.walk.support {
        if !s.reached[v] {
            s.reached[v] = true;
            newly_reached.push(v);
        }
    }
    if !newly_reached.is_empty() {
        s.last_growth = t;
    }
    if s.walk.support.is_empty() || s.walk.last_change <= FIXED_POINT_TOL {
        s.done = true;
    }
    let mut r = StepOut {
        old_support,
        newly_reached,
        prefix: None,
        iters: Vec::new(),
    };
    if s.walk.support.is_empty() {
        return Some(r);
    }
    let mut rho: Vec<(f64, VertexId)> = s
        .walk
        .support
        .iter()
        .map(|&v| (s.walk.p[v] / g.degree(v) as f64, v))
        .collect();
    sort_by_rho(&mut rho);
    let order: Vec<VertexId> = rho.into_iter().map(|e| e.1).collect();
    let mut rank = vec![usize::MAX; g.n()];
    if cfg.simulate {
        let vols = sweep::prefix_stats(g, &order, &mut rank).0;
        r.iters = ladder
            .values
            .iter()
            .map(|&target| random_binary_search(&vols, target, &mut s.search))
            .collect();
    }
    r.prefix = sweep_cut_fast(g, order, ladder, &mut rank);
    Some(r)
}

/// Iteration bound for the random binary search over `s` candidates: the
/// range shrinks to 3/4 with probability 1/2 per iteration.
fn analytic_search_iters(s: usize) -> u128 {
    if s <= 1 {
        return 1;
    }
    2 * ((s as f64).ln() / (4.0f64 / 3.0).ln()).ceil() as u128 + 1
}

/// Largest `j` with `vols[j-1] <= target` (0 if none) by probing uniformly
/// random candidates; returns the number of probes.
fn random_binary_search(vols: &[u64], target: f64, rng: &mut Stream) -> u64 {
    let (mut lo, mut hi) = (0usize, vols.len());
    let mut iters = 0;
    while lo < hi {
        let j = rng.gen_range(lo + 1..=hi);
        iters += 1;
        if vols[j - 1] as f64 <= target {
            lo = j;
        } else {
            hi = j - 1;
        }
    }
    iters
}

fn certify(g: &Graph, cfg: &NibbleConfig, found: &Found, b: u32) -> Result<NibbleCut, NibbleError> {
    let side = VertexSet::from_members(g.n(), found.prefix.members().iter().copied());
    let cut = conductance(g, &side).map_err(|e| NibbleError::Certificate(e.to_string()))?;
    let denom = cut.vol_s.min(cut.vol_complement);
    if cut.boundary_size != found.prefix.boundary
        || cut.vol_s != found.prefix.volume
        || !qualifies(cut.boundary_size, cut.vol_s, g.total_volume(), cfg.phi)
    {
        return Err(NibbleError::Certificate(format!(
            "boundary {} / volume {} does not meet 12 phi",
            cut.boundary_size, denom
        )));
    }
    Ok(NibbleCut {
        certificate: NibbleCertificate {
            phi_target: cfg.phi,
            phi_achieved: cut.phi_f64(),
            b,
            t: found.t,
            x: found.prefix.x,
            source: found.source,
        },
        cut,
    })
}

/// Threshold flood from local vertex 0 (the source): each vertex compares its
/// own `(rho, id)` with the threshold of the last prefix vertex.
struct LabelFlood {
    rho: Vec<f64>,
    ids: Vec<VertexId>,
    rho_star: f64,
    id_star: VertexId,
}

impl LabelFlood {
    fn inside(&self, v: usize) -> bool {
        self.rho[v] > self.rho_star || (self.rho[v] == self.rho_star && self.ids[v] <= self.id_star)
    }
}

impl VertexProgram for LabelFlood {
    type State = Option<bool>;

    fn init(&self, ctx: &mut Ctx<'_>) -> Option<bool> {
        if ctx.vertex != 0 {
            return None;
        }
        ctx.send_all(&Message::new(2, &[self.rho_star.to_bits(), self.id_star as u64]));
        ctx.halt();
        Some(self.inside(0))
    }

    fn on_round(&self, st: &mut Option<bool>, ctx: &mut Ctx<'_>, inbox: &[(VertexId, Message)]) {
        if st.is_some() {
            ctx.halt();
            return;
        }
        let Some((_, msg)) = inbox.first() else {
            return;
        };
        *st = Some(self.inside(ctx.vertex));
        for i in 0..ctx.neighbors.len() {
            let w = ctx.neighbors[i];
            if inbox.binary_search_by_key(&w, |(s, _)| *s).is_err() {
                ctx.send(w, msg.clone());
            }
        }
        ctx.halt();
    }
}

/// Simulated mode: label cut members by the broadcast over the reached set and
/// check the labels reproduce the prefix. Returns the rounds used.
fn label_members(g: &Graph, cfg: &NibbleConfig, found: &Found) -> Result<u64, NibbleError> {
    let sub = g.induced_subgraph(&found.reached);
    let local_src = sub.local_of(found.source).unwrap();
    let last = *found.prefix.members().last().unwrap();
    let p_at = |v: VertexId| {
        found
            .dist
            .binary_search_by_key(&v, |e| e.0)
            .map_or(0.0, |i| found.dist[i].1)
    };
    let rho_star = p_at(last) / g.degree(last) as f64;
    if !cfg.simulate {
        return Ok(found.t + 1);
    }
    // Put the source at local id 0 so the program can recognize it.
    let k = sub.graph.n();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.swap(0, local_src);
    let mut inv = vec![0; k];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let edges = sub.graph.edges().iter().map(|e| (inv[e.0], inv[e.1]));
    let h = Graph::from_edges(k, edges).expect("relabeling keeps the graph simple");
    let ids: Vec<VertexId> = (0..k).map(|i| sub.to_parent[perm[i]]).collect();
    let rho: Vec<f64> = ids.iter().map(|&v| p_at(v) / g.degree(v) as f64).collect();
    let prog = LabelFlood {
        rho,
        ids: ids.clone(),
        rho_star,
        id_star: last,
    };
    let out = run(&h, &prog, &RunConfig::new(cfg.seed, "nibble-label"))?;
    let mut labeled: Vec<VertexId> = out
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Some(true))
        .map(|(i, _)| ids[i])
        .collect();
    labeled.sort_unstable();
    let mut want = found.prefix.members().to_vec();
    want.sort_unstable();
    if labeled != want {
        return Err(NibbleError::Certificate(
            "broadcast labels disagree with the sweep prefix".into(),
        ));
    }
    Ok(out.transcript.rounds)
}

/// `|Z_t(u)|` for `t = 1..=steps`: how many of `sources` have positive
/// truncated-walk mass at `u` after `t - 1` steps, maximized over `u`.
pub fn congestion_profile(g: &Graph, eps: f64, sources: &[VertexId], steps: usize) -> Vec<u64> {
    let mut states: Vec<WalkState> = sources.iter().map(|&s| WalkState::start(g, s, eps)).collect();
    let mut out = Vec::with_capacity(steps);
    let mut count = vec![0u64; g.n()];
    for _ in 0..steps {
        count.iter_mut().for_each(|c| *c = 0);
        for w in &states {
            for &v in &w.support {
                count[v] += 1;
            }
        }
        out.push(count.iter().copied().max().unwrap_or(0));
        for w in &mut states {
            w.step_truncated(g, eps);
        }
    }
    out
}
