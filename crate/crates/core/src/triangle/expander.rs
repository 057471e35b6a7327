use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{allocate_triads, canonical, part_count, TriangleError, TriangleSet, TupleAllocation};
use crate::graph::{Edge, Graph, VertexId};
use crate::math::log2m;
use crate::rng::{mix, vertex_stream};
use crate::routing::{assign_degree_class_ids, default_kappa, BatchedDelivery, Router, RoutingRequest};
use crate::runtime::{bfs_build, broadcast, pipelined_convergecast, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpanderConfig {
    pub seed: u64,
    /// Routing slack; `None` means `2^ceil(sqrt(log2 n))` of the component.
    pub kappa: Option<u64>,
    /// Skip the easy case and always run the randomized partition. At desk
    /// scale the easy-case threshold is tiny and would otherwise always fire.
    pub force_partition: bool,
}

impl ExpanderConfig {
    pub fn new(seed: u64) -> Self {
        ExpanderConfig {
            seed,
            kappa: None,
            force_partition: false,
        }
    }
}

/// `m / (20 n^((s-2)/s) log n)`; `s = 3` gives the triangle threshold.
pub fn easy_case_threshold(m: usize, n: usize, s: usize) -> f64 {
    let exp = (s as f64 - 2.0) / s as f64;
    m as f64 / (20.0 * (n.max(1) as f64).powf(exp) * log2m(n))
}

/// The component `E_in` together with the `E_out` edges hanging off it, in
/// local ids: `0..n` is `V_in`, `n..` are outside endpoints.
pub(crate) struct Instance {
    pub g_in: Graph,
    /// Local id -> parent id.
    pub vertex: Vec<VertexId>,
    pub local: HashMap<VertexId, usize>,
    /// `E_out` edges as (inside local, outside local).
    pub out_edges: Vec<(usize, usize)>,
    pub deg_out: Vec<usize>,
}

impl Instance {
    pub fn n_in(&self) -> usize {
        self.g_in.n()
    }

    /// Degree in `E_in + E_out` of any local vertex.
    pub fn degree(&self, v: usize) -> usize {
        if v < self.n_in() {
            self.g_in.degree(v) + self.deg_out[v]
        } else {
            self.deg_out[v]
        }
    }

    /// Incident `E_in + E_out` edges of an inside vertex, as local pairs.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.g_in.neighbors(v).iter().copied().chain(self.out_adj(v))
    }

    fn out_adj(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self.out_edges.partition_point(|e| e.0 < v);
        let hi = self.out_edges.partition_point(|e| e.0 <= v);
        self.out_edges[lo..hi].iter().map(|e| e.1)
    }

    pub fn build(e_in: &[Edge], e_out: &[Edge]) -> Result<Self, TriangleError> {
        let mut inside: Vec<VertexId> = e_in.iter().flat_map(|e| [e.0, e.1]).collect();
        inside.sort_unstable();
        inside.dedup();
        let mut local: HashMap<VertexId, usize> = inside.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let g_in = Graph::from_edges_dedup(inside.len(), e_in.iter().map(|e| (local[&e.0], local[&e.1])))
            .map_err(|e| TriangleError::Precondition(e.to_string()))?;
        if !g_in.is_connected() {
            return Err(TriangleError::Disconnected);
        }
        let n = inside.len();
        let mut vertex = inside;
        let mut out_edges = Vec::with_capacity(e_out.len());
        for e in e_out {
            let inside_at = |v: VertexId| local.get(&v).copied().filter(|&i| i < n);
            let (inner, outer) = match (inside_at(e.0), inside_at(e.1)) {
                (Some(i), None) => (i, e.1),
                (None, Some(i)) => (i, e.0),
                _ => {
                    return Err(TriangleError::Precondition(format!(
                        "E_out edge {e:?} must join V_in to the rest"
                    )))
                }
            };
            let o = *local.entry(outer).or_insert_with(|| {
                vertex.push(outer);
                vertex.len() - 1
            });
            out_edges.push((inner, o));
        }
        out_edges.sort_unstable();
        out_edges.dedup();
        let mut deg_out = vec![0; vertex.len()];
        for &(i, o) in &out_edges {
            deg_out[i] += 1;
            deg_out[o] += 1;
        }
        for v in 0..n {
            if g_in.degree(v) < deg_out[v] {
                return Err(TriangleError::OutDegree {
                    vertex: vertex[v],
                    deg_in: g_in.degree(v),
                    deg_out: deg_out[v],
                });
            }
        }
        Ok(Instance {
            g_in,
            vertex,
            local,
            out_edges,
            deg_out,
        })
    }
}

/// Triangles formed by a set of known edges (parent ids), sorted.
pub(crate) fn triangles_among(edges: &[(VertexId, VertexId)]) -> Vec<[VertexId; 3]> {
    let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for &(a, b) in edges {
        let (a, b) = (a.min(b), a.max(b));
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default();
    }
    for l in adj.values_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let mut out = Vec::new();
    for (&u, nu) in &adj {
        for (i, &v) in nu.iter().enumerate() {
            let nv = &adj[&v];
            for &w in &nu[i + 1..] {
                if nv.binary_search(&w).is_ok() {
                    out.push([u, v, w]);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

fn record_routing(tr: &mut Transcript, d: &BatchedDelivery, kappa: u64) {
    tr.charge("triangles.route", d.rounds);
    tr.routing.calls += d.batches;
    tr.routing.messages += d.messages;
    tr.routing.kappa = tr.routing.kappa.max(kappa);
}

/// All triangles of `E_in + E_out`, where `E_in` spans a well-mixing
/// component and every `E_out` edge joins it to an outside vertex.
///
/// If some vertex has `deg_in + deg_out >= zeta` it collects every edge
/// through the router and reports everything (easy case). Otherwise every
/// vertex draws a class in `1..=q`, triads are allocated by degree class, and
/// each edge is routed to the `q` owners of the triads containing its two
/// classes. An owner reports exactly the triangles whose sorted class triple
/// is a triad it owns.
pub fn enumerate_expander(
    e_in: &[Edge],
    e_out: &[Edge],
    cfg: &ExpanderConfig,
) -> Result<(TriangleSet, Transcript), TriangleError> {
    let mut tr = Transcript::new(cfg.seed);
    if cfg.force_partition {
        tr.flag("force_partition", true);
    }
    if e_in.is_empty() {
        return Ok((TriangleSet::default(), tr));
    }
    let inst = Instance::build(e_in, e_out)?;
    let n = inst.n_in();
    let m = inst.g_in.m();
    let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(n));

    let all: Vec<usize> = (0..n).collect();
    let (ids, id_rounds) = assign_degree_class_ids(&inst.g_in, &all)?;
    let (tree, _) = bfs_build(&inst.g_in, &all, 0)?;
    // Ids, then the largest degree up the tree and the verdict back down.
    tr.charge("triangles.ids", id_rounds);
    tr.charge("triangles.easy_check", pipelined_convergecast(&tree, 1) + broadcast(&tree, 1));

    let star = (0..inst.vertex.len()).max_by_key(|&v| (inst.degree(v), std::cmp::Reverse(inst.vertex[v])));
    let star = star.unwrap();
    let zeta = easy_case_threshold(m, n, 3);
    if !cfg.force_partition && inst.degree(star) as f64 >= zeta {
        return easy_case(&inst, star, kappa, tr);
    }

    let q = part_count(n, 3);
    let alloc = match allocate_triads(&ids, &inst.g_in, q) {
        Ok(a) => a,
        Err(TriangleError::Capacity { .. }) => {
            tr.flag("capacity_fallback", true);
            return easy_case(&inst, star, kappa, tr);
        }
        Err(e) => return Err(e),
    };
    let class: Vec<usize> = inst
        .vertex
        .iter()
        .map(|&v| vertex_stream(cfg.seed, v, "triangles.class").gen_range(1..=q))
        .collect();
    tr.charge("triangles.classes", 1);
    partition_round(&inst, &alloc, &class, kappa, tr)
}

fn easy_case(
    inst: &Instance,
    star: usize,
    kappa: u64,
    mut tr: Transcript,
) -> Result<(TriangleSet, Transcript), TriangleError> {
    let n = inst.n_in();
    // G_in plus the star when it lies outside.
    let plus = if star < n {
        inst.g_in.clone()
    } else {
        let mut edges: Vec<(usize, usize)> = inst.g_in.edges().iter().map(|e| (e.0, e.1)).collect();
        edges.extend(inst.out_edges.iter().filter(|e| e.1 == star).map(|e| (e.0, n)));
        Graph::from_edges(n + 1, edges).map_err(|e| TriangleError::Precondition(e.to_string()))?
    };
    let target = star.min(n);
    let mut requests = Vec::new();
    let mut known: Vec<(VertexId, VertexId)> = Vec::new();
    for u in 0..n {
        for w in inst.incident(u) {
            let e = (inst.vertex[u], inst.vertex[w]);
            if u == target {
                known.push(e);
            } else {
                requests.push(RoutingRequest {
                    source: u,
                    destination: target,
                    payload: vec![e.0 as u64, e.1 as u64],
                });
            }
        }
    }
    let router = Router::new(&plus, kappa);
    let d = router.route_batched(&requests)?;
    record_routing(&mut tr, &d, kappa);
    known.extend(d.inbox[target].iter().map(|(_, p)| (p[0] as usize, p[1] as usize)));
    let mut out = TriangleSet::default();
    let reporter = inst.vertex[star];
    for t in triangles_among(&known) {
        out.push(t, reporter);
    }
    Ok((out, tr))
}

fn partition_round(
    inst: &Instance,
    alloc: &TupleAllocation,
    class: &[usize],
    kappa: u64,
    mut tr: Transcript,
) -> Result<(TriangleSet, Transcript), TriangleError> {
    let n = inst.n_in();
    let q = alloc.q;
    let mut requests = Vec::new();
    let mut local_known: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
    for v in 0..n {
        for u in inst.incident(v) {
            let (cv, cu) = (class[v], class[u]);
            for r in 1..=q {
                let x = alloc.owner_of(&[cu, cv, r]);
                let e = (inst.vertex[v], inst.vertex[u]);
                if x == v {
                    local_known[v].push(e);
                } else {
                    requests.push(RoutingRequest {
                        source: v,
                        destination: x,
                        payload: vec![e.0 as u64, e.1 as u64, cv as u64, cu as u64],
                    });
                }
            }
        }
    }
    let router = Router::new(&inst.g_in, kappa);
    let d = router.route_batched(&requests)?;
    record_routing(&mut tr, &d, kappa);

    let class_of = |v: VertexId| class[inst.local[&v]];
    let mut out = TriangleSet::default();
    for x in 0..n {
        if alloc.ranges[x].is_empty() {
            continue;
        }
        let mut known = std::mem::take(&mut local_known[x]);
        known.extend(d.inbox[x].iter().map(|(_, p)| (p[0] as usize, p[1] as usize)));
        for t in triangles_among(&known) {
            let idx = alloc.index_of(&[class_of(t[0]), class_of(t[1]), class_of(t[2])]);
            if alloc.ranges[x].contains(&idx) {
                out.push(canonical(t), inst.vertex[x]);
            }
        }
    }
    Ok((out, tr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub q: usize,
    /// Largest `|E(V_i, V_j)|` over `i <= j`, per trial.
    pub per_trial_max: Vec<usize>,
    pub max: usize,
    /// `24 m / q^2`, i.e. `24 m / n^(2/3)` when `q = n^(1/3)`.
    pub bound: f64,
    pub within_bound: usize,
    pub max_degree: usize,
    /// `m p / (20 log n)` with `p = 1/q`.
    pub degree_limit: f64,
    pub precondition_holds: bool,
}

/// Draws `trials` random `q`-partitions and records the heaviest class pair.
/// With `strict`, a maximum degree above `m / (20 q log n)` is an error;
/// otherwise it is only reported.
pub fn edge_concentration_probe(
    g: &Graph,
    q: usize,
    seed: u64,
    trials: usize,
    strict: bool,
) -> Result<ProbeReport, TriangleError> {
    if q == 0 {
        return Err(TriangleError::Precondition("q must be positive".into()));
    }
    let m = g.m();
    let degree_limit = m as f64 / (20.0 * q as f64 * log2m(g.n()));
    let precondition_holds = g.max_degree() as f64 <= degree_limit;
    if strict && !precondition_holds {
        return Err(TriangleError::Precondition(format!(
            "max degree {} above m p / (20 log n) = {degree_limit:.2}",
            g.max_degree()
        )));
    }
    let bound = 24.0 * m as f64 / (q * q) as f64;
    let mut per_trial_max = Vec::with_capacity(trials);
    for trial in 0..trials {
        let trial_seed = mix(seed, trial as u64, 0x7072_6f62);
        let class: Vec<usize> = (0..g.n())
            .map(|v| vertex_stream(trial_seed, v, "probe.class").gen_range(0..q))
            .collect();
        let mut counts = vec![0usize; q * q];
        for e in g.edges() {
            let (a, b) = (class[e.0].min(class[e.1]), class[e.0].max(class[e.1]));
            counts[a * q + b] += 1;
        }
        per_trial_max.push(counts.into_iter().max().unwrap_or(0));
    }
    Ok(ProbeReport {
        q,
        max: per_trial_max.iter().copied().max().unwrap_or(0),
        within_bound: per_trial_max.iter().filter(|&&x| x as f64 <= bound).count(),
        per_trial_max,
        bound,
        max_degree: g.max_degree(),
        degree_limit,
        precondition_holds,
    })
}
