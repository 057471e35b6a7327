use std::collections::{BTreeSet, HashMap};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{allocate_tuples, easy_case_threshold, part_count, TriangleError, ORACLE_MAX_EDGES};
use crate::graph::{Edge, Graph, VertexId};
use crate::routing::{assign_degree_class_ids, default_kappa, Router, RoutingRequest};
use crate::rng::vertex_stream;
use crate::runtime::{bfs_build, broadcast, pipelined_convergecast, Transcript};

/// A pattern on slots `0..s`. Non-induced unless `induced` is set; for
/// cliques the two notions agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub s: usize,
    pub edges: Vec<(usize, usize)>,
    pub induced: bool,
}

impl Pattern {
    pub fn clique(s: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..s {
            for b in a + 1..s {
                edges.push((a, b));
            }
        }
        Pattern { s, edges, induced: false }
    }

    pub fn cycle(s: usize) -> Self {
        Pattern {
            s,
            edges: (0..s).map(|i| (i.min((i + 1) % s), i.max((i + 1) % s))).collect(),
            induced: false,
        }
    }

    pub fn path(s: usize) -> Self {
        Pattern {
            s,
            edges: (1..s).map(|i| (i - 1, i)).collect(),
            induced: false,
        }
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

/// `clique:4`, `cycle:5`, `path:3`, or an edge list `4:0-1,1-2,2-3`;
/// a trailing `+induced` asks for induced matches.
impl FromStr for Pattern {
    type Err = String;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let (body, induced) = match spec.strip_suffix("+induced") {
            Some(b) => (b, true),
            None => (spec, false),
        };
        let (kind, rest) = body.split_once(':').ok_or("expected KIND:S or S:EDGES")?;
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad number {x:?}: {e}"));
        let mut p = match kind {
            "clique" => Pattern::clique(num(rest)?),
            "cycle" => Pattern::cycle(num(rest)?),
            "path" => Pattern::path(num(rest)?),
            _ => {
                let s = num(kind)?;
                let mut edges = Vec::new();
                for pair in rest.split(',').filter(|x| !x.is_empty()) {
                    let (a, b) = pair.split_once('-').ok_or(format!("bad edge {pair:?}"))?;
                    let (a, b) = (num(a)?, num(b)?);
                    if a == b || a >= s || b >= s {
                        return Err(format!("edge {pair:?} out of range for {s} slots"));
                    }
                    edges.push((a.min(b), a.max(b)));
                }
                edges.sort_unstable();
                edges.dedup();
                Pattern { s, edges, induced: false }
            }
        };
        if p.s < 2 {
            return Err("patterns need at least two slots".into());
        }
        p.induced = induced;
        Ok(p)
    }
}

/// One copy of a pattern: its vertex set and the image of the pattern edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSet {
    pub reports: Vec<(Occurrence, VertexId)>,
}

impl SubgraphSet {
    pub fn count(&self) -> usize {
        self.reports.len()
    }

    pub fn occurrences(&self) -> Vec<Occurrence> {
        let mut o: Vec<Occurrence> = self.reports.iter().map(|r| r.0.clone()).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    pub fn is_exactly_once(&self) -> bool {
        self.occurrences().len() == self.reports.len()
    }
}

/// Sorted adjacency over an arbitrary vertex set.
struct Known {
    adj: HashMap<VertexId, Vec<VertexId>>,
    vertices: Vec<VertexId>,
}

impl Known {
    fn new(edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Self {
        let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for (a, b) in edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        for l in adj.values_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let mut vertices: Vec<VertexId> = adj.keys().copied().collect();
        vertices.sort_unstable();
        Known { adj, vertices }
    }

    fn has(&self, a: VertexId, b: VertexId) -> bool {
        self.adj.get(&a).is_some_and(|l| l.binary_search(&b).is_ok())
    }

    fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adj.get(&v).map_or(&[], Vec::as_slice)
    }
}

/// Every occurrence of `p` among the known edges whose vertex set passes `keep`.
/// Vertices that touch no known edge are never used, so patterns with
/// isolated slots only match within the known vertex set.
fn occurrences_in(k: &Known, p: &Pattern, keep: &dyn Fn(&[VertexId]) -> bool) -> BTreeSet<Occurrence> {
    // Slots in BFS order over the pattern so most slots have an assigned neighbor.
    let mut order = Vec::with_capacity(p.s);
    let mut anchor = vec![None; p.s];
    let mut placed = vec![false; p.s];
    for root in 0..p.s {
        if placed[root] {
            continue;
        }
        placed[root] = true;
        order.push(root);
        let mut i = order.len() - 1;
        while i < order.len() {
            let a = order[i];
            for b in 0..p.s {
                if !placed[b] && p.adjacent(a, b) {
                    placed[b] = true;
                    anchor[b] = Some(a);
                    order.push(b);
                }
            }
            i += 1;
        }
    }
    let mut out = BTreeSet::new();
    let mut map = vec![usize::MAX; p.s];
    extend(k, p, &order, &anchor, 0, &mut map, keep, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend(
    k: &Known,
    p: &Pattern,
    order: &[usize],
    anchor: &[Option<usize>],
    depth: usize,
    map: &mut Vec<VertexId>,
    keep: &dyn Fn(&[VertexId]) -> bool,
    out: &mut BTreeSet<Occurrence>,
) {
    if depth == order.len() {
        let mut vertices = map.clone();
        vertices.sort_unstable();
        if !keep(&vertices) {
            return;
        }
        let mut edges: Vec<Edge> = p.edges.iter().map(|&(a, b)| Edge::new(map[a], map[b])).collect();
        edges.sort_unstable();
        out.insert(Occurrence { vertices, edges });
        return;
    }
    let slot = order[depth];
    let candidates = match anchor[slot] {
        Some(a) => k.neighbors(map[a]),
        None => &k.vertices,
    };
    'next: for &v in candidates {
        for &prev in &order[..depth] {
            let w = map[prev];
            if w == v {
                continue 'next;
            }
            let want = p.adjacent(slot, prev);
            let has = k.has(v, w);
            if (want && !has) || (p.induced && !want && has) {
                continue 'next;
            }
        }
        map[slot] = v;
        extend(k, p, order, anchor, depth + 1, map, keep, out);
        map[slot] = usize::MAX;
    }
}

/// Oracle: every occurrence of `p` in `g` by exhaustive slot assignment.
pub fn brute_force_occurrences(g: &Graph, p: &Pattern) -> Result<Vec<Occurrence>, TriangleError> {
    if g.m() > ORACLE_MAX_EDGES {
        return Err(TriangleError::TooLarge(g.m()));
    }
    let k = Known::new(g.edges().iter().map(|e| (e.0, e.1)));
    Ok(occurrences_in(&k, p, &|_| true).into_iter().collect())
}

/// Oracle: all `s`-cliques as sorted vertex lists, by growing cliques over
/// common higher neighbors.
pub fn brute_force_cliques(g: &Graph, s: usize) -> Vec<Vec<VertexId>> {
    fn grow(g: &Graph, s: usize, clique: &mut Vec<VertexId>, cand: &[VertexId], out: &mut Vec<Vec<VertexId>>) {
        if clique.len() == s {
            out.push(clique.clone());
            return;
        }
        for (i, &v) in cand.iter().enumerate() {
            let next: Vec<VertexId> = cand[i + 1..].iter().copied().filter(|&w| g.has_edge(v, w)).collect();
            clique.push(v);
            grow(g, s, clique, &next, out);
            clique.pop();
        }
    }
    let mut out = Vec::new();
    let all: Vec<VertexId> = (0..g.n()).collect();
    grow(g, s, &mut Vec::new(), &all, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphConfig {
    pub seed: u64,
    pub kappa: Option<u64>,
    pub force_partition: bool,
}

impl SubgraphConfig {
    pub fn new(seed: u64) -> Self {
        SubgraphConfig {
            seed,
            kappa: None,
            force_partition: false,
        }
    }
}

/// Lists every occurrence of `p` in a connected, well-mixing `g`.
///
/// Same scheme as the triangle routine with `q = ceil(n^(1/s))` classes and
/// sorted `s`-tuples in place of triads: each edge goes to the owner of every
/// tuple containing its two classes, and an owner reports the occurrences
/// whose sorted class tuple it owns. A vertex of degree at least
/// `m / (20 n^((s-2)/s) log n)` instead collects the whole graph.
pub fn enumerate_subgraphs(
    g: &Graph,
    p: &Pattern,
    cfg: &SubgraphConfig,
) -> Result<(SubgraphSet, Transcript), TriangleError> {
    let mut tr = Transcript::new(cfg.seed);
    if cfg.force_partition {
        tr.flag("force_partition", true);
    }
    if g.m() == 0 {
        return Ok((SubgraphSet::default(), tr));
    }
    if !g.is_connected() {
        return Err(TriangleError::Disconnected);
    }
    let (n, m, s) = (g.n(), g.m(), p.s);
    let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(n));
    let all: Vec<VertexId> = (0..n).collect();
    let (ids, id_rounds) = assign_degree_class_ids(g, &all)?;
    let (tree, _) = bfs_build(g, &all, 0)?;
    tr.charge("subgraphs.ids", id_rounds);
    tr.charge("subgraphs.easy_check", pipelined_convergecast(&tree, 1) + broadcast(&tree, 1));
    let router = Router::new(g, kappa);

    let star = (0..n).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))).unwrap();
    let heavy = g.degree(star) as f64 >= easy_case_threshold(m, n, s);
    let alloc = if cfg.force_partition || !heavy {
        match allocate_tuples(&ids, g, part_count(n, s), s) {
            Ok(a) => Some(a),
            Err(TriangleError::Capacity { .. }) => {
                tr.flag("capacity_fallback", true);
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let Some(alloc) = alloc else {
        // Everyone ships its incident edges to the star.
        let requests: Vec<RoutingRequest> = (0..n)
            .filter(|&v| v != star)
            .flat_map(|v| {
                g.neighbors(v).iter().map(move |&u| RoutingRequest {
                    source: v,
                    destination: star,
                    payload: vec![v as u64, u as u64],
                })
            })
            .collect();
        let d = router.route_batched(&requests)?;
        charge_routing(&mut tr, d.rounds, d.batches, d.messages, kappa);
        let known = Known::new(
            g.neighbors(star)
                .iter()
                .map(|&u| (star, u))
                .chain(d.inbox[star].iter().map(|(_, x)| (x[0] as usize, x[1] as usize))),
        );
        let mut out = SubgraphSet::default();
        for o in occurrences_in(&known, p, &|_| true) {
            out.reports.push((o, star));
        }
        return Ok((out, tr));
    };

    let q = alloc.q;
    let class: Vec<usize> = (0..n)
        .map(|v| vertex_stream(cfg.seed, v, "subgraphs.class").gen_range(1..=q))
        .collect();
    tr.charge("subgraphs.classes", 1);
    let mut containing: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut requests = Vec::new();
    let mut local: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
    for v in 0..n {
        for &u in g.neighbors(v) {
            let key = (class[v].min(class[u]), class[v].max(class[u]));
            let tuples = containing.entry(key).or_insert_with(|| alloc.containing(key.0, key.1));
            for &t in tuples.iter() {
                let x = alloc.owner[t];
                if x == v {
                    local[v].push((v, u));
                } else {
                    requests.push(RoutingRequest {
                        source: v,
                        destination: x,
                        payload: vec![v as u64, u as u64, class[v] as u64, class[u] as u64],
                    });
                }
            }
        }
    }
    let d = router.route_batched(&requests)?;
    charge_routing(&mut tr, d.rounds, d.batches, d.messages, kappa);

    let mut out = SubgraphSet::default();
    for x in 0..n {
        let range = alloc.ranges[x].clone();
        if range.is_empty() {
            continue;
        }
        let known = Known::new(
            std::mem::take(&mut local[x])
                .into_iter()
                .chain(d.inbox[x].iter().map(|(_, w)| (w[0] as usize, w[1] as usize))),
        );
        let classes_of = |vs: &[VertexId]| vs.iter().map(|&v| class[v]).collect::<Vec<_>>();
        let keep = |vs: &[VertexId]| range.contains(&alloc.index_of(&classes_of(vs)));
        for o in occurrences_in(&known, p, &keep) {
            out.reports.push((o, x));
        }
    }
    out.reports.sort_unstable();
    Ok((out, tr))
}

fn charge_routing(tr: &mut Transcript, rounds: u64, batches: u64, messages: u64, kappa: u64) {
    tr.charge("subgraphs.route", rounds);
    tr.routing.calls += batches;
    tr.routing.messages += messages;
    tr.routing.kappa = tr.routing.kappa.max(kappa);
}
