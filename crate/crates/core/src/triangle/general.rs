use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{enumerate_expander, for_each_triangle, ExpanderConfig, Triangle, TriangleError, TriangleSet};
use crate::decomposition::{decompose, Cluster, DecomposeConfig, EdgeLabel};
use crate::graph::{Edge, Graph, VertexId};
use crate::math::ceil_log2m;
use crate::rng::mix;
use crate::runtime::{pool, Transcript};

/// State of one triangle edge as seen from an ordered pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDir {
    Unoriented,
    /// Oriented `x -> y`.
    Out,
    /// Oriented `y -> x`.
    In,
}

/// The vertex that reports a triangle with at least one oriented edge.
///
/// `dir(x, y)` describes the edge `{x, y}`. The three rules:
/// an apex with both edges oriented out of it hands the triangle to the
/// smaller of its two out-neighbors; an oriented `(x, z)` with `{x, y}`
/// unoriented and `{y, z}` unoriented or oriented `(z, y)` goes to `y`; a
/// common sink `z` of `(x, z), (y, z)` with `{x, y}` unoriented goes to the
/// smaller of `x, y`. These cover every acyclic orientation; cyclic ones
/// fall back to the smallest vertex that is no edge's tail, else the smallest.
pub fn case1_report_owner(t: Triangle, dir: impl Fn(VertexId, VertexId) -> EdgeDir) -> Option<VertexId> {
    let out = |x, y| dir(x, y) == EdgeDir::Out;
    let free = |x, y| dir(x, y) == EdgeDir::Unoriented;
    let rotations = [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])];
    if rotations.iter().all(|&(x, y, _)| free(x, y)) {
        return None;
    }
    for &(x, y, z) in &rotations {
        if out(x, y) && out(x, z) {
            return Some(y.min(z));
        }
    }
    for &(a, b, c) in &rotations {
        // Both orders of the pair (a, b), with the third vertex as y.
        for (x, z, y) in [(a, b, c), (b, a, c)] {
            if out(x, z) && free(x, y) && (free(y, z) || out(z, y)) {
                return Some(y);
            }
        }
    }
    for &(x, y, z) in &rotations {
        if out(x, z) && out(y, z) && free(x, y) {
            return Some(x.min(y));
        }
    }
    let mut sorted = t;
    sorted.sort_unstable();
    let tail = |v| t.iter().any(|&w| w != v && out(v, w));
    Some(sorted.iter().copied().find(|&v| !tail(v)).unwrap_or(sorted[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralConfig {
    pub delta: f64,
    pub seed: u64,
    pub kappa: Option<u64>,
    /// Passed to every expander call; see [`ExpanderConfig::force_partition`].
    pub force_partition: bool,
}

impl GeneralConfig {
    pub fn new(delta: f64, seed: u64) -> Self {
        GeneralConfig {
            delta,
            seed,
            kappa: None,
            force_partition: false,
        }
    }
}

/// What each recursion level did.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub depth: usize,
    pub n: usize,
    pub m: usize,
    pub clusters: usize,
    pub es_edges: usize,
    pub er_edges: usize,
    /// Cluster edges at bad vertices, handed to the next level.
    pub er_new_edges: usize,
    pub out_edges: usize,
    pub case1_triangles: usize,
    pub case2_triangles: usize,
}

/// Triangle enumeration on any graph, every triangle reported by exactly one
/// vertex. Decomposes, reports triangles touching `E_s` through the
/// orientation, runs the expander routine on every `E_m` cluster with the
/// `E_r` edges at its good vertices, and recurses on `E_r` plus the cluster
/// edges at bad vertices.
pub fn enumerate_general(g: &Graph, cfg: &GeneralConfig) -> Result<(TriangleSet, Transcript), TriangleError> {
    enumerate_general_with_stats(g, cfg).map(|(s, t, _)| (s, t))
}

pub fn enumerate_general_with_stats(
    g: &Graph,
    cfg: &GeneralConfig,
) -> Result<(TriangleSet, Transcript, Vec<LevelStats>), TriangleError> {
    let cap = ceil_log2m(g.m());
    let mut stats = Vec::new();
    let (mut set, tr) = level(g, cfg, 0, cap, &mut stats)?;
    set.normalize();
    Ok((set, tr, stats))
}

pub fn count_triangles(g: &Graph, delta: f64, seed: u64) -> Result<usize, TriangleError> {
    Ok(enumerate_general(g, &GeneralConfig::new(delta, seed))?.0.count())
}

pub fn detect_triangle(g: &Graph, delta: f64, seed: u64) -> Result<bool, TriangleError> {
    Ok(count_triangles(g, delta, seed)? > 0)
}

fn level(
    g: &Graph,
    cfg: &GeneralConfig,
    depth: usize,
    cap: usize,
    stats: &mut Vec<LevelStats>,
) -> Result<(TriangleSet, Transcript), TriangleError> {
    let mut tr = Transcript::new(cfg.seed);
    let mut out = TriangleSet::default();
    if g.m() == 0 {
        return Ok((out, tr));
    }
    if depth > cap {
        return Err(TriangleError::RecursionCap { depth, cap });
    }
    let dcfg = DecomposeConfig::new(cfg.delta, mix(cfg.seed, depth as u64, 0x6465_636f));
    let (d, dtr) = decompose(g, &dcfg)?;
    tr.then(&dtr);
    let labels = d.edge_labels(g);
    if labels.iter().any(Option::is_none) {
        return Err(TriangleError::Precondition("decomposition misses an edge".into()));
    }
    let label = |u: VertexId, v: VertexId| labels[g.edge_id(u, v).unwrap()].unwrap();
    let mut st = LevelStats {
        depth,
        n: g.n(),
        m: g.m(),
        clusters: d.clusters.len(),
        es_edges: d.es_edge_count(),
        er_edges: d.er.len(),
        ..Default::default()
    };

    // Case 1: each vertex announces its E_s edges, one per round.
    let announce = d.es.values().map(Vec::len).max().unwrap_or(0);
    tr.charge("triangles.case1", announce as u64);
    let dir = |x: VertexId, y: VertexId| match label(x, y) {
        EdgeLabel::Es(owner) if owner == x => EdgeDir::Out,
        EdgeLabel::Es(_) => EdgeDir::In,
        _ => EdgeDir::Unoriented,
    };
    for_each_triangle(g, |t| {
        if let Some(owner) = case1_report_owner(t, dir) {
            out.push(t, owner);
        }
    });
    st.case1_triangles = out.count();

    // Case 2: clusters run side by side.
    let mut deg_er = vec![0usize; g.n()];
    for e in &d.er {
        deg_er[e.0] += 1;
        deg_er[e.1] += 1;
    }
    let results: Vec<Result<ClusterRun, TriangleError>> = pool().install(|| {
        d.clusters
            .par_iter()
            .map(|c| {
                let ecfg = ExpanderConfig {
                    seed: mix(cfg.seed, depth as u64, c.id as u64 + 1),
                    kappa: cfg.kappa,
                    force_partition: cfg.force_partition,
                };
                cluster_case(c, &d.er, &deg_er, &ecfg)
            })
            .collect()
    });
    let mut rest: Vec<Edge> = d.er.clone();
    let mut cluster_tr = Vec::with_capacity(results.len());
    for r in results {
        let (kept, etr, r_new, outs) = r?;
        st.case2_triangles += kept.count();
        st.er_new_edges += r_new.len();
        st.out_edges += outs;
        out.extend(kept);
        cluster_tr.push(etr);
        rest.extend(r_new);
    }
    tr.alongside(&cluster_tr);
    stats.push(st);

    // Case 3: recurse on E_r and E_r^new.
    if !rest.is_empty() {
        let ids: Vec<usize> = rest.iter().map(|e| g.edge_id(e.0, e.1).unwrap()).collect();
        let sub = g.edge_subgraph(&ids);
        let (inner, rtr) = level(&sub.graph, cfg, depth + 1, cap, stats)?;
        for (t, v) in inner.reports {
            out.push(t.map(|x| sub.to_parent[x]), sub.to_parent[v]);
        }
        tr.then(&rtr);
    }
    Ok((out, tr))
}

type ClusterRun = (TriangleSet, Transcript, Vec<Edge>, usize);

/// Case 2 for one cluster: enumerate over its edges plus the `E_r` edges at
/// good vertices, and hand back the cluster edges at bad vertices.
fn cluster_case(
    c: &Cluster,
    er: &[Edge],
    deg_er: &[usize],
    ecfg: &ExpanderConfig,
) -> Result<ClusterRun, TriangleError> {
    let mut deg_in: HashMap<VertexId, usize> = HashMap::new();
    for e in &c.edges {
        *deg_in.entry(e.0).or_default() += 1;
        *deg_in.entry(e.1).or_default() += 1;
    }
    let good = |v: VertexId| deg_in.get(&v).is_some_and(|&k| k >= deg_er[v]);
    let mut e_out = Vec::new();
    for &e in er {
        match (deg_in.contains_key(&e.0), deg_in.contains_key(&e.1)) {
            (true, true) => {
                return Err(TriangleError::Precondition(format!(
                    "E_r edge {e:?} inside cluster {}",
                    c.id
                )))
            }
            (true, false) if good(e.0) => e_out.push(e),
            (false, true) if good(e.1) => e_out.push(e),
            _ => {}
        }
    }
    let r_new: Vec<Edge> = c.edges.iter().copied().filter(|e| !good(e.0) || !good(e.1)).collect();
    let (found, etr) = enumerate_expander(&c.edges, &e_out, ecfg)?;
    // Triangles inside E_r^new are left to the recursion.
    let in_new: HashSet<Edge> = r_new.iter().copied().collect();
    let mut kept = TriangleSet::default();
    for (t, v) in found.reports {
        let edges = [Edge(t[0], t[1]), Edge(t[1], t[2]), Edge(t[0], t[2])];
        if !edges.iter().all(|e| in_new.contains(e)) {
            kept.reports.push((t, v));
        }
    }
    Ok((kept, etr, r_new, e_out.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};
    use crate::triangle::brute_force_triangles;

    fn states() -> [EdgeDir; 3] {
        [EdgeDir::Unoriented, EdgeDir::Out, EdgeDir::In]
    }

    /// Orientation of triangle `[0, 1, 2]` given the states of 01, 12, 02.
    fn config(s: [EdgeDir; 3]) -> impl Fn(VertexId, VertexId) -> EdgeDir {
        move |x, y| {
            let (a, b, flip) = if x < y { (x, y, false) } else { (y, x, true) };
            let st = match (a, b) {
                (0, 1) => s[0],
                (1, 2) => s[1],
                _ => s[2],
            };
            match (st, flip) {
                (EdgeDir::Unoriented, _) => EdgeDir::Unoriented,
                (d, false) => d,
                (EdgeDir::Out, true) => EdgeDir::In,
                (EdgeDir::In, true) => EdgeDir::Out,
            }
        }
    }

    fn cyclic(s: [EdgeDir; 3]) -> bool {
        // 0->1->2->0 or the reverse.
        s == [EdgeDir::Out, EdgeDir::Out, EdgeDir::In] || s == [EdgeDir::In, EdgeDir::In, EdgeDir::Out]
    }

    #[test]
    fn owner_examples() {
        // (x,y),(x,z) oriented with x=2, y=0, z=1 -> 0.
        let f = config([EdgeDir::Unoriented, EdgeDir::In, EdgeDir::In]);
        assert_eq!(case1_report_owner([0, 1, 2], f), Some(0));
        let none = config([EdgeDir::Unoriented; 3]);
        assert_eq!(case1_report_owner([0, 1, 2], none), None);
        // Sink z=2 with sources x=1, y=0 -> 0.
        let f = config([EdgeDir::Unoriented, EdgeDir::Out, EdgeDir::Out]);
        assert_eq!(case1_report_owner([0, 1, 2], f), Some(0));
        // Single oriented edge 0->2: vertex 1 reports.
        let f = config([EdgeDir::Unoriented, EdgeDir::Unoriented, EdgeDir::Out]);
        assert_eq!(case1_report_owner([0, 1, 2], f), Some(1));
    }

    #[test]
    fn every_acyclic_configuration_has_one_knowing_owner() {
        let mut seen = 0;
        for a in states() {
            for b in states() {
                for c in states() {
                    let s = [a, b, c];
                    if s == [EdgeDir::Unoriented; 3] || cyclic(s) {
                        continue;
                    }
                    seen += 1;
                    let f = config(s);
                    let owner = case1_report_owner([0, 1, 2], &f).unwrap();
                    // The owner must learn the opposite edge from an announcement.
                    let others: Vec<_> = (0..3).filter(|&v| v != owner).collect();
                    assert_ne!(f(others[0], others[1]), EdgeDir::Unoriented, "{s:?}");
                }
            }
        }
        assert_eq!(seen, 24);
    }

    fn check(g: &Graph, seed: u64, force: bool) {
        let cfg = GeneralConfig {
            force_partition: force,
            ..GeneralConfig::new(0.5, seed)
        };
        let (t, tr) = enumerate_general(g, &cfg).unwrap();
        assert_eq!(t.triangles(), brute_force_triangles(g).unwrap().triangles());
        assert!(t.is_exactly_once());
        assert_eq!(tr.routing.violations, 0);
    }

    #[test]
    fn small_graphs() {
        for spec in ["clique:n=4", "cycle:n=5", "barbell:k=16,bridges=1", "clique:n=30"] {
            let g = generate(&spec.parse().unwrap(), 0).unwrap();
            for force in [false, true] {
                check(&g, 1, force);
            }
        }
        let k4 = generate(&GeneratorSpec::Clique { n: 4 }, 0).unwrap();
        assert_eq!(count_triangles(&k4, 0.5, 0).unwrap(), 4);
        assert!(detect_triangle(&k4, 0.5, 0).unwrap());
        let cube = generate(&GeneratorSpec::Hypercube { d: 4 }, 0).unwrap();
        assert!(!detect_triangle(&cube, 0.5, 0).unwrap());
    }

    #[test]
    fn mixed_structure() {
        // Dense blobs on a path: clusters, E_s and E_r all appear for small delta.
        let g = generate(&GeneratorSpec::CliqueChain { blobs: 4, size: 12 }, 0).unwrap();
        for seed in 0..3 {
            for delta in [0.3, 0.5, 0.8] {
                let cfg = GeneralConfig::new(delta, seed);
                let (t, _) = enumerate_general(&g, &cfg).unwrap();
                assert_eq!(t.triangles(), brute_force_triangles(&g).unwrap().triangles());
                assert!(t.is_exactly_once());
            }
        }
    }

    #[test]
    fn bad_vertices_defer_to_the_recursion() {
        // K6 cluster on 0..6. Vertices 0 and 1 have more E_r edges than
        // cluster edges, so they are bad; 2 and 3 stay good.
        let cluster_edges: Vec<Edge> = (0..6).flat_map(|u| (u + 1..6).map(move |v| Edge(u, v))).collect();
        let mut er: Vec<Edge> = Vec::new();
        for x in 6..12 {
            er.push(Edge(0, x));
            er.push(Edge(1, x));
        }
        er.extend([Edge(2, 6), Edge(2, 7), Edge(3, 7)]);
        let mut deg_er = vec![0; 12];
        for e in &er {
            deg_er[e.0] += 1;
            deg_er[e.1] += 1;
        }
        let c = Cluster {
            id: 0,
            vertices: (0..6).collect(),
            edges: cluster_edges.clone(),
        };
        let full = Graph::from_edges(12, cluster_edges.iter().chain(&er).map(|e| (e.0, e.1))).unwrap();
        for force in [false, true] {
            let ecfg = ExpanderConfig {
                force_partition: force,
                ..ExpanderConfig::new(3)
            };
            let (kept, _, r_new, outs) = cluster_case(&c, &er, &deg_er, &ecfg).unwrap();
            assert_eq!(outs, 3);
            assert_eq!(r_new.len(), 9);
            assert!(kept.is_exactly_once());
            assert!(kept.triangles().contains(&[2, 3, 7]));
            assert!(!kept.triangles().contains(&[0, 1, 2]));
            // What the cluster keeps and what the next level can see split the
            // triangles of the whole graph.
            let rest = Graph::from_edges(12, er.iter().chain(&r_new).map(|e| (e.0, e.1))).unwrap();
            let mut all = kept.triangles();
            let later = brute_force_triangles(&rest).unwrap().triangles();
            assert!(later.iter().all(|t| !all.contains(t)));
            all.extend(later);
            all.sort_unstable();
            assert_eq!(all, brute_force_triangles(&full).unwrap().triangles());
        }
    }
}
