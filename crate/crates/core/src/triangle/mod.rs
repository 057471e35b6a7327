//! Triangle detection, counting and enumeration, plus listing of small
//! subgraphs in well-mixing graphs.
//!
//! Every algorithm here produces per-vertex report lists. A triangle found by
//! two vertices would be counted twice, so all paths attribute each triangle
//! to exactly one reporter and [`TriangleSet::is_exactly_once`] checks it.

mod expander;
mod general;
mod subgraphs;
mod tuples;

pub use expander::{
    easy_case_threshold, edge_concentration_probe, enumerate_expander, ExpanderConfig, ProbeReport,
};
pub use general::{
    case1_report_owner, count_triangles, detect_triangle, enumerate_general,
    enumerate_general_with_stats, EdgeDir, GeneralConfig, LevelStats,
};
pub use subgraphs::{
    brute_force_cliques, brute_force_occurrences, enumerate_subgraphs, Occurrence, Pattern,
    SubgraphConfig, SubgraphSet,
};
pub use tuples::{allocate_triads, allocate_tuples, part_count, TupleAllocation};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::DecompError;
use crate::graph::{Graph, VertexId};
use crate::routing::RoutingError;
use crate::runtime::RuntimeError;

/// Largest edge count the oracles accept.
pub const ORACLE_MAX_EDGES: usize = 1_000_000;

pub type Triangle = [VertexId; 3];

#[derive(Debug, Error)]
pub enum TriangleError {
    #[error("graph has {0} edges, above the oracle cap")]
    TooLarge(usize),
    #[error("vertex {vertex} has deg_in {deg_in} < deg_out {deg_out}")]
    OutDegree { vertex: VertexId, deg_in: usize, deg_out: usize },
    #[error("input graph is disconnected")]
    Disconnected,
    #[error("{tuples} tuples exceed the allocation capacity {capacity}")]
    Capacity { tuples: usize, capacity: usize },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("recursion depth {depth} exceeds the cap {cap}")]
    RecursionCap { depth: usize, cap: usize },
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Union of the report lists `L_v`: one `(triangle, reporter)` pair per report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleSet {
    pub reports: Vec<(Triangle, VertexId)>,
}

impl TriangleSet {
    pub fn push(&mut self, t: Triangle, reporter: VertexId) {
        self.reports.push((canonical(t), reporter));
    }

    pub fn extend(&mut self, other: TriangleSet) {
        self.reports.extend(other.reports);
    }

    /// Sorted by triangle, then reporter.
    pub fn normalize(&mut self) {
        self.reports.sort_unstable();
    }

    /// Number of reports, i.e. `sum_v |L_v|`.
    pub fn count(&self) -> usize {
        self.reports.len()
    }

    /// Distinct triangles, sorted.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut t: Vec<Triangle> = self.reports.iter().map(|r| r.0).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn is_exactly_once(&self) -> bool {
        self.triangles().len() == self.reports.len()
    }

    /// `t_v` for every vertex that reported something.
    pub fn per_reporter(&self) -> BTreeMap<VertexId, usize> {
        let mut out = BTreeMap::new();
        for &(_, v) in &self.reports {
            *out.entry(v).or_insert(0) += 1;
        }
        out
    }

    pub fn reporter_of(&self, t: Triangle) -> Vec<VertexId> {
        let t = canonical(t);
        self.reports.iter().filter(|r| r.0 == t).map(|r| r.1).collect()
    }
}

pub fn canonical(mut t: Triangle) -> Triangle {
    t.sort_unstable();
    t
}

/// Every triangle of `g` by sorted-adjacency intersection over `u < v < w`.
/// The oracle has no reporters; each triangle is attributed to its smallest vertex.
pub fn brute_force_triangles(g: &Graph) -> Result<TriangleSet, TriangleError> {
    if g.m() > ORACLE_MAX_EDGES {
        return Err(TriangleError::TooLarge(g.m()));
    }
    let mut out = TriangleSet::default();
    for_each_triangle(g, |t| out.reports.push((t, t[0])));
    Ok(out)
}

/// Calls `f` on every triangle of `g`, sorted, in lexicographic order.
pub(crate) fn for_each_triangle(g: &Graph, mut f: impl FnMut(Triangle)) {
    for u in 0..g.n() {
        let nu = g.neighbors(u);
        let start = nu.partition_point(|&x| x <= u);
        for (i, &v) in nu[start..].iter().enumerate() {
            let nv = g.neighbors(v);
            let mut a = &nu[start + i + 1..];
            let mut b = &nv[nv.partition_point(|&x| x <= v)..];
            while let (Some(&x), Some(&y)) = (a.first(), b.first()) {
                match x.cmp(&y) {
                    std::cmp::Ordering::Less => a = &a[1..],
                    std::cmp::Ordering::Greater => b = &b[1..],
                    std::cmp::Ordering::Equal => {
                        f([u, v, x]);
                        a = &a[1..];
                        b = &b[1..];
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    #[test]
    fn oracle_examples() {
        let k4 = generate(&GeneratorSpec::Clique { n: 4 }, 0).unwrap();
        assert_eq!(brute_force_triangles(&k4).unwrap().count(), 4);
        let c5 = generate(&GeneratorSpec::Cycle { n: 5 }, 0).unwrap();
        assert_eq!(brute_force_triangles(&c5).unwrap().count(), 0);
        let k5 = generate(&GeneratorSpec::Clique { n: 5 }, 0).unwrap();
        let t = brute_force_triangles(&k5).unwrap();
        assert_eq!(t.count(), 10);
        assert!(t.is_exactly_once());
    }

    #[test]
    fn oracle_matches_cubic_scan() {
        let g = generate(&"er:n=40,p=0.3".parse().unwrap(), 5).unwrap();
        let mut slow = Vec::new();
        for a in 0..40 {
            for b in a + 1..40 {
                for c in b + 1..40 {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        slow.push([a, b, c]);
                    }
                }
            }
        }
        assert_eq!(brute_force_triangles(&g).unwrap().triangles(), slow);
    }
}
