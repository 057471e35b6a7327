use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Edge, Graph, VertexId};

/// Per-vertex sets of edges oriented away from their owner.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    /// Owner -> edges oriented away from it; only nonempty lists are stored.
    pub out: BTreeMap<VertexId, Vec<Edge>>,
}

impl Orientation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, owner: VertexId, e: Edge) {
        self.out.entry(owner).or_default().push(e);
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        self.out.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_edges(v).len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.values().map(Vec::len).sum()
    }

    /// Edge -> owner.
    pub fn owners(&self) -> HashMap<Edge, VertexId> {
        let mut map = HashMap::with_capacity(self.edge_count());
        for (&v, es) in &self.out {
            for &e in es {
                map.insert(e, v);
            }
        }
        map
    }

    pub fn merge(&mut self, other: Orientation) {
        for (v, es) in other.out {
            self.out.entry(v).or_default().extend(es);
        }
    }

    /// Sorts each list so equal orientations serialize identically.
    pub fn normalize(&mut self) {
        self.out.retain(|_, es| !es.is_empty());
        for es in self.out.values_mut() {
            es.sort_unstable();
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationReport {
    pub passes: bool,
    /// (vertex, out-degree) for every vertex above the cap.
    pub over_cap: Vec<(VertexId, usize)>,
    /// Listed edges not incident to their owner or not present in the graph.
    pub foreign_edges: Vec<(VertexId, Edge)>,
    /// Edges listed under more than one owner (or twice under one).
    pub duplicated: Vec<Edge>,
    /// Vertices left on a directed cycle after topological elimination.
    pub cyclic_vertices: Vec<VertexId>,
}

pub fn verify_orientation(g: &Graph, o: &Orientation, cap: usize) -> OrientationReport {
    let mut report = OrientationReport::default();
    let mut seen: HashMap<Edge, usize> = HashMap::new();
    let n = g.n();
    let mut succ: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (&v, es) in &o.out {
        if es.len() > cap {
            report.over_cap.push((v, es.len()));
        }
        for &e in es {
            if v >= n || !e.touches(v) || !g.has_edge(e.0, e.1) {
                report.foreign_edges.push((v, e));
                continue;
            }
            *seen.entry(e).or_default() += 1;
            let w = e.other(v);
            succ[v].push(w);
            indeg[w] += 1;
        }
    }
    report.duplicated = seen
        .into_iter()
        .filter(|&(_, c)| c > 1)
        .map(|(e, _)| e)
        .collect();
    report.duplicated.sort_unstable();

    let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop_front() {
        removed += 1;
        for &w in &succ[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if removed < n {
        report.cyclic_vertices = (0..n).filter(|&v| indeg[v] > 0).collect();
    }
    report.passes = report.over_cap.is_empty()
        && report.foreign_edges.is_empty()
        && report.duplicated.is_empty()
        && report.cyclic_vertices.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_owned_by_leaves() {
        let g = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
        let mut o = Orientation::new();
        for i in 1..5 {
            o.push(i, Edge::new(0, i));
        }
        assert!(verify_orientation(&g, &o, 1).passes);
    }

    #[test]
    fn cyclic_triangle_fails() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut o = Orientation::new();
        o.push(0, Edge::new(0, 1));
        o.push(1, Edge::new(1, 2));
        o.push(2, Edge::new(0, 2));
        let r = verify_orientation(&g, &o, 3);
        assert!(!r.passes);
        assert_eq!(r.cyclic_vertices, vec![0, 1, 2]);
    }

    #[test]
    fn cap_exceeded_fails() {
        let g = Graph::from_edges(4, (1..4).map(|i| (0, i))).unwrap();
        let mut o = Orientation::new();
        for i in 1..4 {
            o.push(0, Edge::new(0, i));
        }
        assert!(verify_orientation(&g, &o, 3).passes);
        let r = verify_orientation(&g, &o, 2);
        assert!(!r.passes);
        assert_eq!(r.over_cap, vec![(0, 3)]);
    }

    #[test]
    fn foreign_and_duplicate_edges_fail() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut o = Orientation::new();
        o.push(2, Edge::new(0, 1));
        assert!(!verify_orientation(&g, &o, 5).passes);
        let mut o = Orientation::new();
        o.push(0, Edge::new(0, 1));
        o.push(1, Edge::new(0, 1));
        assert_eq!(verify_orientation(&g, &o, 5).duplicated, vec![Edge(0, 1)]);
    }
}
