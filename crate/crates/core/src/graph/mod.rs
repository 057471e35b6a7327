//! Immutable undirected simple graphs and the exact oracles built on them.
//!
//! Everything else in the crate is expressed against [`Graph`]: subgraphs are
//! materialized as fresh `Graph` values with an explicit mapping back to the
//! parent's vertex and edge ids (see [`Subgraph`]), so algorithms never have to
//! reason about "the degree in which graph" implicitly.

mod cut;
mod generators;
mod io;
mod orientation;
mod spectral;
mod walk;

pub use cut::{
    boundary, conductance, sparsest_cut_bruteforce, volume, Cut, CutSummary,
    SPARSEST_CUT_MAX_VERTICES,
};
pub use generators::{generate, GeneratorSpec};
pub use io::{parse_edge_list, read_edge_list, write_edge_list};
pub use orientation::{verify_orientation, Orientation, OrientationReport};
pub use spectral::{normalized_laplacian_lambda2, spectral_gap_estimate};
pub use spectral::DENSE_EIGEN_MAX_VERTICES;
pub use walk::{
    lazy_walk_matrix, mixing_time_capped, mixing_time_exact, satisfies_mixing_condition,
    stationary, MIXING_MAX_VERTICES,
};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
/// Index into [`Graph::edges`].
pub type EdgeId = usize;

/// An undirected edge, always stored with `.0 < .1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u < v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {vertex}{}", line_suffix(*.line))]
    SelfLoop { vertex: VertexId, line: Option<usize> },
    #[error("duplicate edge {u}-{v}{}", line_suffix(*.line))]
    DuplicateEdge {
        u: VertexId,
        v: VertexId,
        line: Option<usize>,
    },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty side: conductance needs both sides of the cut nonempty")]
    EmptySide,
    #[error("graph has {n} vertices; exhaustive scan is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("graph is disconnected: infinite mixing time")]
    InfiniteMixingTime,
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),
    #[error("io error: {0}")]
    Io(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" on line {l}")).unwrap_or_default()
}

/// Undirected simple graph over vertices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { vertex: u, line: None });
            }
            list.push(Edge::new(u, v));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge {
                u: w[0].0,
                v: w[0].1,
                line: None,
            });
        }
        Ok(Self::from_sorted_unique(n, list))
    }

    /// Like [`Graph::from_edges`] but silently drops duplicates; self-loops still error.
    pub fn from_edges_dedup<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { vertex: u, line: None });
            }
            list.push(Edge::new(u, v));
        }
        list.sort_unstable();
        list.dedup();
        Ok(Self::from_sorted_unique(n, list))
    }

    fn from_sorted_unique(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for e in &edges {
            adj[e.0].push(e.1);
            adj[e.1].push(e.0);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { adj, edges }
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    /// Edges sorted lexicographically; the position of an edge is its [`EdgeId`].
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.edges.binary_search(&Edge::new(u, v)).ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn total_volume(&self) -> u64 {
        2 * self.m() as u64
    }

    /// Hop distances from `root`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, root: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        dist[root] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn eccentricity(&self, v: VertexId) -> usize {
        self.bfs_distances(v).into_iter().flatten().max().unwrap_or(0)
    }

    /// Diameter of the component containing the vertices; computed on demand.
    pub fn diameter(&self) -> usize {
        (0..self.n()).map(|v| self.eccentricity(v)).max().unwrap_or(0)
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.connected_components().len() == 1
    }

    /// Subgraph formed by the given edges (by id) and their endpoints.
    pub fn edge_subgraph(&self, edge_ids: &[EdgeId]) -> Subgraph {
        let mut verts: Vec<VertexId> = edge_ids
            .iter()
            .flat_map(|&e| {
                let Edge(u, v) = self.edges[e];
                [u, v]
            })
            .collect();
        verts.sort_unstable();
        verts.dedup();
        let local_edges = edge_ids.iter().map(|&e| {
            let Edge(u, v) = self.edges[e];
            (
                verts.binary_search(&u).unwrap(),
                verts.binary_search(&v).unwrap(),
            )
        });
        let graph = Graph::from_edges_dedup(verts.len(), local_edges)
            .expect("edge ids of a simple graph form a simple subgraph");
        Subgraph::new(self, graph, verts)
    }

    /// Subgraph induced by a vertex list.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Subgraph {
        let mut verts = vertices.to_vec();
        verts.sort_unstable();
        verts.dedup();
        let mut local = Vec::new();
        for (i, &u) in verts.iter().enumerate() {
            for &w in &self.adj[u] {
                if w > u {
                    if let Ok(j) = verts.binary_search(&w) {
                        local.push((i, j));
                    }
                }
            }
        }
        let graph = Graph::from_edges(verts.len(), local).expect("induced subgraph is simple");
        Subgraph::new(self, graph, verts)
    }
}

/// A graph extracted from a parent, with id maps in both directions.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: Graph,
    /// Local vertex id -> parent vertex id (sorted ascending).
    pub to_parent: Vec<VertexId>,
    /// Local edge id -> parent edge id.
    pub edge_to_parent: Vec<EdgeId>,
}

impl Subgraph {
    fn new(parent: &Graph, graph: Graph, to_parent: Vec<VertexId>) -> Self {
        let edge_to_parent = graph
            .edges()
            .iter()
            .map(|e| {
                parent
                    .edge_id(to_parent[e.0], to_parent[e.1])
                    .expect("subgraph edge exists in parent")
            })
            .collect();
        Subgraph {
            graph,
            to_parent,
            edge_to_parent,
        }
    }

    pub fn local_of(&self, parent_vertex: VertexId) -> Option<VertexId> {
        self.to_parent.binary_search(&parent_vertex).ok()
    }

    pub fn parent_edge(&self, local: Edge) -> Edge {
        Edge::new(self.to_parent[local.0], self.to_parent[local.1])
    }
}

/// Membership bitmap over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: Vec<bool>,
    len: usize,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            bits: vec![false; n],
            len: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        VertexSet {
            bits: vec![true; n],
            len: n,
        }
    }

    /// Panics if a member is outside `0..n`.
    pub fn from_members(n: usize, members: impl IntoIterator<Item = VertexId>) -> Self {
        let mut s = Self::new(n);
        for v in members {
            s.insert(v);
        }
        s
    }

    pub fn insert(&mut self, v: VertexId) -> bool {
        let fresh = !self.bits[v];
        if fresh {
            self.bits[v] = true;
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, v: VertexId) -> bool {
        let present = self.bits[v];
        if present {
            self.bits[v] = false;
            self.len -= 1;
        }
        present
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.bits.get(v).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Size of the universe `0..n`.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(v, &b)| b.then_some(v))
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.iter().collect()
    }

    pub fn complement(&self) -> VertexSet {
        VertexSet {
            bits: self.bits.iter().map(|b| !b).collect(),
            len: self.bits.len() - self.len,
        }
    }
}
