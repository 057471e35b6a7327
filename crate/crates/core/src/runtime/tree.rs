use serde::{Deserialize, Serialize};

use super::{run, Ctx, Message, RunConfig, RuntimeError, VertexProgram};
use crate::graph::{Graph, VertexId};

/// BFS tree over one connected component, indexed by the ids of the graph it
/// was built on. Vertices outside the component have no level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsTree {
    pub root: VertexId,
    /// Component vertices, ascending.
    pub members: Vec<VertexId>,
    pub parent: Vec<Option<VertexId>>,
    pub level: Vec<Option<usize>>,
    pub depth: usize,
}

impl BfsTree {
    pub fn children(&self) -> Vec<Vec<VertexId>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for &v in &self.members {
            if let Some(p) = self.parent[v] {
                ch[p].push(v);
            }
        }
        ch
    }

    /// Members grouped by level; index 0 holds the root.
    pub fn levels(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.depth + 1];
        for &v in &self.members {
            out[self.level[v].unwrap()].push(v);
        }
        out
    }
}

struct Bfs;

#[derive(Clone, Copy)]
struct BfsState {
    level: Option<u64>,
    parent: Option<VertexId>,
}

impl VertexProgram for Bfs {
    type State = BfsState;

    fn init(&self, ctx: &mut Ctx<'_>) -> BfsState {
        // Local id 0 is the root: the component is relabeled before the run.
        if ctx.vertex == 0 {
            ctx.send_all(&Message::new(0, &[0]));
            ctx.halt();
            return BfsState {
                level: Some(0),
                parent: None,
            };
        }
        BfsState {
            level: None,
            parent: None,
        }
    }

    fn on_round(&self, st: &mut BfsState, ctx: &mut Ctx<'_>, inbox: &[(VertexId, Message)]) {
        let Some((from, msg)) = inbox.first() else {
            return;
        };
        let level = msg.words[0] + 1;
        st.level = Some(level);
        st.parent = Some(*from);
        for i in 0..ctx.neighbors.len() {
            let w = ctx.neighbors[i];
            if inbox.binary_search_by_key(&w, |(s, _)| *s).is_err() {
                ctx.send(w, Message::new(0, &[level]));
            }
        }
        ctx.halt();
    }
}

/// Builds a BFS tree of the root's connected part of `component` by running
/// the flooding protocol on it.
/// Parents are the smallest-id neighbor one level up. Charged rounds are the
/// depth plus one round for the leaves to confirm completion.
pub fn bfs_build(
    g: &Graph,
    component: &[VertexId],
    root: VertexId,
) -> Result<(BfsTree, u64), RuntimeError> {
    // Keep only what the root can reach inside `component`, otherwise the
    // flood would wait forever on unreachable vertices.
    let mut allowed = vec![false; g.n()];
    for &v in component {
        allowed[v] = true;
    }
    let mut reach = vec![root];
    allowed[root] = false;
    let mut i = 0;
    while i < reach.len() {
        let u = reach[i];
        i += 1;
        for &w in g.neighbors(u) {
            if allowed[w] {
                allowed[w] = false;
                reach.push(w);
            }
        }
    }
    // Relabel so the root is local vertex 0, the rest in ascending order.
    let mut order: Vec<VertexId> = reach[1..].to_vec();
    order.sort_unstable();
    order.insert(0, root);
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in order.iter().enumerate() {
        local[v] = i;
    }
    let mut edges = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        for &w in g.neighbors(v) {
            let j = local[w];
            if j != usize::MAX && i < j {
                edges.push((i, j));
            }
        }
    }
    let sub = Graph::from_edges(order.len(), edges).expect("induced subgraph is simple");
    let out = run(&sub, &Bfs, &RunConfig::new(0, "bfs"))?;

    let mut parent = vec![None; g.n()];
    let mut level = vec![None; g.n()];
    let mut depth = 0;
    for (i, st) in out.states.iter().enumerate() {
        let v = order[i];
        if let Some(l) = st.level {
            level[v] = Some(l as usize);
            depth = depth.max(l as usize);
            parent[v] = st.parent.map(|p| order[p]);
        }
    }
    let mut members: Vec<VertexId> = order.iter().copied().filter(|&v| level[v].is_some()).collect();
    members.sort_unstable();
    let tree = BfsTree {
        root,
        members,
        parent,
        level,
        depth,
    };
    Ok((tree, depth as u64 + 1))
}

/// Rounds for every vertex to ship `k` items to the root with aggregation at
/// each hop, one item per edge per round. Follows the schedule exactly: a
/// vertex forwards item `i` once it has item `i` from all its children and
/// has forwarded item `i - 1`.
pub fn pipelined_convergecast(tree: &BfsTree, k: usize) -> u64 {
    if k == 0 || tree.depth == 0 {
        return 0;
    }
    let children = tree.children();
    let mut by_level = tree.levels();
    // send[v][i-1]: round in which v forwards item i to its parent.
    let mut send: Vec<Vec<u64>> = vec![Vec::new(); tree.parent.len()];
    let mut root_done = 0;
    while let Some(level) = by_level.pop() {
        for v in level {
            let mut times = Vec::with_capacity(k);
            let mut prev = 0u64;
            for i in 0..k {
                let ready = children[v]
                    .iter()
                    .map(|&c| send[c][i] + 1)
                    .max()
                    .unwrap_or(1);
                let t = ready.max(prev + 1);
                times.push(t);
                prev = t;
            }
            if v == tree.root {
                root_done = children[v].iter().map(|&c| send[c][k - 1]).max().unwrap_or(0);
            } else {
                send[v] = times;
            }
        }
    }
    root_done
}

/// Rounds for the root to push `k` items to every vertex, pipelined.
pub fn broadcast(tree: &BfsTree, k: usize) -> u64 {
    if k == 0 || tree.depth == 0 {
        return 0;
    }
    let children = tree.children();
    let mut send: Vec<Vec<u64>> = vec![Vec::new(); tree.parent.len()];
    send[tree.root] = (1..=k as u64).collect();
    let mut done = 0;
    for level in tree.levels() {
        for v in level {
            for &c in &children[v] {
                let mut times = Vec::with_capacity(k);
                let mut prev = 0u64;
                for i in 0..k {
                    let t = (send[v][i] + 1).max(prev + 1);
                    times.push(t);
                    prev = t;
                }
                done = done.max(send[v][k - 1]);
                send[c] = times;
            }
        }
    }
    done
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    fn tree_of(spec: GeneratorSpec, root: VertexId) -> BfsTree {
        let g = generate(&spec, 0).unwrap();
        let all: Vec<_> = (0..g.n()).collect();
        bfs_build(&g, &all, root).unwrap().0
    }

    #[test]
    fn bfs_depths() {
        let t = tree_of(GeneratorSpec::Path { n: 5 }, 0);
        assert_eq!(t.depth, 4);
        assert_eq!(t.parent[3], Some(2));
        assert_eq!(tree_of(GeneratorSpec::Clique { n: 4 }, 2).depth, 1);
        for r in 0..8 {
            assert_eq!(tree_of(GeneratorSpec::Hypercube { d: 3 }, r).depth, 3);
        }
    }

    #[test]
    fn bfs_matches_sequential_levels() {
        let g = generate(
            &GeneratorSpec::ErdosRenyi { n: 80, p: 0.06, drop_isolated: false },
            4,
        )
        .unwrap();
        let comp = g.connected_components().into_iter().max_by_key(Vec::len).unwrap();
        let (t, charged) = bfs_build(&g, &comp, comp[0]).unwrap();
        let dist = g.bfs_distances(comp[0]);
        for &v in &comp {
            assert_eq!(t.level[v], dist[v]);
            if let Some(p) = t.parent[v] {
                assert!(g.has_edge(p, v));
                assert_eq!(t.level[p].unwrap() + 1, t.level[v].unwrap());
            }
        }
        assert_eq!(charged, t.depth as u64 + 1);
    }

    #[test]
    fn convergecast_schedule() {
        let p5 = tree_of(GeneratorSpec::Path { n: 5 }, 0);
        assert_eq!(pipelined_convergecast(&p5, 1), 4);
        assert_eq!(pipelined_convergecast(&p5, 3), 6);
        let star = tree_of(GeneratorSpec::Star { leaves: 6 }, 0);
        assert_eq!(pipelined_convergecast(&star, 1), 1);
    }

    #[test]
    fn broadcast_schedule() {
        let p5 = tree_of(GeneratorSpec::Path { n: 5 }, 0);
        assert_eq!(broadcast(&p5, 1), 4);
        let k4 = tree_of(GeneratorSpec::Clique { n: 4 }, 0);
        assert_eq!(broadcast(&k4, 5), 5);
        let h = tree_of(GeneratorSpec::Hypercube { d: 4 }, 0);
        assert_eq!(broadcast(&h, 7), 4 + 7 - 1);
    }
}
