use serde::{Deserialize, Serialize};

use super::{DecompError, Params};
use crate::graph::{conductance, Cut, EdgeId, Graph, VertexId, VertexSet};
use crate::math::log2m;
use crate::runtime::{bfs_build, broadcast, pipelined_convergecast};

/// `a_j * 12 log m <= min(prefix, suffix)` for 1-based `j`, with the sums
/// excluding `a_j` itself.
fn balanced_at(a: &[u64], prefix: &[u64], j: usize, logm: f64) -> bool {
    let total = prefix[a.len()];
    let before = prefix[j - 1];
    let after = total - prefix[j];
    a[j - 1] as f64 * 12.0 * logm <= before.min(after) as f64
}

/// Index in `[D/4, 3D/4]` (1-based) with `a_j <= min(prefix, suffix) / (12 log m)`.
///
/// Scans the lighter half first as in the existence argument; if that scan
/// comes up empty (only possible when the length precondition is not met)
/// the whole middle range is tried before giving up.
pub fn balanced_index_scan(a: &[u64], m: usize) -> Option<usize> {
    let d = a.len();
    if d == 0 {
        return None;
    }
    let logm = log2m(m);
    let mut prefix = vec![0u64; d + 1];
    for i in 0..d {
        prefix[i + 1] = prefix[i] + a[i];
    }
    let lo = d.div_ceil(4).max(1);
    let hi_half = d / 2;
    let heavy_front = prefix[hi_half] > prefix[d] - prefix[hi_half];
    for k in lo..=hi_half {
        // With the sequence reversed, index k of the scan is d + 1 - k here.
        let j = if heavy_front { d + 1 - k } else { k };
        // Mirroring ceil(D/4) can land one past 3D/4.
        if 4 * j > 3 * d {
            continue;
        }
        if balanced_at(a, &prefix, j, logm) {
            return Some(j);
        }
    }
    (lo..=(3 * d) / 4).find(|&j| balanced_at(a, &prefix, j, logm))
}

/// [`balanced_index_scan`] with its preconditions enforced:
/// `D >= 48 log^2 m`, every `a_i >= 1`, and `sum a_i <= m`.
pub fn balanced_index(a: &[u64], m: usize) -> Result<usize, DecompError> {
    let d = a.len() as f64;
    let need = 48.0 * log2m(m).powi(2);
    if d < need {
        return Err(DecompError::Precondition(format!(
            "sequence length {d} below 48 log^2 m = {need:.1}"
        )));
    }
    if a.iter().any(|&x| x == 0) {
        return Err(DecompError::Precondition("sequence has a zero entry".into()));
    }
    if a.iter().sum::<u64>() > m as u64 {
        return Err(DecompError::Precondition("sequence sum exceeds m".into()));
    }
    balanced_index_scan(a, m)
        .ok_or_else(|| DecompError::Precondition("no balanced index in [D/4, 3D/4]".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighDiameterCut {
    /// `C`: BFS levels `1..=j` with the root on level 1.
    pub cut: Cut,
    pub j: usize,
    /// `D~`, the root's eccentricity.
    pub depth: usize,
    /// `(p_1, ..., p_D~)`: edges between consecutive levels.
    pub level_edges: Vec<u64>,
    /// Whether `min(|C|, |C_bar|) >= (D~/32) n^delta` held.
    pub size_bound_holds: bool,
}

/// Sparse cut of a connected graph along BFS levels from `root`.
///
/// `g` is the subgraph itself; degrees and the `V_low` test are taken in it,
/// while `n^delta` and `log m` come from the whole network through `params`.
pub fn high_diameter_cut(
    g: &Graph,
    root: VertexId,
    params: &Params,
) -> Result<(HighDiameterCut, u64), DecompError> {
    let all: Vec<VertexId> = (0..g.n()).collect();
    let (tree, bfs_rounds) = bfs_build(g, &all, root)?;
    if tree.members.len() != g.n() {
        return Err(DecompError::Precondition("subgraph is not connected".into()));
    }
    let depth = tree.depth;
    if (depth as f64) < params.diameter_threshold() {
        return Err(DecompError::Precondition(format!(
            "eccentricity {depth} below threshold {:.1}",
            params.diameter_threshold()
        )));
    }
    let half = params.n_delta() / 2.0;
    let low = |v: VertexId| g.degree(v) as f64 <= half;
    if g.edges().iter().any(|e| low(e.0) && low(e.1)) {
        return Err(DecompError::Precondition("edge between two low-degree vertices".into()));
    }

    let level = |v: VertexId| tree.level[v].unwrap();
    let mut p = vec![0u64; depth];
    for e in g.edges() {
        let (a, b) = (level(e.0), level(e.1));
        if a != b {
            p[a.min(b)] += 1;
        }
    }
    let j = if params.case1_scale == 1.0 {
        balanced_index(&p, params.m)?
    } else {
        balanced_index_scan(&p, params.m)
            .ok_or_else(|| DecompError::Precondition("no balanced level under scaled threshold".into()))?
    };
    // Level i of the balanced sequence is BFS distance i - 1.
    let side = VertexSet::from_members(g.n(), (0..g.n()).filter(|&v| level(v) < j));
    let cut = conductance(g, &side)?;
    let small = side.len().min(g.n() - side.len()) as f64;
    let rounds = bfs_rounds + pipelined_convergecast(&tree, depth) + broadcast(&tree, 1);
    Ok((
        HighDiameterCut {
            cut,
            j,
            depth,
            level_edges: p,
            size_bound_holds: small >= depth as f64 / 32.0 * params.n_delta(),
        },
        rounds,
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Peel {
    /// `E^diamond`: edges that survive, as ids of the peeled graph.
    pub remaining: Vec<EdgeId>,
    /// `(owner, edge)` pairs of `E_s^diamond`, oriented away from the owner.
    pub owned: Vec<(VertexId, EdgeId)>,
    pub iterations: usize,
    pub peeled_vertices: usize,
}

/// Batch peeling: each iteration removes every vertex with at most
/// `threshold` remaining edges, orienting its edges away from it (away from
/// the smaller id when both ends go together), and stops after an iteration
/// that removed at most `threshold / 2` vertices.
pub fn low_degree_peel(g: &Graph, threshold: f64) -> Result<(Peel, u64), DecompError> {
    let n = g.n();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut alive_edge = vec![true; g.m()];
    let mut out = Peel::default();
    loop {
        let z: Vec<VertexId> = (0..n).filter(|&v| deg[v] > 0 && deg[v] as f64 <= threshold).collect();
        let mut in_z = vec![false; n];
        for &v in &z {
            in_z[v] = true;
        }
        for &v in &z {
            for &w in g.neighbors(v) {
                let e = g.edge_id(v, w).unwrap();
                if !alive_edge[e] || (in_z[w] && w < v) {
                    continue;
                }
                alive_edge[e] = false;
                out.owned.push((v, e));
            }
        }
        for &v in &z {
            for &w in g.neighbors(v) {
                if !in_z[w] && deg[w] > 0 {
                    deg[w] -= 1;
                }
            }
        }
        for &v in &z {
            deg[v] = 0;
        }
        out.iterations += 1;
        out.peeled_vertices += z.len();
        if z.len() as f64 <= threshold / 2.0 {
            break;
        }
    }
    out.remaining = (0..g.m()).filter(|&e| alive_edge[e]).collect();
    out.owned.sort_unstable();

    let rounds = if g.n() == 0 {
        0
    } else {
        let root = (0..n).find(|&v| g.degree(v) > 0).unwrap_or(0);
        let all: Vec<VertexId> = (0..n).collect();
        let (tree, bfs_rounds) = bfs_build(g, &all, root)?;
        // One round per iteration to learn remaining degrees, the counts
        // pipelined up the tree, and one broadcast to stop (and roll back
        // the iterations run speculatively past the last one).
        bfs_rounds + out.iterations as u64 + pipelined_convergecast(&tree, 1) + broadcast(&tree, 1)
    };
    Ok((out, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    #[test]
    fn uniform_sequence_index() {
        // The sum exceeds m here, so only the scan applies.
        let a = vec![1u64; 4800];
        assert!(balanced_index(&a, 1024).is_err());
        let j = balanced_index_scan(&a, 1024).unwrap();
        assert_eq!(j, 1200);
        assert!((1200..=3600).contains(&j));
        assert!(((j - 1).min(4800 - j)) as f64 >= 120.0);
    }

    #[test]
    fn index_avoids_spike() {
        let mut a = vec![1u64; 5000];
        a[1300] = 4000;
        let j = balanced_index_scan(&a, 1 << 14).unwrap();
        assert_ne!(j, 1301);
    }

    #[test]
    fn heavy_front_stays_in_range() {
        // D = 1 mod 4 with the heavier half in front; the mirrored first
        // candidate would be 3D/4 + 1/4.
        let d = 12289;
        let a: Vec<u64> = (0..d).map(|i| if i < d / 2 { 5 } else { 1 }).collect();
        let j = balanced_index(&a, 1 << 16).unwrap();
        assert!(4 * j <= 3 * d && 4 * j >= d, "j = {j}");
    }

    #[test]
    fn short_sequence_rejected() {
        assert!(balanced_index(&[1, 1, 1], 1024).is_err());
    }

    #[test]
    fn peel_examples() {
        let star = generate(&GeneratorSpec::Star { leaves: 5 }, 0).unwrap();
        let (p, _) = low_degree_peel(&star, 4.0).unwrap();
        assert!(p.remaining.is_empty());
        assert_eq!(p.owned.len(), 5);
        // Center is vertex 0; every edge is owned by its leaf.
        assert!(p.owned.iter().all(|&(v, _)| v != 0));

        let k5 = generate(&GeneratorSpec::Clique { n: 5 }, 0).unwrap();
        let (p, _) = low_degree_peel(&k5, 2.0).unwrap();
        assert_eq!(p.remaining.len(), 10);
        assert_eq!(p.iterations, 1);

        let path = generate(&GeneratorSpec::Path { n: 10 }, 0).unwrap();
        let (p, _) = low_degree_peel(&path, 4.0).unwrap();
        assert!(p.remaining.is_empty());
        assert!(p.iterations <= 2);
        // Both ends peeled together: owned by the smaller id.
        assert!(p.owned.iter().all(|&(v, e)| path.edge(e).0 == v));
    }
}
