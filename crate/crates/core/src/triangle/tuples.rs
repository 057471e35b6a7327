use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::TriangleError;
use crate::graph::{Graph, VertexId};
use crate::routing::IdAssignment;

/// `ceil(n^(1/s))`, computed exactly: the smallest `q` with `q^s >= n`.
pub fn part_count(n: usize, s: usize) -> usize {
    let mut q = ((n.max(1) as f64).powf(1.0 / s as f64).floor() as usize).max(1);
    while (q as u128).pow(s as u32) < n as u128 {
        q += 1;
    }
    while q > 1 && ((q - 1) as u128).pow(s as u32) >= n as u128 {
        q -= 1;
    }
    q
}

/// Sorted class tuples `(i_1 <= ... <= i_s)` over `1..=q` handed out to
/// vertices in id order. Triads are the case `s = 3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleAllocation {
    pub s: usize,
    pub q: usize,
    /// All tuples in lexicographic order, classes 1-based.
    pub tuples: Vec<Vec<usize>>,
    /// Average degree rounded down to a power of two.
    pub avg_degree: usize,
    /// Allocation class of each vertex (0: receives nothing), by local vertex.
    pub class: Vec<usize>,
    /// Contiguous tuple range of each vertex, by local vertex.
    pub ranges: Vec<Range<usize>>,
    /// Owner (local vertex) of each tuple.
    pub owner: Vec<VertexId>,
    /// Dense lookup from the base-`q` code of a sorted tuple to its index.
    slot: Vec<u32>,
}

impl TupleAllocation {
    fn code(&self, sorted: &[usize]) -> usize {
        sorted.iter().fold(0, |acc, &c| acc * self.q + (c - 1))
    }

    /// Index of the tuple with these classes (1-based, any order).
    pub fn index_of(&self, classes: &[usize]) -> usize {
        let mut t = classes.to_vec();
        t.sort_unstable();
        self.slot[self.code(&t)] as usize
    }

    pub fn owner_of(&self, classes: &[usize]) -> VertexId {
        self.owner[self.index_of(classes)]
    }

    /// Indices of the tuples whose multiset contains `{a, b}`.
    pub fn containing(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut rest = vec![1; self.s - 2];
        loop {
            let mut t = rest.clone();
            t.push(a);
            t.push(b);
            t.sort_unstable();
            out.push(self.index_of(&t));
            // Next nondecreasing sequence for the remaining s - 2 slots.
            let Some(i) = (0..rest.len()).rev().find(|&i| rest[i] < self.q) else {
                break;
            };
            rest[i] += 1;
            for j in i + 1..rest.len() {
                rest[j] = rest[i];
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn all_tuples(q: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut t = vec![1; s];
    loop {
        out.push(t.clone());
        let Some(i) = (0..s).rev().find(|&i| t[i] < q) else {
            return out;
        };
        t[i] += 1;
        for j in i + 1..s {
            t[j] = t[i];
        }
    }
}

/// Hands out `C(q + s - 1, s)` tuples in id order. A vertex whose degree is
/// `k * avg_degree` with `k in [2^(i-2), 2^(i-1))` is in class `i` and takes
/// the next `2^i` tuples; vertices with `k < 1/2` take none. Only the degree
/// classes encoded in `ids` are used, so every vertex can run this locally.
pub fn allocate_tuples(
    ids: &IdAssignment,
    g_in: &Graph,
    q: usize,
    s: usize,
) -> Result<TupleAllocation, TriangleError> {
    let n = ids.len();
    if n == 0 || g_in.m() == 0 || s < 2 || q == 0 {
        return Err(TriangleError::Precondition("allocation needs a graph with edges".into()));
    }
    // avg_degree = 2^a with a the largest integer such that 2^a n <= 2m.
    let two_m = 2 * g_in.m() as u128;
    let mut a = 0u32;
    while (n as u128) << (a + 1) <= two_m {
        a += 1;
    }
    let tuples = all_tuples(q, s);
    let mut alloc = TupleAllocation {
        s,
        q,
        avg_degree: 1 << a,
        class: vec![0; g_in.n()],
        ranges: vec![0..0; g_in.n()],
        owner: vec![usize::MAX; tuples.len()],
        slot: vec![u32::MAX; q.pow(s as u32)],
        tuples,
    };
    for (i, t) in alloc.tuples.iter().enumerate() {
        let c = alloc.code(t);
        alloc.slot[c] = i as u32;
    }
    let mut next = 0;
    let mut capacity = 0usize;
    for id in 1..=n {
        let v = ids.old_id[id - 1];
        let log_deg = ids.class_of_id(id) as i64;
        // k < 1/2 iff deg < 2^(a-1) iff floor(log deg) <= a - 2.
        let class = log_deg - a as i64 + 2;
        if class < 1 {
            continue;
        }
        alloc.class[v] = class as usize;
        let share = 1usize.checked_shl(class as u32).unwrap_or(usize::MAX);
        capacity = capacity.saturating_add(share);
        let end = next + share.min(alloc.tuples.len() - next);
        alloc.ranges[v] = next..end;
        for o in &mut alloc.owner[next..end] {
            *o = v;
        }
        next = end;
    }
    if next < alloc.tuples.len() {
        return Err(TriangleError::Capacity {
            tuples: alloc.tuples.len(),
            capacity,
        });
    }
    Ok(alloc)
}

pub fn allocate_triads(ids: &IdAssignment, g_in: &Graph, q: usize) -> Result<TupleAllocation, TriangleError> {
    allocate_tuples(ids, g_in, q, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};
    use crate::routing::assign_degree_class_ids;

    fn alloc(g: &Graph, q: usize, s: usize) -> TupleAllocation {
        let all: Vec<_> = (0..g.n()).collect();
        let (ids, _) = assign_degree_class_ids(g, &all).unwrap();
        allocate_tuples(&ids, g, q, s).unwrap()
    }

    #[test]
    fn part_counts() {
        assert_eq!(part_count(64, 3), 4);
        assert_eq!(part_count(65, 3), 5);
        assert_eq!(part_count(512, 3), 8);
        assert_eq!(part_count(1, 3), 1);
        assert_eq!(part_count(64, 4), 3);
    }

    #[test]
    fn triad_lists() {
        assert_eq!(
            all_tuples(2, 3),
            vec![vec![1, 1, 1], vec![1, 1, 2], vec![1, 2, 2], vec![2, 2, 2]]
        );
        assert_eq!(all_tuples(3, 3).len(), 10);
        assert_eq!(all_tuples(4, 3).len(), 20);
    }

    #[test]
    fn regular_graph_gets_four_each() {
        // 3-regular: avg degree rounds to 2, k = 3/2, class 2, four triads each.
        let g = generate(&GeneratorSpec::Hypercube { d: 3 }, 0).unwrap();
        let a = alloc(&g, 3, 3);
        assert_eq!(a.avg_degree, 2);
        assert!(a.class.iter().all(|&c| c == 2));
        let mut covered = 0;
        for v in 0..8 {
            let r = a.ranges[v].clone();
            assert_eq!(r.start, covered);
            covered = r.end;
        }
        assert_eq!(covered, 10);
        assert_eq!(a.ranges[0], 0..4);
        assert_eq!(a.ranges[2], 8..10);
        assert!(a.ranges[3].is_empty());
    }

    #[test]
    fn class_zero_gets_nothing() {
        // Star: avg degree 2m/n = 8/5 rounds to 1; leaves have k = 1 (class 2),
        // the center k = 4 (class 4).
        let g = generate(&GeneratorSpec::Star { leaves: 4 }, 0).unwrap();
        let a = alloc(&g, 2, 3);
        assert_eq!(a.avg_degree, 1);
        assert_eq!(a.class, vec![4, 2, 2, 2, 2]);
        // Lollipop-like: one vertex of degree 1 among degree-16 ones.
        let mut edges = Vec::new();
        for u in 0..17 {
            for v in u + 1..17 {
                edges.push((u, v));
            }
        }
        edges.push((0, 17));
        let g = Graph::from_edges(18, edges).unwrap();
        let a = alloc(&g, 3, 3);
        assert_eq!(a.class[17], 0);
        assert!(a.ranges[17].is_empty());
    }

    #[test]
    fn lookups() {
        let g = generate(&GeneratorSpec::Clique { n: 30 }, 0).unwrap();
        let a = alloc(&g, 4, 3);
        for (i, t) in a.tuples.iter().enumerate() {
            let mut rev = t.clone();
            rev.reverse();
            assert_eq!(a.index_of(&rev), i);
            assert!(a.ranges[a.owner[i]].contains(&i));
        }
        // Triads containing {1, 2}: {1,1,2}, {1,2,2}, {1,2,3}, {1,2,4}.
        assert_eq!(a.containing(1, 2).len(), 4);
        assert_eq!(a.containing(2, 2).len(), 4);
        let a4 = alloc(&g, 3, 4);
        assert_eq!(a4.tuples.len(), 15);
        assert_eq!(a4.containing(1, 3).len(), 6);
    }
}
