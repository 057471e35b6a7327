use serde::{Deserialize, Serialize};

use crate::graph::{Graph, VertexId};

/// Sparse nonnegative vector over vertices; only positive entries are stored,
/// sorted by vertex id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub entries: Vec<(VertexId, f64)>,
}

impl Distribution {
    pub fn point(v: VertexId) -> Self {
        Distribution {
            entries: vec![(v, 1.0)],
        }
    }

    pub fn from_dense(p: &[f64]) -> Self {
        Distribution {
            entries: p
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(v, &x)| (v, x))
                .collect(),
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut p = vec![0.0; n];
        for &(v, x) in &self.entries {
            p[v] = x;
        }
        p
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.entries
            .binary_search_by_key(&v, |e| e.0)
            .map_or(0.0, |i| self.entries[i].1)
    }

    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One step of `T = (A D^{-1} + I) / 2`.
pub fn lazy_step(g: &Graph, p: &Distribution) -> Distribution {
    let mut w = WalkState::from_distribution(g, p);
    w.step(g);
    w.to_distribution()
}

/// Keeps entry `x` iff `p(x) >= 2 * eps * deg(x)`.
pub fn truncate(g: &Graph, p: &Distribution, eps: f64) -> Distribution {
    Distribution {
        entries: p
            .entries
            .iter()
            .copied()
            .filter(|&(v, x)| x >= 2.0 * eps * g.degree(v) as f64)
            .collect(),
    }
}

/// `p~_0, ..., p~_steps` from `v`: the start is the indicator of `v` if it
/// survives truncation, and each later entry is `[T p~_{t-1}]_eps`.
pub fn truncated_walk(g: &Graph, v: VertexId, eps: f64, steps: usize) -> Vec<Distribution> {
    let mut w = WalkState::start(g, v, eps);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(w.to_distribution());
    for _ in 0..steps {
        w.step_truncated(g, eps);
        out.push(w.to_distribution());
    }
    out
}

/// Dense walk vector with an explicit support list, so a step costs
/// `O(Vol(support))` rather than `O(m)`.
#[derive(Debug, Clone)]
pub(crate) struct WalkState {
    pub p: Vec<f64>,
    /// Vertices with positive mass, unordered.
    pub support: Vec<VertexId>,
    next: Vec<f64>,
    mark: Vec<bool>,
    /// L1 distance between the last two vectors.
    pub last_change: f64,
    /// Positive entries zeroed by the last truncation.
    pub dropped: usize,
}

impl WalkState {
    pub fn start(g: &Graph, v: VertexId, eps: f64) -> Self {
        let n = g.n();
        let mut s = WalkState {
            p: vec![0.0; n],
            support: Vec::new(),
            next: vec![0.0; n],
            mark: vec![false; n],
            last_change: f64::INFINITY,
            dropped: 0,
        };
        if 1.0 >= 2.0 * eps * g.degree(v) as f64 {
            s.p[v] = 1.0;
            s.support.push(v);
        } else {
            s.dropped = 1;
        }
        s
    }

    pub fn from_distribution(g: &Graph, d: &Distribution) -> Self {
        let n = g.n();
        let mut s = WalkState {
            p: vec![0.0; n],
            support: Vec::new(),
            next: vec![0.0; n],
            mark: vec![false; n],
            last_change: f64::INFINITY,
            dropped: 0,
        };
        for &(v, x) in &d.entries {
            s.p[v] = x;
            s.support.push(v);
        }
        s
    }

    pub fn step(&mut self, g: &Graph) {
        self.step_truncated(g, 0.0);
    }

    /// `p <- [T p]_eps`, recording the L1 change in `last_change`.
    pub fn step_truncated(&mut self, g: &Graph, eps: f64) {
        if self.support.len() * 4 >= g.n() {
            return self.step_dense(g, eps);
        }
        let mut touched = Vec::with_capacity(self.support.len() * 2);
        for &u in &self.support {
            let x = self.p[u];
            if !self.mark[u] {
                self.mark[u] = true;
                touched.push(u);
            }
            self.next[u] += 0.5 * x;
            let share = 0.5 * x / g.degree(u) as f64;
            for &w in g.neighbors(u) {
                if !self.mark[w] {
                    self.mark[w] = true;
                    touched.push(w);
                }
                self.next[w] += share;
            }
        }
        // Every support vertex marked itself, so `touched` covers old and new support.
        let mut change = 0.0;
        let mut dropped = 0;
        self.support.clear();
        for &u in &touched {
            self.mark[u] = false;
            let x = self.next[u];
            self.next[u] = 0.0;
            let keep = x > 0.0 && x >= 2.0 * eps * g.degree(u) as f64;
            let val = if keep { x } else { 0.0 };
            change += (val - self.p[u]).abs();
            self.p[u] = val;
            if keep {
                self.support.push(u);
            } else if x > 0.0 {
                dropped += 1;
            }
        }
        self.last_change = change;
        self.dropped = dropped;
    }

    /// Pull form of the same step for wide supports; `next` holds the
    /// outgoing shares during the sweep over all vertices.
    fn step_dense(&mut self, g: &Graph, eps: f64) {
        for &u in &self.support {
            self.next[u] = 0.5 * self.p[u] / g.degree(u) as f64;
        }
        let mut fresh = std::mem::take(&mut self.support);
        fresh.clear();
        let mut change = 0.0;
        let mut dropped = 0;
        let mut out = vec![0.0; g.n()];
        for (w, slot) in out.iter_mut().enumerate() {
            let x = 0.5 * self.p[w] + g.neighbors(w).iter().map(|&u| self.next[u]).sum::<f64>();
            let keep = x > 0.0 && x >= 2.0 * eps * g.degree(w) as f64;
            let val = if keep { x } else { 0.0 };
            change += (val - self.p[w]).abs();
            *slot = val;
            if keep {
                fresh.push(w);
            } else if x > 0.0 {
                dropped += 1;
            }
        }
        self.next.iter_mut().for_each(|x| *x = 0.0);
        self.p = out;
        self.support = fresh;
        self.last_change = change;
        self.dropped = dropped;
    }

    pub fn to_distribution(&self) -> Distribution {
        let mut entries: Vec<(VertexId, f64)> = self.support.iter().map(|&v| (v, self.p[v])).collect();
        entries.sort_unstable_by_key(|e| e.0);
        Distribution { entries }
    }
}
