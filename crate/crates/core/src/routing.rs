//! Degree-class ID assignment and a load-checked routing cost model.
//!
//! The router does not move messages hop by hop. It checks the per-vertex
//! load cap `deg(v) * kappa`, delivers every payload exactly, and charges
//! `tau * kappa * ceil(max_v load(v) / (deg(v) * kappa))` rounds, where `tau`
//! is a mixing-time estimate of the component.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{mixing_time_exact, spectral_gap_estimate, Graph, VertexId, MIXING_MAX_VERTICES};
use crate::runtime::{bfs_build, broadcast, pipelined_convergecast, RuntimeError};

/// `floor(log2 deg)`; degree-0 vertices are put in class 0.
pub fn degree_class(deg: usize) -> usize {
    if deg <= 1 {
        0
    } else {
        (usize::BITS - 1 - deg.leading_zeros()) as usize
    }
}

/// Default `kappa = 2^ceil(sqrt(log2 n))`.
pub fn default_kappa(n: usize) -> u64 {
    let l = (n.max(2) as f64).log2().sqrt().ceil() as u32;
    1u64 << l
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdAssignment {
    /// `new_id[v]` in `1..=len` for component members, 0 otherwise.
    pub new_id: Vec<usize>,
    /// `old_id[i - 1]` is the vertex holding new id `i`.
    pub old_id: Vec<VertexId>,
    /// Number of component vertices per degree class.
    pub class_counts: Vec<usize>,
}

impl IdAssignment {
    pub fn len(&self) -> usize {
        self.old_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_id.is_empty()
    }

    /// Degree class of the holder of `id`, decoded from the class counts alone.
    pub fn class_of_id(&self, id: usize) -> usize {
        let mut upto = 0;
        for (class, &c) in self.class_counts.iter().enumerate() {
            upto += c;
            if id <= upto {
                return class;
            }
        }
        panic!("id {id} out of range 1..={upto}");
    }
}

/// Assigns ids `1..=|component|` ordered by degree class, then by old id.
/// Charged rounds follow the BFS / count-convergecast / offset-broadcast
/// schedule over one item per class.
pub fn assign_degree_class_ids(
    g: &Graph,
    component: &[VertexId],
) -> Result<(IdAssignment, u64), RuntimeError> {
    let mut members = component.to_vec();
    members.sort_unstable();
    members.dedup();
    let classes = members.iter().map(|&v| degree_class(g.degree(v))).max().map_or(0, |c| c + 1);
    let mut class_counts = vec![0; classes];
    for &v in &members {
        class_counts[degree_class(g.degree(v))] += 1;
    }
    let mut old_id = members.clone();
    old_id.sort_by_key(|&v| (degree_class(g.degree(v)), v));
    let mut new_id = vec![0; g.n()];
    for (i, &v) in old_id.iter().enumerate() {
        new_id[v] = i + 1;
    }
    let rounds = match members.first() {
        None => 0,
        Some(&root) => {
            let (tree, bfs_rounds) = bfs_build(g, &members, root)?;
            bfs_rounds + pipelined_convergecast(&tree, classes) + broadcast(&tree, classes)
        }
    };
    Ok((
        IdAssignment {
            new_id,
            old_id,
            class_counts,
        },
        rounds,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingRequest {
    pub source: VertexId,
    pub destination: VertexId,
    pub payload: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoutingError {
    #[error("vertex {vertex} carries load {load} above its cap {cap}")]
    Overloaded { vertex: VertexId, load: u64, cap: u64 },
    #[error("request endpoint {0} is outside the component")]
    OutsideComponent(VertexId),
}

/// Mixing-time estimate used to price routing: exact when the component is
/// small enough, else `ln n / Phi^2` with `Phi = lambda_2 / 2` from the
/// spectral estimate (Cheeger lower bound).
pub fn mixing_estimate(g: &Graph) -> u64 {
    if g.m() == 0 {
        return 0;
    }
    if g.n() <= MIXING_MAX_VERTICES {
        if let Ok(t) = mixing_time_exact(g) {
            return t as u64;
        }
    }
    let phi = (spectral_gap_estimate(g, 300) / 2.0).max(1e-9);
    ((g.n() as f64).ln() / (phi * phi)).ceil() as u64
}

/// Cost-model router on one connected component (given as its own graph).
#[derive(Debug, Clone)]
pub struct Router<'a> {
    pub graph: &'a Graph,
    pub kappa: u64,
    pub tau: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    /// `inbox[v]`: `(source, payload)` pairs addressed to `v`, in request order.
    pub inbox: Vec<Vec<(VertexId, Vec<u64>)>>,
    pub rounds: u64,
    pub max_load: u64,
}

impl<'a> Router<'a> {
    pub fn new(graph: &'a Graph, kappa: u64) -> Self {
        Router {
            graph,
            kappa,
            tau: mixing_estimate(graph),
        }
    }

    pub fn cap(&self, v: VertexId) -> u64 {
        self.graph.degree(v) as u64 * self.kappa
    }

    /// Per-vertex load (messages sent plus received).
    pub fn loads(&self, requests: &[RoutingRequest]) -> Result<Vec<u64>, RoutingError> {
        let n = self.graph.n();
        let mut load = vec![0u64; n];
        for r in requests {
            for v in [r.source, r.destination] {
                if v >= n {
                    return Err(RoutingError::OutsideComponent(v));
                }
            }
            load[r.source] += 1;
            load[r.destination] += 1;
        }
        Ok(load)
    }

    pub fn route(&self, requests: &[RoutingRequest]) -> Result<Delivery, RoutingError> {
        let n = self.graph.n();
        let load = self.loads(requests)?;
        let mut worst = 0u64;
        let mut max_load = 0u64;
        for v in 0..n {
            if load[v] == 0 {
                continue;
            }
            let cap = self.cap(v);
            if load[v] > cap {
                return Err(RoutingError::Overloaded {
                    vertex: v,
                    load: load[v],
                    cap,
                });
            }
            worst = worst.max(load[v].div_ceil(cap));
            max_load = max_load.max(load[v]);
        }
        let mut inbox = vec![Vec::new(); n];
        for r in requests {
            inbox[r.destination].push((r.source, r.payload.clone()));
        }
        Ok(Delivery {
            inbox,
            rounds: self.tau * self.kappa * worst,
            max_load,
        })
    }
}

/// Result of [`Router::route_batched`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchedDelivery {
    pub inbox: Vec<Vec<(VertexId, Vec<u64>)>>,
    pub rounds: u64,
    /// Number of `route` calls, each within the load cap.
    pub batches: u64,
    pub messages: u64,
}

impl<'a> Router<'a> {
    /// Splits `requests` into consecutive calls that each respect the cap and
    /// routes them one after another. Requests are placed first-fit in order,
    /// so a vertex with load `L` takes part in at most `ceil(L / cap)` calls.
    pub fn route_batched(&self, requests: &[RoutingRequest]) -> Result<BatchedDelivery, RoutingError> {
        let load = self.loads(requests)?;
        for (v, &l) in load.iter().enumerate() {
            if l > 0 && self.cap(v) == 0 {
                return Err(RoutingError::Overloaded { vertex: v, load: l, cap: 0 });
            }
        }
        let n = self.graph.n();
        let mut used: Vec<Vec<u64>> = vec![Vec::new(); n];
        let mut first_open = vec![0usize; n];
        let mut batches: Vec<Vec<RoutingRequest>> = Vec::new();
        for r in requests {
            let ends = [r.source, r.destination];
            let mut b = first_open[r.source].max(first_open[r.destination]);
            // A self-addressed request counts twice against its vertex.
            let need = |v: VertexId| if r.source == r.destination { 2 } else { u64::from(ends.contains(&v)) };
            while ends.iter().any(|&v| used[v].get(b).copied().unwrap_or(0) + need(v) > self.cap(v)) {
                b += 1;
            }
            for &v in &ends {
                if used[v].len() <= b {
                    used[v].resize(b + 1, 0);
                }
            }
            if r.source == r.destination {
                used[r.source][b] += 2;
            } else {
                used[r.source][b] += 1;
                used[r.destination][b] += 1;
            }
            for &v in &ends {
                while first_open[v] < used[v].len() && used[v][first_open[v]] >= self.cap(v) {
                    first_open[v] += 1;
                }
            }
            if batches.len() <= b {
                batches.resize(b + 1, Vec::new());
            }
            batches[b].push(r.clone());
        }
        let mut out = BatchedDelivery {
            inbox: vec![Vec::new(); n],
            rounds: 0,
            batches: batches.len() as u64,
            messages: requests.len() as u64,
        };
        for batch in &batches {
            let d = self.route(batch)?;
            out.rounds += d.rounds;
            for (v, items) in d.inbox.into_iter().enumerate() {
                out.inbox[v].extend(items);
            }
        }
        Ok(out)
    }
}
