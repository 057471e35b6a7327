//! `n^delta`-decomposition: the recursive partition of the edges into
//! expander clusters `E_m`, a low-arboricity part `E_s` with an acyclic
//! orientation, and a small remainder `E_r`.
//!
//! [`black_box_partition`] is one call of the partition routine with its
//! Remove/Split steps and cases; [`decompose`] applies it recursively to the
//! parts that still need work. The partition invariants are checked on every
//! call and the final result can be checked independently with
//! [`verify_decomposition`].

mod subroutines;
mod verify;

pub use subroutines::{
    balanced_index, balanced_index_scan, high_diameter_cut, low_degree_peel, HighDiameterCut, Peel,
};
pub use verify::{verify_decomposition, ClusterCertificate, ExpansionMethod, VerifyReport};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    verify_orientation, Edge, EdgeId, Graph, GraphError, Orientation, VertexId, VertexSet,
};
use crate::math::{ln_me4, log2m, pow_delta};
use crate::nibble::{distributed_nibble, NibbleConfig, NibbleError, SampleMode};
use crate::rng::mix;
use crate::runtime::{bfs_build, broadcast, RuntimeError, Transcript};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("delta = {0} must lie in (0, 1)")]
    InvalidDelta(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("recursion depth {depth} exceeds cap {cap}")]
    RecursionCap { depth: usize, cap: usize },
    #[error("partition invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Nibble(#[from] NibbleError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Thresholds shared by every call; `n` and `m` are those of the whole network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    /// Test-only factor on the `48 log^2 m` diameter threshold.
    pub case1_scale: f64,
}

impl Params {
    pub fn new(g: &Graph, delta: f64) -> Self {
        Params {
            n: g.n(),
            m: g.m(),
            delta,
            case1_scale: 1.0,
        }
    }

    pub fn n_delta(&self) -> f64 {
        pow_delta(self.n, self.delta)
    }

    pub fn diameter_threshold(&self) -> f64 {
        48.0 * log2m(self.m).powi(2) * self.case1_scale
    }

    /// Nibble target `1 / (144 log m)`.
    pub fn nibble_phi(&self) -> f64 {
        1.0 / (144.0 * log2m(self.m))
    }

    /// Conductance a terminal cluster with `cluster_edges` edges is expected
    /// to have: `phi^3 / (19208 ln^2(|E| e^4))`.
    pub fn phi_star(&self, cluster_edges: usize) -> f64 {
        self.nibble_phi().powi(3) / (19208.0 * ln_me4(cluster_edges).powi(2))
    }

    /// `|boundary| * 12 log m <= min(vol_a, vol_b)`.
    pub fn sparse_enough(&self, boundary: u64, vol_a: u64, vol_b: u64) -> bool {
        boundary as f64 * 12.0 * log2m(self.m) <= vol_a.min(vol_b) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub delta: f64,
    pub seed: u64,
    pub case1_scale: f64,
    pub nibble_c: f64,
    pub nibble_cap: u64,
    pub sample_mode: SampleMode,
    pub nibble_budget: Option<u64>,
    pub simulate_nibble: bool,
    /// Defaults to `4 log m`.
    pub recursion_cap: Option<usize>,
}

impl DecomposeConfig {
    pub fn new(delta: f64, seed: u64) -> Self {
        DecomposeConfig {
            delta,
            seed,
            case1_scale: 1.0,
            nibble_c: 4.0,
            nibble_cap: 512,
            sample_mode: SampleMode::ExactK,
            nibble_budget: None,
            simulate_nibble: false,
            recursion_cap: None,
        }
    }

    fn params(&self, g: &Graph) -> Params {
        Params {
            case1_scale: self.case1_scale,
            ..Params::new(g, self.delta)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutCase {
    HighDiameter,
    HighDiameterAfterPeel,
    Nibble,
}

/// The sparse-cut inequality recorded for every cut whose edges went to `E_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutWitness {
    pub depth: usize,
    pub case: CutCase,
    pub boundary: u64,
    pub vol_side: u64,
    pub vol_rest: u64,
    /// `boundary * 12 log m <= min(vol_side, vol_rest)`.
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartStatus {
    /// Terminal expander cluster.
    Final,
    /// Needs another call.
    Recurse,
}

/// Output of one call of the partition routine.
#[derive(Debug, Clone)]
pub struct PartitionStep {
    /// Parts of `E_m'` as sorted edge ids of the network.
    pub parts: Vec<(Vec<EdgeId>, PartStatus)>,
    /// `(owner, edge)` for `E_s'`.
    pub es: Vec<(VertexId, EdgeId)>,
    pub er: Vec<EdgeId>,
    /// Vertices of the input left with no `E_m'` edge.
    pub s_vertices: Vec<VertexId>,
    pub witnesses: Vec<CutWitness>,
    /// Number of times the `E_r'` ledger inequality was checked.
    pub ledger_checks: usize,
    pub nibble_calls: usize,
    pub transcript: Transcript,
}

/// Running check of `|E_r'| <= (|E'| log|E'| - sum |E_i| log|E_i|) / (6 log m)`.
struct Ledger {
    base: f64,
    parts: f64,
    er: usize,
    logm: f64,
    checks: usize,
}

fn xlogx(x: usize) -> f64 {
    if x <= 1 {
        0.0
    } else {
        x as f64 * (x as f64).log2()
    }
}

impl Ledger {
    fn new(edges: usize, m: usize) -> Self {
        Ledger {
            base: xlogx(edges),
            parts: xlogx(edges),
            er: 0,
            logm: log2m(m),
            checks: 0,
        }
    }

    /// Replaces a part of `old` edges by parts of the given sizes after
    /// `to_er` of its edges moved to `E_r'`.
    fn replace(&mut self, old: usize, new: &[usize], to_er: usize) -> Result<(), DecompError> {
        self.parts -= xlogx(old);
        self.parts += new.iter().map(|&s| xlogx(s)).sum::<f64>();
        self.er += to_er;
        self.checks += 1;
        let f = (self.base - self.parts) / (6.0 * self.logm);
        if self.er as f64 > f + 1e-9 * self.base.max(1.0) {
            return Err(DecompError::Invariant(format!(
                "|E_r'| = {} exceeds ledger bound {f:.3}",
                self.er
            )));
        }
        Ok(())
    }
}

struct Call<'a> {
    g: &'a Graph,
    params: Params,
    cfg: &'a DecomposeConfig,
    depth: usize,
    ledger: Ledger,
    out: PartitionStep,
}

/// One call of the partition routine on the edges `part` of `g`.
pub fn black_box_partition(
    g: &Graph,
    part: &[EdgeId],
    cfg: &DecomposeConfig,
    depth: usize,
) -> Result<PartitionStep, DecompError> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(DecompError::InvalidDelta(cfg.delta));
    }
    if part.is_empty() {
        return Err(DecompError::Precondition("empty edge set".into()));
    }
    let params = cfg.params(g);
    let mut call = Call {
        g,
        params,
        cfg,
        depth,
        ledger: Ledger::new(part.len(), g.m()),
        out: PartitionStep {
            parts: Vec::new(),
            es: Vec::new(),
            er: Vec::new(),
            s_vertices: Vec::new(),
            witnesses: Vec::new(),
            ledger_checks: 0,
            nibble_calls: 0,
            transcript: Transcript::new(cfg.seed),
        },
    };
    let sub = g.edge_subgraph(part);
    let t = params.n_delta();

    // Remove-1: edges with both ends of degree at most n^delta, owned by the smaller id.
    let low: Vec<bool> = (0..sub.graph.n()).map(|v| sub.graph.degree(v) as f64 <= t).collect();
    let mut kept = Vec::new();
    for (i, e) in sub.graph.edges().iter().enumerate() {
        let pe = sub.edge_to_parent[i];
        if low[e.0] && low[e.1] {
            call.out.es.push((sub.to_parent[e.0], pe));
        } else {
            kept.push(pe);
        }
    }
    call.out.transcript.charge("decompose.remove1", 1);
    call.ledger.replace(part.len(), &[kept.len()], 0)?;

    // Split-1 and the cases run independently per component.
    let comps = components(g, &kept);
    call.ledger.replace(kept.len(), &comps.iter().map(Vec::len).collect::<Vec<_>>(), 0)?;
    let mut per_comp = Vec::with_capacity(comps.len());
    for comp in comps {
        per_comp.push(call.component(comp)?);
    }
    call.out.transcript.alongside(&per_comp);

    call.out.ledger_checks = call.ledger.checks;
    call.out.parts.sort();
    call.out.er.sort_unstable();
    call.out.es.sort_unstable();
    let mut covered = vec![false; g.n()];
    for (edges, _) in &call.out.parts {
        for &e in edges {
            let Edge(u, v) = g.edge(e);
            covered[u] = true;
            covered[v] = true;
        }
    }
    call.out.s_vertices = sub.to_parent.iter().copied().filter(|&v| !covered[v]).collect();
    certify_step(g, part, &call.params, &call.out)?;
    Ok(call.out)
}

impl Call<'_> {
    /// Split-1 for one component, then Case 1 or Case 2.
    fn component(&mut self, comp: Vec<EdgeId>) -> Result<Transcript, DecompError> {
        let mut tr = Transcript::new(self.cfg.seed);
        let sub = self.g.edge_subgraph(&comp);
        let all: Vec<VertexId> = (0..sub.graph.n()).collect();
        let (tree, bfs_rounds) = bfs_build(&sub.graph, &all, 0)?;
        tr.charge("decompose.split", bfs_rounds + broadcast(&tree, 1));

        if tree.depth as f64 >= self.params.diameter_threshold() {
            match high_diameter_cut(&sub.graph, 0, &self.params) {
                Ok((hd, rounds)) => {
                    tr.charge("decompose.case1", rounds);
                    self.apply_cut(&sub, &comp, &hd.cut.side, CutCase::HighDiameter)?;
                    return Ok(tr);
                }
                Err(DecompError::Precondition(why)) if self.params.case1_scale != 1.0 => {
                    tr.flag("case1_fallback", why);
                }
                Err(e) => return Err(e),
            }
        }

        // Case 2: peel, then handle each surviving component.
        let (peel, rounds) = low_degree_peel(&sub.graph, self.params.n_delta())?;
        tr.charge("decompose.peel", rounds);
        for &(owner, e) in &peel.owned {
            self.out.es.push((sub.to_parent[owner], sub.edge_to_parent[e]));
        }
        let remaining: Vec<EdgeId> = peel.remaining.iter().map(|&e| sub.edge_to_parent[e]).collect();
        self.ledger.replace(comp.len(), &[remaining.len()], 0)?;
        let comps = components(self.g, &remaining);
        self.ledger
            .replace(remaining.len(), &comps.iter().map(Vec::len).collect::<Vec<_>>(), 0)?;
        let mut per_comp = Vec::with_capacity(comps.len());
        for c in comps {
            per_comp.push(self.dense_component(c)?);
        }
        tr.alongside(&per_comp);
        Ok(tr)
    }

    /// Split-3 for one component left by the peel, then Case 2-a or 2-b.
    fn dense_component(&mut self, comp: Vec<EdgeId>) -> Result<Transcript, DecompError> {
        let mut tr = Transcript::new(self.cfg.seed);
        let sub = self.g.edge_subgraph(&comp);
        let all: Vec<VertexId> = (0..sub.graph.n()).collect();
        let (tree, bfs_rounds) = bfs_build(&sub.graph, &all, 0)?;
        tr.charge("decompose.split", bfs_rounds + broadcast(&tree, 1));

        if tree.depth as f64 >= self.params.diameter_threshold() {
            match high_diameter_cut(&sub.graph, 0, &self.params) {
                Ok((hd, rounds)) => {
                    tr.charge("decompose.case2a", rounds);
                    self.apply_cut(&sub, &comp, &hd.cut.side, CutCase::HighDiameterAfterPeel)?;
                    return Ok(tr);
                }
                Err(DecompError::Precondition(why)) if self.params.case1_scale != 1.0 => {
                    tr.flag("case2a_fallback", why);
                }
                Err(e) => return Err(e),
            }
        }

        let ncfg = NibbleConfig {
            phi: self.params.nibble_phi(),
            seed: mix(self.cfg.seed, self.depth as u64, comp[0] as u64),
            c: self.cfg.nibble_c,
            cap_per_b: self.cfg.nibble_cap,
            sample_mode: self.cfg.sample_mode,
            budget: self.cfg.nibble_budget,
            simulate: self.cfg.simulate_nibble,
        };
        let res = distributed_nibble(&sub.graph, &ncfg)?;
        self.out.nibble_calls += 1;
        tr.then(&res.transcript);
        match res.cut {
            Some(found) => self.apply_cut(&sub, &comp, &found.cut.side, CutCase::Nibble)?,
            None => self.out.parts.push((comp, PartStatus::Final)),
        }
        Ok(tr)
    }

    /// Remove/Split along a cut of the subgraph `sub` spanned by `comp`.
    fn apply_cut(
        &mut self,
        sub: &crate::graph::Subgraph,
        comp: &[EdgeId],
        side: &VertexSet,
        case: CutCase,
    ) -> Result<(), DecompError> {
        let (mut inside, mut outside, mut cut) = (Vec::new(), Vec::new(), Vec::new());
        let (mut vol_in, mut vol_out) = (0u64, 0u64);
        for (i, e) in sub.graph.edges().iter().enumerate() {
            let pe = sub.edge_to_parent[i];
            match (side.contains(e.0), side.contains(e.1)) {
                (true, true) => inside.push(pe),
                (false, false) => outside.push(pe),
                _ => cut.push(pe),
            }
        }
        for v in 0..sub.graph.n() {
            if side.contains(v) {
                vol_in += sub.graph.degree(v) as u64;
            } else {
                vol_out += sub.graph.degree(v) as u64;
            }
        }
        let holds = self.params.sparse_enough(cut.len() as u64, vol_in, vol_out);
        self.out.witnesses.push(CutWitness {
            depth: self.depth,
            case,
            boundary: cut.len() as u64,
            vol_side: vol_in,
            vol_rest: vol_out,
            holds,
        });
        if !holds {
            return Err(DecompError::Invariant(format!(
                "cut with {} boundary edges is not sparse enough",
                cut.len()
            )));
        }
        self.ledger.replace(comp.len(), &[inside.len(), outside.len()], cut.len())?;
        self.out.er.extend(cut);
        for p in [inside, outside] {
            if !p.is_empty() {
                self.out.parts.push((p, PartStatus::Recurse));
            }
        }
        Ok(())
    }
}

/// Connected components of the subgraph spanned by `edges`, each as sorted
/// edge ids, ordered by smallest edge id.
fn components(g: &Graph, edges: &[EdgeId]) -> Vec<Vec<EdgeId>> {
    if edges.is_empty() {
        return Vec::new();
    }
    let sub = g.edge_subgraph(edges);
    let comps = sub.graph.connected_components();
    let mut comp_of = vec![0; sub.graph.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let mut out = vec![Vec::new(); comps.len()];
    for (i, e) in sub.graph.edges().iter().enumerate() {
        out[comp_of[e.0]].push(sub.edge_to_parent[i]);
    }
    for c in &mut out {
        c.sort_unstable();
    }
    out.retain(|c| !c.is_empty());
    out.sort();
    out
}

/// Checks the disjointness, orientation and `E_s'` degree conditions of one
/// call's output.
fn certify_step(g: &Graph, part: &[EdgeId], params: &Params, step: &PartitionStep) -> Result<(), DecompError> {
    let mut seen = vec![false; g.m()];
    let all = step
        .parts
        .iter()
        .flat_map(|(p, _)| p.iter().copied())
        .chain(step.es.iter().map(|x| x.1))
        .chain(step.er.iter().copied());
    let mut count = 0;
    for e in all {
        if seen[e] {
            return Err(DecompError::Invariant(format!("edge {e} placed twice")));
        }
        seen[e] = true;
        count += 1;
    }
    if count != part.len() || part.iter().any(|&e| !seen[e]) {
        return Err(DecompError::Invariant("output does not partition the input".into()));
    }

    let mut owner_part = vec![usize::MAX; g.n()];
    let mut em_deg = vec![0usize; g.n()];
    for (i, (p, _)) in step.parts.iter().enumerate() {
        for &e in p {
            let Edge(u, v) = g.edge(e);
            for x in [u, v] {
                if owner_part[x] != usize::MAX && owner_part[x] != i {
                    return Err(DecompError::Invariant(format!("vertex {x} in two parts")));
                }
                owner_part[x] = i;
                em_deg[x] += 1;
            }
        }
    }

    let mut o = Orientation::new();
    for &(v, e) in &step.es {
        o.push(v, g.edge(e));
    }
    for (&v, es) in &o.out {
        if (es.len() + em_deg[v]) as f64 > params.n_delta() {
            return Err(DecompError::Invariant(format!(
                "vertex {v}: |E_s'| + deg = {} exceeds n^delta",
                es.len() + em_deg[v]
            )));
        }
    }
    let rep = verify_orientation(g, &o, usize::MAX);
    if !rep.passes {
        return Err(DecompError::Invariant("E_s' orientation is not acyclic".into()));
    }
    Ok(())
}

/// Plain-data decomposition: edges are written as endpoint pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub delta: f64,
    pub n: usize,
    pub m: usize,
    pub clusters: Vec<Cluster>,
    /// `E_{s,v}` keyed by owner.
    pub es: BTreeMap<VertexId, Vec<Edge>>,
    pub er: Vec<Edge>,
    pub certificates: Certificates,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub witnesses: Vec<CutWitness>,
    pub ledger_checks: usize,
    pub calls: usize,
    pub nibble_calls: usize,
    pub max_depth: usize,
    pub case1_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeLabel {
    Em(usize),
    Es(VertexId),
    Er,
}

impl Decomposition {
    pub fn threshold(&self) -> f64 {
        pow_delta(self.n, self.delta)
    }

    pub fn orientation(&self) -> Orientation {
        Orientation {
            out: self.es.clone(),
        }
    }

    /// Label of every edge of `g`; `None` for edges the decomposition misses.
    pub fn edge_labels(&self, g: &Graph) -> Vec<Option<EdgeLabel>> {
        let mut out = vec![None; g.m()];
        let mut put = |e: Edge, l: EdgeLabel| {
            if let Some(id) = g.edge_id(e.0, e.1) {
                out[id] = Some(l);
            }
        };
        for c in &self.clusters {
            for &e in &c.edges {
                put(e, EdgeLabel::Em(c.id));
            }
        }
        for (&v, es) in &self.es {
            for &e in es {
                put(e, EdgeLabel::Es(v));
            }
        }
        for &e in &self.er {
            put(e, EdgeLabel::Er);
        }
        out
    }

    pub fn em_edge_count(&self) -> usize {
        self.clusters.iter().map(|c| c.edges.len()).sum()
    }

    pub fn es_edge_count(&self) -> usize {
        self.es.values().map(Vec::len).sum()
    }
}

struct Acc {
    finals: Vec<Vec<EdgeId>>,
    es: Vec<(VertexId, EdgeId)>,
    er: Vec<EdgeId>,
    cert: Certificates,
    transcript: Transcript,
}

fn recurse(g: &Graph, part: Vec<EdgeId>, cfg: &DecomposeConfig, depth: usize, cap: usize) -> Result<Acc, DecompError> {
    if depth > cap {
        return Err(DecompError::RecursionCap { depth, cap });
    }
    let step = black_box_partition(g, &part, cfg, depth)?;
    let mut acc = Acc {
        finals: Vec::new(),
        es: step.es,
        er: step.er,
        cert: Certificates {
            witnesses: step.witnesses,
            ledger_checks: step.ledger_checks,
            calls: 1,
            nibble_calls: step.nibble_calls,
            max_depth: depth,
            case1_scale: cfg.case1_scale,
        },
        transcript: step.transcript,
    };
    let mut todo = Vec::new();
    for (p, status) in step.parts {
        match status {
            PartStatus::Final => acc.finals.push(p),
            PartStatus::Recurse => {
                if p.len() >= part.len() {
                    return Err(DecompError::Invariant("recursive part did not shrink".into()));
                }
                todo.push(p);
            }
        }
    }
    let children: Vec<Result<Acc, DecompError>> = crate::runtime::pool()
        .install(|| todo.into_par_iter().map(|p| recurse(g, p, cfg, depth + 1, cap)).collect());
    let mut trs = Vec::new();
    for c in children {
        let c = c?;
        acc.finals.extend(c.finals);
        acc.es.extend(c.es);
        acc.er.extend(c.er);
        acc.cert.witnesses.extend(c.cert.witnesses);
        acc.cert.ledger_checks += c.cert.ledger_checks;
        acc.cert.calls += c.cert.calls;
        acc.cert.nibble_calls += c.cert.nibble_calls;
        acc.cert.max_depth = acc.cert.max_depth.max(c.cert.max_depth);
        trs.push(c.transcript);
    }
    acc.transcript.alongside(&trs);
    Ok(acc)
}

/// Recursive decomposition of all of `g`.
pub fn decompose(g: &Graph, cfg: &DecomposeConfig) -> Result<(Decomposition, Transcript), DecompError> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(DecompError::InvalidDelta(cfg.delta));
    }
    let cap = cfg
        .recursion_cap
        .unwrap_or_else(|| (4.0 * log2m(g.m())).ceil() as usize);
    let mut acc = if g.m() == 0 {
        Acc {
            finals: Vec::new(),
            es: Vec::new(),
            er: Vec::new(),
            cert: Certificates {
                case1_scale: cfg.case1_scale,
                ..Default::default()
            },
            transcript: Transcript::new(cfg.seed),
        }
    } else {
        recurse(g, (0..g.m()).collect(), cfg, 0, cap)?
    };
    acc.finals.sort();
    let clusters = acc
        .finals
        .iter()
        .enumerate()
        .map(|(id, edges)| {
            let mut vertices: Vec<VertexId> = edges
                .iter()
                .flat_map(|&e| {
                    let Edge(u, v) = g.edge(e);
                    [u, v]
                })
                .collect();
            vertices.sort_unstable();
            vertices.dedup();
            Cluster {
                id,
                vertices,
                edges: edges.iter().map(|&e| g.edge(e)).collect(),
            }
        })
        .collect();
    let mut es: BTreeMap<VertexId, Vec<Edge>> = BTreeMap::new();
    for &(v, e) in &acc.es {
        es.entry(v).or_default().push(g.edge(e));
    }
    for l in es.values_mut() {
        l.sort_unstable();
    }
    acc.er.sort_unstable();
    let mut tr = acc.transcript;
    tr.seed = cfg.seed;
    if cfg.case1_scale != 1.0 {
        tr.flag("case1_threshold_scale", cfg.case1_scale);
    }
    Ok((
        Decomposition {
            delta: cfg.delta,
            n: g.n(),
            m: g.m(),
            clusters,
            es,
            er: acc.er.iter().map(|&e| g.edge(e)).collect(),
            certificates: acc.cert,
        },
        tr,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    #[test]
    fn clique_is_one_cluster() {
        let g = generate(&GeneratorSpec::Clique { n: 64 }, 0).unwrap();
        let (d, tr) = decompose(&g, &DecomposeConfig::new(0.5, 1)).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.em_edge_count(), g.m());
        assert!(d.er.is_empty() && d.es.is_empty());
        assert!(tr.rounds > 0);
        assert!(verify_decomposition(&g, &d).passes);
    }

    #[test]
    fn path_is_all_sparse() {
        let g = generate(&GeneratorSpec::Path { n: 100 }, 0).unwrap();
        let (d, _) = decompose(&g, &DecomposeConfig::new(0.5, 1)).unwrap();
        assert!(d.clusters.is_empty() && d.er.is_empty());
        assert_eq!(d.es_edge_count(), 99);
        assert!(d.es.values().all(|l| l.len() <= 10));
        assert!(verify_decomposition(&g, &d).passes);
    }

    #[test]
    fn tree_call_sends_everything_to_es() {
        let g = generate(&GeneratorSpec::Star { leaves: 5 }, 0).unwrap();
        let cfg = DecomposeConfig::new(0.9, 0);
        let step = black_box_partition(&g, &(0..g.m()).collect::<Vec<_>>(), &cfg, 0).unwrap();
        assert!(step.parts.is_empty() && step.er.is_empty());
        assert_eq!(step.es.len(), 5);
        assert_eq!(step.s_vertices.len(), 6);
    }

    #[test]
    fn barbell_splits_at_bridge() {
        let g = generate(&GeneratorSpec::Barbell { k: 16, bridges: 1 }, 0).unwrap();
        let (d, _) = decompose(&g, &DecomposeConfig::new(0.5, 3)).unwrap();
        assert_eq!(d.clusters.len(), 2);
        assert_eq!(d.er.len(), 1);
        let rep = verify_decomposition(&g, &d);
        assert!(rep.passes, "{rep:?}");
    }

    #[test]
    fn ledger_rejects_expensive_cut() {
        let mut l = Ledger::new(100, 1 << 10);
        assert!(l.replace(100, &[50, 49], 1).is_ok());
        let mut l = Ledger::new(100, 1 << 10);
        assert!(l.replace(100, &[90, 0], 10).is_err());
    }
}
