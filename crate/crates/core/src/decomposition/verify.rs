use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Decomposition, Params};
use crate::graph::{
    mixing_time_capped, normalized_laplacian_lambda2, sparsest_cut_bruteforce, verify_orientation,
    Edge, Graph, OrientationReport, DENSE_EIGEN_MAX_VERTICES, MIXING_MAX_VERTICES,
};
use crate::math::log2m;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpansionMethod {
    /// Exact sparsest cut.
    BruteForce,
    /// `lambda_2 / 2` of the normalized Laplacian.
    Spectral,
    /// Exact mixing time against `(log n)^4`.
    Mixing,
    /// Too large for every available certificate.
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCertificate {
    pub id: usize,
    pub vertices: usize,
    pub edges: usize,
    pub min_degree: usize,
    pub phi_star: f64,
    pub method: ExpansionMethod,
    /// Conductance, `lambda_2 / 2`, or mixing time depending on `method`.
    pub value: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passes: bool,
    pub partition_ok: bool,
    pub clusters_ok: bool,
    pub min_degree_ok: bool,
    pub orientation: OrientationReport,
    pub er_ok: bool,
    pub er_count: usize,
    pub expansion_ok: bool,
    /// Clusters whose expansion certificate failed although the partition
    /// routine accepted them.
    pub nibble_disagreements: usize,
    pub clusters: Vec<ClusterCertificate>,
    pub problems: Vec<String>,
}

/// Independent check of a decomposition against `g`.
pub fn verify_decomposition(g: &Graph, d: &Decomposition) -> VerifyReport {
    let mut problems = Vec::new();
    let params = Params::new(g, d.delta);
    if d.n != g.n() || d.m != g.m() {
        problems.push(format!("size mismatch: report ({}, {}), graph ({}, {})", d.n, d.m, g.n(), g.m()));
    }

    // Every edge in exactly one place.
    let mut seen = vec![0u8; g.m()];
    let mut note = |e: Edge, problems: &mut Vec<String>| match g.edge_id(e.0, e.1) {
        Some(id) => seen[id] += 1,
        None => problems.push(format!("edge {e:?} is not in the graph")),
    };
    for c in &d.clusters {
        for &e in &c.edges {
            note(e, &mut problems);
        }
    }
    for es in d.es.values() {
        for &e in es {
            note(e, &mut problems);
        }
    }
    for &e in &d.er {
        note(e, &mut problems);
    }
    let missing = seen.iter().filter(|&&c| c == 0).count();
    let repeated = seen.iter().filter(|&&c| c > 1).count();
    if missing > 0 {
        problems.push(format!("{missing} edges unlabeled"));
    }
    if repeated > 0 {
        problems.push(format!("{repeated} edges labeled more than once"));
    }
    let partition_ok = problems.is_empty();

    // Clusters are the components of E_m: connected, vertex-disjoint, distinct ids.
    let mut clusters_ok = true;
    let mut ids = HashSet::new();
    let mut owner = vec![usize::MAX; g.n()];
    let mut min_degree_ok = true;
    let mut certs = Vec::new();
    let half = params.n_delta() / 2.0;
    for c in &d.clusters {
        if !ids.insert(c.id) {
            clusters_ok = false;
            problems.push(format!("cluster id {} repeated", c.id));
        }
        let mut verts: Vec<usize> = c.edges.iter().flat_map(|e| [e.0, e.1]).collect();
        verts.sort_unstable();
        verts.dedup();
        if verts != c.vertices {
            clusters_ok = false;
            problems.push(format!("cluster {}: vertex list does not match its edges", c.id));
        }
        for &v in &verts {
            if v < g.n() {
                if owner[v] != usize::MAX {
                    clusters_ok = false;
                    problems.push(format!("vertex {v} in clusters {} and {}", owner[v], c.id));
                }
                owner[v] = c.id;
            }
        }
        let Ok(h) = Graph::from_edges(
            verts.len(),
            c.edges.iter().filter_map(|e| {
                Some((verts.binary_search(&e.0).ok()?, verts.binary_search(&e.1).ok()?))
            }),
        ) else {
            clusters_ok = false;
            problems.push(format!("cluster {}: edges do not form a simple graph", c.id));
            continue;
        };
        if !h.is_connected() {
            clusters_ok = false;
            problems.push(format!("cluster {} is disconnected", c.id));
        }
        let min_degree = (0..h.n()).map(|v| h.degree(v)).min().unwrap_or(0);
        if (min_degree as f64) < half {
            min_degree_ok = false;
            problems.push(format!("cluster {}: min degree {min_degree} below n^delta/2", c.id));
        }
        certs.push(expansion_certificate(&h, c.id, min_degree, &params));
    }

    let orientation = verify_orientation(g, &d.orientation(), params.n_delta().floor() as usize);
    if !orientation.passes {
        problems.push("E_s orientation fails the cap or is cyclic".into());
    }
    let er_ok = 6 * d.er.len() <= g.m();
    if !er_ok {
        problems.push(format!("|E_r| = {} exceeds |E|/6", d.er.len()));
    }
    let failed = certs.iter().filter(|c| !c.passes).count();
    if failed > 0 {
        problems.push(format!("{failed} clusters lack an expansion certificate"));
    }
    VerifyReport {
        passes: partition_ok && clusters_ok && min_degree_ok && orientation.passes && er_ok && failed == 0,
        partition_ok,
        clusters_ok,
        min_degree_ok,
        orientation,
        er_ok,
        er_count: d.er.len(),
        expansion_ok: failed == 0,
        nibble_disagreements: failed,
        clusters: certs,
        problems,
    }
}

fn expansion_certificate(h: &Graph, id: usize, min_degree: usize, params: &Params) -> ClusterCertificate {
    let phi_star = params.phi_star(h.m());
    let mut cert = ClusterCertificate {
        id,
        vertices: h.n(),
        edges: h.m(),
        min_degree,
        phi_star,
        method: ExpansionMethod::Unchecked,
        value: f64::NAN,
        passes: false,
    };
    if h.n() < 2 || !h.is_connected() {
        return cert;
    }
    if h.n() <= crate::graph::SPARSEST_CUT_MAX_VERTICES {
        if let Ok(c) = sparsest_cut_bruteforce(h) {
            cert.method = ExpansionMethod::BruteForce;
            cert.value = c.phi_f64();
            cert.passes = cert.value >= phi_star;
        }
        return cert;
    }
    if h.n() <= DENSE_EIGEN_MAX_VERTICES {
        if let Some(l2) = normalized_laplacian_lambda2(h) {
            cert.method = ExpansionMethod::Spectral;
            cert.value = l2 / 2.0;
            cert.passes = cert.value >= phi_star;
            if cert.passes {
                return cert;
            }
        }
    }
    if h.n() <= MIXING_MAX_VERTICES {
        let bound = log2m(params.n).powi(4).floor() as usize;
        if let Ok(Some(t)) = mixing_time_capped(h, bound) {
            cert.method = ExpansionMethod::Mixing;
            cert.value = t as f64;
            cert.passes = true;
        }
    }
    cert
}
