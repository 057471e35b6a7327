#![allow(dead_code)]

use congest_lab::graph::{generate, GeneratorSpec, Graph};
use congest_lab::math::log2m;
use congest_lab::nibble::{sweep_order, truncated_walk};
use congest_lab::rng::seeded;
use rand::Rng;

/// G(n, p) plus the path 0-1-...-(n-1), so the result is connected.
pub fn connected_er(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = seeded(seed, 0x7465_7374);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if v == u + 1 || rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Two dense blocks joined by a few edges; retries seeds until connected.
pub fn small_planted(block: usize, p: f64, cross: usize, seed: u64) -> Graph {
    let spec = GeneratorSpec::PlantedCut {
        block,
        p,
        cross_edges: cross,
    };
    (0..)
        .map(|k| generate(&spec, seed.wrapping_add(k * 7919)).unwrap())
        .find(|g| g.is_connected())
        .unwrap()
}

/// Largest `|rho_t^v(u) - rho_t^u(v)|` over all pairs and `t <= steps`, on
/// exact (untruncated) walks.
pub fn walk_symmetry_gap(g: &Graph, steps: usize) -> f64 {
    let walks: Vec<Vec<Vec<f64>>> = (0..g.n())
        .map(|v| truncated_walk(g, v, 0.0, steps).iter().map(|d| d.to_dense(g.n())).collect())
        .collect();
    let mut worst = 0.0f64;
    for t in 0..=steps {
        for v in 0..g.n() {
            for u in 0..g.n() {
                let a = walks[v][t][u] / g.degree(u) as f64;
                let b = walks[u][t][v] / g.degree(v) as f64;
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// Exhaustive check of the sweep approximation property over the sweep
/// orders of exact walks from every source for `t = 1..=steps`: whenever a
/// prefix `j` has conductance at most `phi` and volume at most 5/6 of the
/// total, every longer prefix within volume `(1 + phi) Vol(j)` has
/// conductance at most `12 phi`. Returns (qualifying j, pairs checked, violations).
pub fn sweep_approximation(g: &Graph, phi: f64, steps: usize) -> (usize, usize, usize) {
    let total = g.total_volume();
    let (mut qualifying, mut checked, mut violations) = (0, 0, 0);
    for v in 0..g.n() {
        for p in truncated_walk(g, v, 0.0, steps).iter().skip(1) {
            let order = sweep_order(g, p);
            let mut inside = vec![false; g.n()];
            let (mut vol, mut bd) = (Vec::new(), Vec::new());
            let (mut cv, mut cb) = (0u64, 0i64);
            for &x in &order {
                let within = g.neighbors(x).iter().filter(|&&y| inside[y]).count() as i64;
                inside[x] = true;
                cv += g.degree(x) as u64;
                cb += g.degree(x) as i64 - 2 * within;
                vol.push(cv);
                bd.push(cb as u64);
            }
            let phi_of = |j: usize| {
                let den = vol[j].min(total - vol[j]);
                if den == 0 {
                    f64::INFINITY
                } else {
                    bd[j] as f64 / den as f64
                }
            };
            for j in 0..order.len() {
                if phi_of(j) > phi || 6 * vol[j] > 5 * total {
                    continue;
                }
                qualifying += 1;
                for k in j..order.len() {
                    if vol[k] as f64 > (1.0 + phi) * vol[j] as f64 {
                        break;
                    }
                    checked += 1;
                    if phi_of(k) > 12.0 * phi {
                        violations += 1;
                    }
                }
            }
        }
    }
    (qualifying, checked, violations)
}

/// A positive sequence with `D >= 48 log^2 m` and sum at most `m`, with
/// a few heavy spikes. `m = 2^16`.
pub fn balanced_sequence(seed: u64) -> (Vec<u64>, usize) {
    let m = 1usize << 16;
    let need = (48.0 * log2m(m).powi(2)).ceil() as usize;
    let mut rng = seeded(seed, 0x6261_6c61);
    let d = rng.gen_range(need..need + 4000);
    let mut a = vec![1u64; d];
    let mut budget = (m - d) as u64;
    for _ in 0..rng.gen_range(0..6) {
        let i = rng.gen_range(0..d);
        let spike = rng.gen_range(0..=budget / 4);
        a[i] += spike;
        budget -= spike;
    }
    while budget > 0 {
        let i = rng.gen_range(0..d);
        let add = rng.gen_range(1..=budget.min(8));
        a[i] += add;
        budget -= add;
        if rng.gen_bool(0.001) {
            break;
        }
    }
    (a, m)
}

/// `j` in `[D/4, 3D/4]` and `a_j 12 log m <= min(sum before j, sum after j)`.
pub fn balanced_ok(a: &[u64], m: usize, j: usize) -> bool {
    let d = a.len();
    if j == 0 || 4 * j < d || 4 * j > 3 * d {
        return false;
    }
    let before: u64 = a[..j - 1].iter().sum();
    let after: u64 = a[j..].iter().sum();
    a[j - 1] as f64 * 12.0 * log2m(m) <= before.min(after) as f64
}

/// Two dense blocks joined by one edge, with the remaining vertices (up to
/// `n`) hung off random block vertices as pendants, so low-volume vertices
/// can extend a sparse prefix.
pub fn planted_with_pendants(block: usize, n: usize, seed: u64) -> Graph {
    let mut rng = seeded(seed, 0x7065_6e64);
    let mut edges = Vec::new();
    for b in 0..2 {
        let off = b * block;
        for u in 0..block {
            for v in u + 1..block {
                if v == u + 1 || rng.gen_bool(0.8) {
                    edges.push((off + u, off + v));
                }
            }
        }
    }
    edges.push((block - 1, block));
    for x in 2 * block..n {
        edges.push((rng.gen_range(0..x), x));
    }
    Graph::from_edges(n, edges).unwrap()
}
