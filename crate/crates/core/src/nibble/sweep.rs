use serde::{Deserialize, Serialize};

use super::walk::Distribution;
use crate::graph::{Graph, VertexId};

/// A prefix `order[..j]` of the sweep order, with the ladder step `x` that selected it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepPrefix {
    /// Support sorted by decreasing `p(v)/deg(v)`, ties by ascending id.
    pub order: Vec<VertexId>,
    pub j: usize,
    pub x: u64,
    pub volume: u64,
    pub boundary: u64,
}

impl SweepPrefix {
    pub fn members(&self) -> &[VertexId] {
        &self.order[..self.j]
    }
}

/// `(1 + phi)^x`. Every ladder comparison goes through this one function.
pub fn ladder(phi: f64, x: u64) -> f64 {
    (1.0 + phi).powi(x as i32)
}

/// Last ladder index, `ceil(log_{1+phi}((5/6) Vol(V)))`.
pub fn ladder_top(phi: f64, total_volume: u64) -> u64 {
    let target = 5.0 * total_volume as f64 / 6.0;
    if target <= 1.0 {
        return 0;
    }
    (target.ln() / (1.0 + phi).ln()).ceil() as u64
}

/// Exact test `boundary / min(vol, total - vol) <= 12 phi` with both sides nonempty.
pub fn qualifies(boundary: u64, volume: u64, total: u64, phi: f64) -> bool {
    let denom = volume.min(total - volume);
    denom > 0 && boundary as f64 <= 12.0 * phi * denom as f64
}

pub fn sweep_order(g: &Graph, p: &Distribution) -> Vec<VertexId> {
    let mut rho: Vec<(f64, VertexId)> = p
        .entries
        .iter()
        .map(|&(v, x)| (x / g.degree(v) as f64, v))
        .collect();
    sort_by_rho(&mut rho);
    rho.into_iter().map(|e| e.1).collect()
}

pub(crate) fn sort_by_rho(rho: &mut [(f64, VertexId)]) {
    rho.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
}

/// Prefix volumes and boundary sizes: entry `j - 1` describes `order[..j]`.
pub(crate) fn prefix_stats(g: &Graph, order: &[VertexId], rank: &mut [usize]) -> (Vec<u64>, Vec<u64>) {
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    let mut vols = Vec::with_capacity(order.len());
    let mut bnds = Vec::with_capacity(order.len());
    let (mut vol, mut bnd) = (0u64, 0i64);
    for (i, &v) in order.iter().enumerate() {
        let inside = g.neighbors(v).iter().filter(|&&w| rank[w] < i).count() as i64;
        vol += g.degree(v) as u64;
        bnd += g.degree(v) as i64 - 2 * inside;
        vols.push(vol);
        bnds.push(bnd as u64);
    }
    for &v in order {
        rank[v] = usize::MAX;
    }
    (vols, bnds)
}

/// Steps (3)-(4) exactly as written: for each `x` in the ladder take the
/// largest `j <= j_max` whose prefix volume is at most `(1+phi)^x`, and
/// return the first prefix with conductance at most `12 phi`.
pub fn sweep_cut(g: &Graph, p: &Distribution, phi: f64) -> Option<SweepPrefix> {
    let order = sweep_order(g, p);
    let mut rank = vec![usize::MAX; g.n()];
    let (vols, bnds) = prefix_stats(g, &order, &mut rank);
    let total = g.total_volume();
    for x in 0..=ladder_top(phi, total) {
        let target = ladder(phi, x);
        let j = vols.partition_point(|&v| v as f64 <= target);
        if j == 0 {
            continue;
        }
        if qualifies(bnds[j - 1], vols[j - 1], total, phi) {
            return Some(SweepPrefix {
                order,
                j,
                x,
                volume: vols[j - 1],
                boundary: bnds[j - 1],
            });
        }
    }
    None
}

/// The values `(1+phi)^x` for `x` in `0..=ladder_top`, computed once per scale.
pub(crate) struct Ladder {
    pub phi: f64,
    pub values: Vec<f64>,
}

impl Ladder {
    pub fn new(phi: f64, total_volume: u64) -> Self {
        let values = (0..=ladder_top(phi, total_volume)).map(|x| ladder(phi, x)).collect();
        Ladder { phi, values }
    }

    /// Smallest `x` with `(1+phi)^x >= vol`, or `None` past the top.
    pub fn first_at_least(&self, vol: u64) -> Option<u64> {
        let x = self.values.partition_point(|&v| v < vol as f64);
        (x < self.values.len()).then_some(x as u64)
    }
}

/// Same answer as [`sweep_cut`] in `O(Vol(support))`: prefix `j` is examined
/// by some ladder step iff the first step reaching its volume does not
/// already reach the next prefix, and steps visit prefixes in increasing `j`.
pub(crate) fn sweep_cut_fast(
    g: &Graph,
    order: Vec<VertexId>,
    ladder: &Ladder,
    rank: &mut [usize],
) -> Option<SweepPrefix> {
    let (vols, bnds) = prefix_stats(g, &order, rank);
    let total = g.total_volume();
    let s = vols.len();
    for j in 1..=s {
        let vol = vols[j - 1];
        let x = ladder.first_at_least(vol)?;
        if j < s && ladder.values[x as usize] >= vols[j] as f64 {
            continue;
        }
        if qualifies(bnds[j - 1], vol, total, ladder.phi) {
            return Some(SweepPrefix {
                order,
                j,
                x,
                volume: vol,
                boundary: bnds[j - 1],
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{conductance, generate, GeneratorSpec, VertexSet};
    use crate::nibble::walk::truncated_walk;

    #[test]
    fn ladder_step_is_minimal() {
        for &phi in &[0.5, 0.02, 1.0 / 2160.0] {
            let l = Ladder::new(phi, 80_000);
            for vol in [1u64, 2, 3, 17, 1000, 65_400] {
                let x = l.first_at_least(vol).unwrap();
                assert!(ladder(phi, x) >= vol as f64);
                assert!(x == 0 || ladder(phi, x - 1) < vol as f64);
            }
        }
    }

    #[test]
    fn barbell_side_is_found() {
        let g = generate(&GeneratorSpec::Barbell { k: 8, bridges: 1 }, 0).unwrap();
        // Mass spread uniformly (by degree) over the first clique.
        let vol: f64 = (0..8).map(|v| g.degree(v) as f64).sum();
        let p = Distribution {
            entries: (0..8).map(|v| (v, g.degree(v) as f64 / vol)).collect(),
        };
        let cut = sweep_cut(&g, &p, 1.0 / 100.0).unwrap();
        let mut side = cut.members().to_vec();
        side.sort_unstable();
        assert_eq!(side, (0..8).collect::<Vec<_>>());
        let c = conductance(&g, &VertexSet::from_members(16, side)).unwrap();
        assert_eq!((*c.phi.numer(), *c.phi.denom()), (1, 57));
    }

    #[test]
    fn clique_has_no_sparse_prefix() {
        let g = generate(&GeneratorSpec::Clique { n: 8 }, 0).unwrap();
        for t in [1, 2, 5, 30] {
            let p = truncated_walk(&g, 3, 0.0, t).pop().unwrap();
            assert!(sweep_cut(&g, &p, 1.0 / 200.0).is_none());
        }
    }

    #[test]
    fn uniform_rho_orders_by_id() {
        let g = generate(&GeneratorSpec::Cycle { n: 6 }, 0).unwrap();
        let p = Distribution {
            entries: (0..6).map(|v| (v, 1.0 / 6.0)).collect(),
        };
        assert_eq!(sweep_order(&g, &p), vec![0, 1, 2, 3, 4, 5]);
        let a = sweep_cut(&g, &p, 1.0 / 13.0);
        let b = sweep_cut(&g, &p, 1.0 / 13.0);
        assert_eq!(a, b);
    }

    #[test]
    fn fast_sweep_matches_literal() {
        for seed in 0..20 {
            let g = generate(
                &GeneratorSpec::PlantedCut { block: 12, p: 0.5, cross_edges: 2 },
                seed,
            )
            .unwrap();
            for t in [1, 2, 3, 6, 10, 40] {
                let p = truncated_walk(&g, 0, 1e-4, t).pop().unwrap();
                if p.is_empty() {
                    continue;
                }
                for phi in [1.0 / 15.0, 1.0 / 50.0, 0.005] {
                    let mut rank = vec![usize::MAX; g.n()];
                    let l = Ladder::new(phi, g.total_volume());
                    let fast = sweep_cut_fast(&g, sweep_order(&g, &p), &l, &mut rank);
                    assert_eq!(fast, sweep_cut(&g, &p, phi), "seed {seed} t {t} phi {phi}");
                }
            }
        }
    }
}
