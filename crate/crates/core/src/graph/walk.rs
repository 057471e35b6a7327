use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{Graph, GraphError};

/// Exact mixing times are computed only up to this many vertices.
pub const MIXING_MAX_VERTICES: usize = 2000;

/// Dense lazy walk matrix `T = (A D^{-1} + I) / 2`; column `u` is the
/// distribution after one step from `u`.
pub fn lazy_walk_matrix(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut t = DMatrix::zeros(n, n);
    for u in 0..n {
        let d = g.degree(u);
        if d == 0 {
            t[(u, u)] = 1.0;
            continue;
        }
        t[(u, u)] = 0.5;
        let share = 0.5 / d as f64;
        for &v in g.neighbors(u) {
            t[(v, u)] += share;
        }
    }
    t
}

/// Stationary distribution `deg(v) / 2m`.
pub fn stationary(g: &Graph) -> Vec<f64> {
    let vol = g.total_volume() as f64;
    (0..g.n()).map(|v| g.degree(v) as f64 / vol).collect()
}

/// One lazy step applied to every row of `rows` (row `s` = walk from `s`).
fn step_all(g: &Graph, rows: &mut [Vec<f64>], scratch: &mut [Vec<f64>]) {
    rows.par_iter()
        .zip(scratch.par_iter_mut())
        .for_each(|(p, out)| {
            for v in 0..g.n() {
                let mut acc = 0.5 * p[v];
                for &u in g.neighbors(v) {
                    acc += 0.5 * p[u] / g.degree(u) as f64;
                }
                out[v] = acc;
            }
        });
    for (r, s) in rows.iter_mut().zip(scratch.iter_mut()) {
        std::mem::swap(r, s);
    }
}

fn mixed(rows: &[Vec<f64>], pi: &[f64]) -> bool {
    let n = pi.len() as f64;
    rows.par_iter().all(|p| {
        p.iter()
            .zip(pi)
            .all(|(&x, &q)| (x - q).abs() <= q / n + 1e-13)
    })
}

fn check_mixing_input(g: &Graph) -> Result<(), GraphError> {
    if g.n() > MIXING_MAX_VERTICES {
        return Err(GraphError::TooLarge {
            n: g.n(),
            limit: MIXING_MAX_VERTICES,
        });
    }
    if g.m() == 0 || !g.is_connected() {
        return Err(GraphError::InfiniteMixingTime);
    }
    Ok(())
}

/// Smallest `t` with `|p_t^s(v) - pi(v)| <= pi(v)/n` for every start `s` and
/// vertex `v`, found by stepping all `n` walks together. Gives up after
/// `max_steps` and returns `Ok(None)`.
pub fn mixing_time_capped(g: &Graph, max_steps: usize) -> Result<Option<usize>, GraphError> {
    check_mixing_input(g)?;
    let n = g.n();
    let pi = stationary(g);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut r = vec![0.0; n];
            r[s] = 1.0;
            r
        })
        .collect();
    if mixed(&rows, &pi) {
        return Ok(Some(0));
    }
    let mut scratch = vec![vec![0.0; n]; n];
    for t in 1..=max_steps {
        step_all(g, &mut rows, &mut scratch);
        if mixed(&rows, &pi) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Exact mixing time; see [`mixing_time_capped`].
pub fn mixing_time_exact(g: &Graph) -> Result<usize, GraphError> {
    // A connected lazy walk mixes; the cap only guards against numerical stalls.
    let cap = 64 * g.n() * g.n() * (g.n().max(2) as f64).log2().ceil() as usize + 64;
    mixing_time_capped(g, cap)?.ok_or(GraphError::InfiniteMixingTime)
}

/// Whether the mixing inequality holds for every start after exactly `t` steps.
pub fn satisfies_mixing_condition(g: &Graph, t: usize) -> Result<bool, GraphError> {
    check_mixing_input(g)?;
    let n = g.n();
    let pi = stationary(g);
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            let mut r = vec![0.0; n];
            r[s] = 1.0;
            r
        })
        .collect();
    let mut scratch = vec![vec![0.0; n]; n];
    for _ in 0..t {
        step_all(g, &mut rows, &mut scratch);
    }
    Ok(mixed(&rows, &pi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorSpec};

    #[test]
    fn small_mixing_times() {
        let k2 = generate(&GeneratorSpec::Clique { n: 2 }, 0).unwrap();
        assert_eq!(mixing_time_exact(&k2).unwrap(), 1);
        let k4 = generate(&GeneratorSpec::Clique { n: 4 }, 0).unwrap();
        assert_eq!(mixing_time_exact(&k4).unwrap(), 3);
    }

    #[test]
    fn k4_deviation_formula() {
        // From a vertex of K4 the deviation at the start is (3/4)*3^{-t}; the bound is 1/16.
        let first = (0..).find(|&t| 0.75 * 3f64.powi(-t) <= 1.0 / 16.0).unwrap();
        assert_eq!(first, 3);
    }

    #[test]
    fn cycle_mixing_is_quadratic() {
        let c = generate(&GeneratorSpec::Cycle { n: 64 }, 0).unwrap();
        let t = mixing_time_exact(&c).unwrap();
        assert!(t >= 64 * 64 / 8, "t = {t}");
        assert!(satisfies_mixing_condition(&c, t).unwrap());
        assert!(!satisfies_mixing_condition(&c, t - 1).unwrap());
    }

    #[test]
    fn disconnected_is_infinite() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(mixing_time_exact(&g), Err(GraphError::InfiniteMixingTime));
    }

    #[test]
    fn stationary_is_fixed_point() {
        let g = generate(&GeneratorSpec::ErdosRenyi { n: 30, p: 0.3, drop_isolated: true }, 3).unwrap();
        let t = lazy_walk_matrix(&g);
        let pi = nalgebra::DVector::from_vec(stationary(&g));
        let next = &t * &pi;
        for v in 0..g.n() {
            assert!((next[v] - pi[v]).abs() < 1e-12);
        }
    }
}
