use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::{Edge, Graph, GraphError, VertexSet};

/// Brute-force sparsest cut scans all 2^n subsets; beyond this it is refused.
pub const SPARSEST_CUT_MAX_VERTICES: usize = 24;

/// A cut `(S, V \ S)` together with its exact conductance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub side: VertexSet,
    pub boundary_size: u64,
    pub vol_s: u64,
    pub vol_complement: u64,
    pub phi: Ratio<u64>,
}

/// Plain-data form of a [`Cut`] for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSummary {
    pub side: Vec<usize>,
    pub boundary_size: u64,
    pub vol_s: u64,
    pub vol_complement: u64,
    pub phi_num: u64,
    pub phi_den: u64,
}

impl Cut {
    pub fn phi_f64(&self) -> f64 {
        *self.phi.numer() as f64 / *self.phi.denom() as f64
    }

    /// `phi <= num/den`, compared exactly.
    pub fn phi_at_most(&self, num: u64, den: u64) -> bool {
        (*self.phi.numer() as u128) * (den as u128) <= (num as u128) * (*self.phi.denom() as u128)
    }

    pub fn summary(&self) -> CutSummary {
        CutSummary {
            side: self.side.to_vec(),
            boundary_size: self.boundary_size,
            vol_s: self.vol_s,
            vol_complement: self.vol_complement,
            phi_num: *self.phi.numer(),
            phi_den: *self.phi.denom(),
        }
    }
}

pub fn volume(g: &Graph, s: &VertexSet) -> u64 {
    s.iter().map(|v| g.degree(v) as u64).sum()
}

pub fn boundary(g: &Graph, s: &VertexSet) -> Vec<Edge> {
    g.edges()
        .iter()
        .copied()
        .filter(|e| s.contains(e.0) != s.contains(e.1))
        .collect()
}

fn boundary_count(g: &Graph, s: &VertexSet) -> u64 {
    s.iter()
        .map(|v| g.neighbors(v).iter().filter(|&&w| !s.contains(w)).count() as u64)
        .sum()
}

/// Exact conductance of `s`. Both sides must be nonempty with positive volume.
pub fn conductance(g: &Graph, s: &VertexSet) -> Result<Cut, GraphError> {
    if s.is_empty() || s.len() >= g.n() {
        return Err(GraphError::EmptySide);
    }
    let vol_s = volume(g, s);
    let vol_complement = g.total_volume() - vol_s;
    let denom = vol_s.min(vol_complement);
    if denom == 0 {
        return Err(GraphError::EmptySide);
    }
    let boundary_size = boundary_count(g, s);
    Ok(Cut {
        side: s.clone(),
        boundary_size,
        vol_s,
        vol_complement,
        phi: Ratio::new(boundary_size, denom),
    })
}

/// Exhaustive minimum-conductance cut. Ties go to the lexicographically smallest
/// side (as a sorted vertex list); each cut is considered from both sides.
pub fn sparsest_cut_bruteforce(g: &Graph) -> Result<Cut, GraphError> {
    let n = g.n();
    if n > SPARSEST_CUT_MAX_VERTICES {
        return Err(GraphError::TooLarge {
            n,
            limit: SPARSEST_CUT_MAX_VERTICES,
        });
    }
    if n < 2 {
        return Err(GraphError::EmptySide);
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |acc, &w| acc | (1 << w)))
        .collect();
    let total = g.total_volume();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let mut mask: u32 = 0;
    let mut vol: u64 = 0;
    let mut bnd: i64 = 0;
    // best = (boundary, min volume, mask)
    let mut best: Option<(u64, u64, u32)> = None;
    for i in 1u64..(1u64 << n) {
        let bit = i.trailing_zeros() as usize;
        let inside = (adj[bit] & mask).count_ones() as i64;
        let deg = g.degree(bit) as i64;
        if mask & (1 << bit) == 0 {
            mask |= 1 << bit;
            vol += deg as u64;
            bnd += deg - 2 * inside;
        } else {
            mask &= !(1 << bit);
            vol -= deg as u64;
            bnd -= deg - 2 * inside;
        }
        if mask == full {
            continue;
        }
        let denom = vol.min(total - vol);
        if denom == 0 {
            continue;
        }
        let b = bnd as u64;
        let side = if lex_less(!mask & full, mask) {
            !mask & full
        } else {
            mask
        };
        let better = match best {
            None => true,
            Some((bb, bd, bm)) => {
                let lhs = b as u128 * bd as u128;
                let rhs = bb as u128 * denom as u128;
                lhs < rhs || (lhs == rhs && lex_less(side, bm))
            }
        };
        if better {
            best = Some((b, denom, side));
        }
    }
    let (_, _, side) = best.ok_or(GraphError::EmptySide)?;
    let set = VertexSet::from_members(n, (0..n).filter(|&v| side & (1 << v) != 0));
    conductance(g, &set)
}

/// Lexicographic order on the sorted member lists of two bitmasks.
fn lex_less(a: u32, b: u32) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a == 0, b == 0) {
            (true, true) => return false,
            (true, false) => return true,
            (false, true) => return false,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x < y;
        }
        a &= a - 1;
        b &= b - 1;
    }
}
