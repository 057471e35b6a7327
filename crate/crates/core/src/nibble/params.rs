use serde::{Deserialize, Serialize};

use crate::math::{ceil_log2m, ln_me4, log2m};

/// Parameters of one scale `b` of the Nibble loop, recomputed from
/// `(phi, m, b)` on every construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub phi: f64,
    pub m: usize,
    pub b: u32,
    /// `ceil(49 ln(m e^4) / phi^2)`.
    pub t0: u64,
    /// `phi / (56 ln(m e^4) t0 2^b)`.
    pub eps: f64,
    /// `5 phi / (392 ln(m e^4))`; analysis constant, not used by the loop.
    pub gamma: f64,
}

impl WalkParams {
    pub fn new(phi: f64, m: usize, b: u32) -> Self {
        let l = ln_me4(m);
        let t0 = (49.0 * l / (phi * phi)).ceil().max(1.0) as u64;
        let eps = phi / (56.0 * l * t0 as f64 * 2f64.powi(b as i32));
        WalkParams {
            phi,
            m,
            b,
            t0,
            eps,
            gamma: 5.0 * phi / (392.0 * l),
        }
    }

    /// Scales `b = 1..=ceil(log2 m)`.
    pub fn scales(m: usize) -> std::ops::RangeInclusive<u32> {
        1..=ceil_log2m(m) as u32
    }

    /// `K_b = ceil(c log2 m Vol(V) / 2^b)`.
    pub fn sample_count(&self, c: f64, volume: u64) -> u64 {
        (c * log2m(self.m) * volume as f64 / 2f64.powi(self.b as i32)).ceil() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas() {
        let p = WalkParams::new(0.1, 100, 3);
        let l = (100f64).ln() + 4.0;
        assert_eq!(p.t0, (49.0 * l / 0.01).ceil() as u64);
        let want = 0.1 / (56.0 * l * p.t0 as f64 * 8.0);
        assert!((p.eps - want).abs() <= want * 1e-12);
        assert!(p.eps > 0.0 && p.t0 >= 1);
        assert_eq!(WalkParams::scales(1000), 1..=10);
        assert_eq!(WalkParams::scales(1), 1..=1);
        assert_eq!(p.sample_count(4.0, 200), (4.0 * 100f64.log2() * 200.0 / 8.0).ceil() as u64);
    }
}
