//! Logarithm conventions shared by all parameter formulas: `log` is base 2,
//! `ln` is natural, and `log m` is taken as 1 when `m < 2`.

pub fn log2m(m: usize) -> f64 {
    if m < 2 {
        1.0
    } else {
        (m as f64).log2()
    }
}

pub fn ceil_log2m(m: usize) -> usize {
    log2m(m).ceil() as usize
}

/// `ln(m * e^4)`.
pub fn ln_me4(m: usize) -> f64 {
    (m.max(1) as f64).ln() + 4.0
}

/// `n^delta`.
pub fn pow_delta(n: usize, delta: f64) -> f64 {
    (n as f64).powf(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        assert_eq!(log2m(0), 1.0);
        assert_eq!(log2m(1), 1.0);
        assert_eq!(log2m(1024), 10.0);
        assert_eq!(ceil_log2m(1000), 10);
        assert!((ln_me4(1) - 4.0).abs() < 1e-15);
    }
}
