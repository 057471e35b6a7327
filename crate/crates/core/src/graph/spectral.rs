use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Graph;

/// Largest graph handed to the dense eigensolver.
pub const DENSE_EIGEN_MAX_VERTICES: usize = 3000;

fn normalized_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut l = DMatrix::identity(n, n);
    for e in g.edges() {
        let w = 1.0 / ((g.degree(e.0) * g.degree(e.1)) as f64).sqrt();
        l[(e.0, e.1)] -= w;
        l[(e.1, e.0)] -= w;
    }
    l
}

/// Second-smallest eigenvalue of `I - D^{-1/2} A D^{-1/2}` by dense
/// decomposition. `None` if the graph is too large, has an isolated vertex or
/// fewer than two vertices.
pub fn normalized_laplacian_lambda2(g: &Graph) -> Option<f64> {
    let n = g.n();
    if n < 2 || n > DENSE_EIGEN_MAX_VERTICES || (0..n).any(|v| g.degree(v) == 0) {
        return None;
    }
    let eig = SymmetricEigen::new(normalized_laplacian(g));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(vals[1].max(0.0))
}

/// Power-iteration estimate of the spectral gap `lambda_2` of the normalized
/// Laplacian, for graphs past the dense limit. Not a certified bound.
pub fn spectral_gap_estimate(g: &Graph, iterations: usize) -> f64 {
    if let Some(l2) = normalized_laplacian_lambda2(g) {
        return l2;
    }
    let n = g.n();
    let sqrt_deg: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
    let norm = sqrt_deg.iter().map(|x| x * x).sum::<f64>().sqrt();
    let top = DVector::from_iterator(n, sqrt_deg.iter().map(|x| x / norm));
    // Iterate M = (I + D^{-1/2} A D^{-1/2}) / 2, whose second eigenvalue is 1 - lambda_2/2.
    let mut x = DVector::from_iterator(n, (0..n).map(|i| ((i * 7919 + 13) % 101) as f64 - 50.0));
    let mut mu = 1.0;
    for _ in 0..iterations.max(1) {
        let proj = x.dot(&top);
        x -= &top * proj;
        let nx = x.norm();
        if nx == 0.0 {
            return 1.0;
        }
        x /= nx;
        let mut y = DVector::zeros(n);
        for v in 0..n {
            let mut acc = 0.5 * x[v];
            for &u in g.neighbors(v) {
                acc += 0.5 * x[u] / (sqrt_deg[u] * sqrt_deg[v]);
            }
            y[v] = acc;
        }
        mu = y.dot(&x);
        x = y;
    }
    (2.0 * (1.0 - mu)).max(0.0)
}
