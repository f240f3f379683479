//! One-dimensional quadrature rules.
//!
//! Everything downstream is built from tensor products of these rules:
//! Gauss-Legendre (single panel or composite with user breakpoints), the
//! periodic trapezoid rule for azimuthal integrals, and an adaptive
//! Gauss-Legendre driver for integrals with variable upper limits.

use std::f64::consts::PI;

/// Nodes and weights of a 1D rule on a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `n`-point Gauss-Legendre rule on `[a, b]`.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_nodes(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Rule {
            nodes: x.iter().map(|&xi| mid + half * xi).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
        }
    }

    /// Composite Gauss-Legendre with `n_per_panel` nodes on each interval
    /// between consecutive `breaks`.
    pub fn composite_gauss(breaks: &[f64], n_per_panel: usize) -> Self {
        assert!(breaks.len() >= 2, "composite rule needs at least two breakpoints");
        let (x, w) = legendre_nodes(n_per_panel);
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * n_per_panel);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            assert!(b > a, "breakpoints must be strictly increasing");
            let half = 0.5 * (b - a);
            let mid = 0.5 * (b + a);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Rule { nodes, weights }
    }

    /// Periodic trapezoid rule with `n` equispaced nodes on `[a, b)`.
    pub fn periodic_trapezoid(n: usize, a: f64, b: f64) -> Self {
        assert!(n > 0);
        let h = (b - a) / n as f64;
        Rule {
            nodes: (0..n).map(|i| a + h * i as f64).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Adaptive quadrature on `[a, b]`: a panel is accepted once its 10- and
/// 20-point Gauss-Legendre values agree to `tol` (scaled by panel length).
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (sign, lo, hi) = if a < b { (1.0, a, b) } else { (-1.0, b, a) };
    let coarse = legendre_nodes(10);
    let fine = legendre_nodes(20);
    let total_len = hi - lo;
    let mut stack = vec![(lo, hi, 0usize)];
    let mut sum = 0.0;
    while let Some((x0, x1, depth)) = stack.pop() {
        let half = 0.5 * (x1 - x0);
        let mid = 0.5 * (x1 + x0);
        let g10: f64 = coarse
            .0
            .iter()
            .zip(&coarse.1)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half;
        let g20: f64 = fine
            .0
            .iter()
            .zip(&fine.1)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half;
        let budget = tol * (x1 - x0) / total_len;
        if (g20 - g10).abs() <= budget.max(1e-15 * g20.abs()) || depth >= 40 {
            sum += g20;
        } else {
            stack.push((mid, x1, depth + 1));
            stack.push((x0, mid, depth + 1));
        }
    }
    sign * sum
}
