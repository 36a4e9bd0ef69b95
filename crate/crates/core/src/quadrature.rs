//! Composite Gauss-Legendre quadrature.
//!
//! Used as an independent oracle for the closed-form integrals: it only
//! samples the integrand pointwise. Callers pass the integrand's known
//! discontinuities so that no panel straddles a jump.

/// Nodes and weights of the `order`-point rule on `[-1, 1]`, by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let j = j as f64;
                let p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 1 { x } else { p1 };
            let pm1 = if order == 1 { 1.0 } else { p0 };
            dp = n * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Clone, Debug)]
pub struct CompositeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeRule {
    /// `panels` is the approximate total panel count over `[0, 1]`.
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights, panels: panels.max(1) }
    }

    /// `∫_a^b g` with panels split at every point of `breaks` inside `(a, b)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut edges: Vec<f64> = std::iter::once(a)
            .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
            .chain(std::iter::once(b))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut total = 0.0;
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let count = ((hi - lo) * self.panels as f64).ceil().max(1.0) as usize;
            let h = (hi - lo) / count as f64;
            for p in 0..count {
                let left = lo + h * p as f64;
                let mid = left + 0.5 * h;
                let sum: f64 = self.nodes.iter().zip(&self.weights).map(|(&t, &wt)| wt * g(mid + 0.5 * h * t)).sum();
                total += 0.5 * h * sum;
            }
        }
        total
    }
}

/// Uniform dyadic grid `m / 2^level`.
pub fn dyadic_grid(level: u32) -> Vec<f64> {
    let cells = 1u64 << level;
    (0..=cells).map(|m| m as f64 / cells as f64).collect()
}
