//! Composite Gauss-Legendre quadrature.
//!
//! Nodes are computed once per rule by Newton iteration on the Legendre
//! three-term recurrence. The composite rule splits the interval into equal
//! panels and applies the same rule on each one, which keeps sharply peaked
//! integrands (small-variance wrapped normals) well resolved.

use std::f64::consts::PI;

/// Panels used by the default phase-integral rule.
pub const DEFAULT_PANELS: usize = 64;
/// Nodes per panel used by the default phase-integral rule.
pub const DEFAULT_NODES: usize = 16;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule on `[-1, 1]`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node/weight pairs of the composite rule over `[a, b]` with `panels`
    /// equal sub-intervals.
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        assert!(panels >= 1);
        let width = (b - a) / panels as f64;
        let half = 0.5 * width;
        let mut points = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                points.push((mid + half * x, half * w));
            }
        }
        points
    }

    /// Integrates a real function over `[a, b]` with the composite rule.
    pub fn integrate<F>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        self.composite_points(a, b, panels)
            .into_iter()
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Half-width, in standard deviations, beyond which a wrapped normal density
/// is below double-precision resolution.
pub const PHASE_WINDOW_SIGMAS: f64 = 12.0;

/// Node/weight pairs of the default rule over `[-π, π]`.
pub fn phase_points() -> Vec<(f64, f64)> {
    GaussLegendre::new(DEFAULT_NODES).composite_points(-PI, PI, DEFAULT_PANELS)
}

/// Node/weight pairs for integrating against a wrapped normal of standard
/// deviation `sigma`. The rule covers `[-π, π]` but is confined to
/// `±12σ` when that is narrower, where the density outside is below 1e-31.
pub fn phase_points_for(sigma: f64) -> Vec<(f64, f64)> {
    let half = (PHASE_WINDOW_SIGMAS * sigma).min(PI);
    GaussLegendre::new(DEFAULT_NODES).composite_points(-half, half, DEFAULT_PANELS)
}
