//! Tensor-product Gauss–Legendre evaluation of the linking integrand over two
//! segments. It shares nothing with the closed form in [`crate::geometry`]
//! beyond the segment type, so it serves as an independent check of it.

use std::f64::consts::PI;

use crate::geometry::Segment;

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `order` nodes, computed by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th root in descending order.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map from [-1, 1] to [0, 1].
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[0, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integral of `f` over `[0, 1]²`.
    pub fn integrate_square(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.integrate(|s| self.integrate(|t| f(s, t)))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Quadrature of the linking integrand
/// `(γ₂ − γ₁)·(γ₂′ × γ₁′) / |γ₂ − γ₁|³ / 4π` over both unit parameter ranges.
pub fn gli_quadrature_oracle(s1: &Segment, s2: &Segment, order: usize) -> f64 {
    assert!(order >= 2, "oracle order must be at least 2");
    let rule = GaussLegendre::new(order);
    let d1 = s1.direction();
    let d2 = s2.direction();
    let tangent_cross = d2.cross(d1);
    rule.integrate_square(|s, t| {
        let r = s2.point_at(t) - s1.point_at(s);
        let dist = r.norm();
        r.dot(tangent_cross) / (dist * dist * dist)
    }) / (4.0 * PI)
}

/// Quadrature of `1 / |γ₂ − γ₁|³ / 4π`, the factor `I` in `G = V·I`.
pub fn kernel_integral(s1: &Segment, s2: &Segment, order: usize) -> f64 {
    let rule = GaussLegendre::new(order);
    rule.integrate_square(|s, t| {
        let dist = (s2.point_at(t) - s1.point_at(s)).norm();
        1.0 / (dist * dist * dist)
    }) / (4.0 * PI)
}
