//! Composite Gauss–Legendre rule for the Gaussian-weighted integrals that
//! have no closed form.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::hermite::normal_pdf;

/// Nodes per panel of the default composite rule.
pub const DEFAULT_NODES: usize = 16;
/// Panels of the default composite rule.
pub const DEFAULT_PANELS: usize = 180;
/// Default integration half-width; every integrand decays at least like `e^{−t²/4}`.
pub const DEFAULT_HALF_WIDTH: f64 = 45.0;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
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
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre applied on equal panels of a fixed interval.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    rule: GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
}

impl CompositeRule {
    pub fn new(nodes: usize, panels: usize, a: f64, b: f64) -> Self {
        assert!(panels >= 1 && b > a);
        Self {
            rule: GaussLegendre::new(nodes),
            a,
            b,
            panels,
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        let h = (self.b - self.a) / self.panels as f64;
        (0..self.panels)
            .map(|i| {
                let lo = self.a + i as f64 * h;
                self.rule.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }

    /// Mapped nodes and weights of every panel.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = (self.b - self.a) / self.panels as f64;
        (0..self.panels).flat_map(move |i| {
            let lo = self.a + i as f64 * h;
            self.rule.points(lo, lo + h)
        })
    }
}

/// The shared rule: 16 nodes on each of 180 panels of `[-45, 45]`.
pub fn default_rule() -> &'static CompositeRule {
    static RULE: OnceLock<CompositeRule> = OnceLock::new();
    RULE.get_or_init(|| {
        CompositeRule::new(
            DEFAULT_NODES,
            DEFAULT_PANELS,
            -DEFAULT_HALF_WIDTH,
            DEFAULT_HALF_WIDTH,
        )
    })
}

/// `∫ f(t) g(t) φ_{σ_Y²}(t) dt` over `[-45, 45]`.
pub fn y_inner<F, G>(f: F, g: G, sigma_y2: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    default_rule().integrate(|t| f(t) * g(t) * normal_pdf(t, sigma_y2))
}

/// `‖f‖_Y` by quadrature.
pub fn y_norm<F: Fn(f64) -> f64>(f: F, sigma_y2: f64) -> f64 {
    default_rule()
        .integrate(|t| {
            let v = f(t);
            v * v * normal_pdf(t, sigma_y2)
        })
        .max(0.0)
        .sqrt()
}
