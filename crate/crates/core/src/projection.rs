//! Euclidean projection onto the convex hull of the basis columns.
//!
//! Uses Wolfe's nearest-point algorithm on the translated points
//! `p_c = u_c − v`: keep a small affinely independent "corral" of columns,
//! move to the minimum-norm point of its affine hull when that point lies
//! inside the corral's simplex, otherwise step toward it and drop the columns
//! whose weight hits zero. A major iteration adds the column that most
//! violates the optimality condition. The corral never holds more than
//! `J + 1` columns, so each step is a small dense least-squares problem.
//!
//! The stopping rule is the variational inequality for projection onto a
//! convex set: with `p` the current point,
//! `max_c (v − p)·(u_c − p) ≤ tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::BasisSet;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub distance: f64,
    /// One weight per basis column, nonnegative, summing to one.
    pub weights: Vec<f64>,
    pub projected_point: Vec<f64>,
    /// `max_c (v − p)·(u_c − p)` at the returned point.
    pub kkt_residual: f64,
    pub iterations: usize,
}

impl ProjectionResult {
    /// Columns with positive weight, in increasing order.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Reusable solver over one basis.
#[derive(Debug, Clone, Copy)]
pub struct Projector<'a> {
    basis: &'a BasisSet,
    tol: f64,
    max_iter: usize,
}

struct Solution {
    corral: Vec<usize>,
    lambda: Vec<f64>,
    x: Vec<f64>,
    gap: f64,
    iterations: usize,
}

impl<'a> Projector<'a> {
    pub fn new(basis: &'a BasisSet) -> Self {
        Self {
            basis,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn basis(&self) -> &BasisSet {
        self.basis
    }

    pub fn project(&self, v: &[f64]) -> Result<ProjectionResult> {
        self.project_warm(v, &[])
    }

    /// Starts from the given columns (typically a previous solution's support).
    /// The answer does not depend on the warm start beyond `tol`.
    pub fn project_warm(&self, v: &[f64], warm: &[usize]) -> Result<ProjectionResult> {
        let sol = self.solve(v, warm)?;
        let mut weights = vec![0.0; self.basis.num_columns()];
        for (&c, &l) in sol.corral.iter().zip(&sol.lambda) {
            weights[c] = l;
        }
        let projected_point: Vec<f64> = sol.x.iter().zip(v).map(|(x, v)| x + v).collect();
        Ok(ProjectionResult {
            distance: norm(&sol.x),
            weights,
            projected_point,
            kkt_residual: sol.gap,
            iterations: sol.iterations,
        })
    }

    /// Distance only; identical to `project(v).distance`.
    pub fn distance(&self, v: &[f64]) -> Result<f64> {
        self.solve(v, &[]).map(|s| norm(&s.x))
    }

    pub fn distance_warm(&self, v: &[f64], warm: &[usize]) -> Result<f64> {
        self.solve(v, warm).map(|s| norm(&s.x))
    }

    fn solve(&self, v: &[f64], warm: &[usize]) -> Result<Solution> {
        let basis = self.basis;
        let j = basis.dim();
        if v.len() != j {
            return Err(Error::Dimension(format!(
                "vector has {} coordinates, basis has {j}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(crate::error::argument("projection input must be finite"));
        }
        let ncol = basis.num_columns();
        let point = |c: usize| -> Vec<f64> {
            basis.column(c).iter().zip(v).map(|(u, v)| u - v).collect()
        };

        let mut corral: Vec<usize> = Vec::new();
        for &c in warm {
            if c < ncol && !corral.contains(&c) && corral.len() <= j {
                corral.push(c);
            }
        }
        let mut lambda: Vec<f64> = Vec::new();
        let mut x: Vec<f64> = Vec::new();
        if !corral.is_empty() {
            lambda = vec![1.0 / corral.len() as f64; corral.len()];
            x = combine(&corral, &lambda, &point, j);
            // Warm corrals may be degenerate for the new v; reduce them first.
            if !minor_cycle(&mut corral, &mut lambda, &mut x, &point, j) {
                corral.clear();
            }
        }
        if corral.is_empty() {
            // nearest column
            let mut best = (f64::INFINITY, 0);
            for c in 0..ncol {
                let d = basis
                    .column(c)
                    .iter()
                    .zip(v)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>();
                if d < best.0 {
                    best = (d, c);
                }
            }
            corral.push(best.1);
            lambda = vec![1.0];
            x = point(best.1);
        }

        let mut iterations = 0;
        let mut dots = vec![0.0; ncol];
        loop {
            let xv: f64 = dot(&x, v);
            let xx = dot(&x, &x);
            let mut best = (f64::INFINITY, 0);
            for (c, slot) in dots.iter_mut().enumerate() {
                let d = dot(basis.column(c), &x) - xv;
                *slot = d;
                if d < best.0 {
                    best = (d, c);
                }
            }
            let gap = (xx - best.0).max(0.0);
            if gap <= self.tol || xx == 0.0 {
                return Ok(Solution {
                    corral,
                    lambda,
                    x,
                    gap,
                    iterations,
                });
            }
            if iterations >= self.max_iter {
                return Err(Error::NonConvergence {
                    iterations,
                    best_distance: xx.sqrt(),
                    residual: gap,
                });
            }
            let entering = best.1;
            if corral.contains(&entering) || corral.len() > j {
                // Rounding floor: the corral already holds the most violating
                // column, so no further descent is representable.
                return Ok(Solution {
                    corral,
                    lambda,
                    x,
                    gap,
                    iterations,
                });
            }
            iterations += 1;
            corral.push(entering);
            lambda.push(0.0);
            if !minor_cycle(&mut corral, &mut lambda, &mut x, &point, j) {
                // The entering column is affinely dependent on the corral at
                // working precision.
                let last = corral.len() - 1;
                corral.remove(last);
                lambda.remove(last);
                x = combine(&corral, &lambda, &point, j);
                let gap = (dot(&x, &x) - dots.iter().cloned().fold(f64::INFINITY, f64::min))
                    .max(0.0);
                return Ok(Solution {
                    corral,
                    lambda,
                    x,
                    gap,
                    iterations,
                });
            }
        }
    }
}

/// Runs Wolfe's minor cycle until `x` is the affine minimizer of the corral
/// with strictly positive weights. Returns false if the corral is affinely
/// dependent.
fn minor_cycle<F>(
    corral: &mut Vec<usize>,
    lambda: &mut Vec<f64>,
    x: &mut Vec<f64>,
    point: &F,
    j: usize,
) -> bool
where
    F: Fn(usize) -> Vec<f64>,
{
    loop {
        let pts: Vec<Vec<f64>> = corral.iter().map(|&c| point(c)).collect();
        let alpha = match affine_minimizer(&pts) {
            Some(a) => a,
            None => return false,
        };
        if alpha.iter().all(|&a| a > 0.0) {
            *lambda = alpha;
            *x = combine(corral, lambda, point, j);
            return true;
        }
        // Step from lambda toward alpha until the first weight reaches zero.
        let mut theta = 1.0;
        let mut leaving = 0;
        for (i, (&l, &a)) in lambda.iter().zip(&alpha).enumerate() {
            if a <= 0.0 {
                let t = if l - a > 0.0 { l / (l - a) } else { 0.0 };
                if t < theta {
                    theta = t;
                    leaving = i;
                }
            }
        }
        for (l, a) in lambda.iter_mut().zip(&alpha) {
            *l += theta * (a - *l);
        }
        lambda[leaving] = 0.0;
        let mut i = 0;
        while i < corral.len() {
            if lambda[i] <= 0.0 {
                corral.remove(i);
                lambda.remove(i);
            } else {
                i += 1;
            }
        }
        let s: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= s);
        *x = combine(corral, lambda, point, j);
        if corral.len() == 1 {
            lambda[0] = 1.0;
            *x = point(corral[0]);
            return true;
        }
    }
}

/// Barycentric weights of the minimum-norm point of the affine hull of `pts`.
///
/// Solves `min_β ‖p₀ + D β‖` with `D = [p₁ − p₀, …]` by Householder QR.
/// Returns `None` if `D` is numerically rank deficient.
fn affine_minimizer(pts: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = pts.len();
    if k == 1 {
        return Some(vec![1.0]);
    }
    let rows = pts[0].len();
    let cols = k - 1;
    if cols > rows {
        return None;
    }
    // column-major D and right-hand side b = −p₀
    let mut d: Vec<f64> = pts[1..]
        .iter()
        .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| a - b))
        .collect();
    let mut b: Vec<f64> = pts[0].iter().map(|x| -x).collect();
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut diag = vec![0.0; cols];
    for c in 0..cols {
        let col = &mut d[c * rows..(c + 1) * rows];
        let sub_norm = norm(&col[c..]);
        if sub_norm <= 1e-14 * scale {
            return None;
        }
        let alpha = if col[c] > 0.0 { -sub_norm } else { sub_norm };
        // v = x − alpha e₁, stored in place
        col[c] -= alpha;
        let vnorm2: f64 = col[c..].iter().map(|x| x * x).sum();
        diag[c] = alpha;
        let hv: Vec<f64> = col[c..].to_vec();
        for c2 in c + 1..cols {
            let other = &mut d[c2 * rows + c..(c2 + 1) * rows];
            let f = 2.0 * dot(&hv, other) / vnorm2;
            for (o, h) in other.iter_mut().zip(&hv) {
                *o -= f * h;
            }
        }
        let f = 2.0 * dot(&hv, &b[c..]) / vnorm2;
        for (o, h) in b[c..].iter_mut().zip(&hv) {
            *o -= f * h;
        }
    }
    // back substitution R β = (Qᵀ b)[..cols]
    let mut beta = vec![0.0; cols];
    for c in (0..cols).rev() {
        let mut s = b[c];
        for c2 in c + 1..cols {
            s -= d[c2 * rows + c] * beta[c2];
        }
        beta[c] = s / diag[c];
    }
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta);
    Some(alpha)
}

fn combine<F>(corral: &[usize], lambda: &[f64], point: &F, j: usize) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64>,
{
    let mut x = vec![0.0; j];
    for (&c, &l) in corral.iter().zip(lambda) {
        for (xi, pi) in x.iter_mut().zip(point(c)) {
            *xi += l * pi;
        }
    }
    x
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Projects `v` onto the hull of `basis` with KKT tolerance `tol`.
pub fn project(v: &[f64], basis: &BasisSet, tol: f64) -> Result<ProjectionResult> {
    Projector::new(basis).with_tol(tol).project(v)
}

/// `d_J(Ũ, v)` without extracting weights.
pub fn distance_only(v: &[f64], basis: &BasisSet, tol: f64) -> Result<f64> {
    Projector::new(basis).with_tol(tol).distance(v)
}
