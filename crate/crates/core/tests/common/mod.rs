//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    // split into panels so narrow peaks are not missed by the first estimate
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 30)
        })
        .sum()
}

/// Fixed composite Simpson with `panels` panels.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            h / 6.0 * (f(lo) + 4.0 * f(lo + 0.5 * h) + f(lo + h))
        })
        .sum()
}

pub fn phi(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// He_j(x)/√j! from the explicit coefficient formula.
pub fn hermite_explicit(j: u32, x: f64) -> f64 {
    let lf = |n: u32| (1..=n).map(|k| (k as f64).ln()).sum::<f64>();
    let mut s = 0.0;
    for l in 0..=j / 2 {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let log_c = lf(2 * l) - l as f64 * 2f64.ln() - lf(l) + lf(j) - lf(2 * l) - lf(j - 2 * l);
        s += sign * log_c.exp() * x.powi((j - 2 * l) as i32);
    }
    s / lf(j).exp().sqrt()
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &k| a[i][c].abs().total_cmp(&a[k][c].abs()))?;
        if a[p][c].abs() < 1e-13 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Exhaustive nearest-point search over every face of the hull spanned by at
/// most `dim + 1` columns (Carathéodory). Each face is solved through its
/// KKT system `[G 1; 1ᵀ 0]`; faces whose minimizer leaves the simplex are
/// skipped, since the true nearest point lies in the relative interior of
/// some face.
pub fn brute_force_distance(cols: &[Vec<f64>], v: &[f64]) -> f64 {
    let dim = v.len();
    let p: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| c.iter().zip(v).map(|(a, b)| a - b).collect())
        .collect();
    let mut best = f64::INFINITY;
    let n = p.len();
    let mut subset = Vec::new();
    fn recurse(
        start: usize,
        n: usize,
        max: usize,
        subset: &mut Vec<usize>,
        p: &[Vec<f64>],
        best: &mut f64,
    ) {
        if !subset.is_empty() {
            let k = subset.len();
            let mut a = vec![vec![0.0; k + 1]; k + 1];
            for i in 0..k {
                for j in 0..k {
                    a[i][j] = p[subset[i]].iter().zip(&p[subset[j]]).map(|(x, y)| x * y).sum();
                }
                a[i][k] = 1.0;
                a[k][i] = 1.0;
            }
            let mut rhs = vec![0.0; k + 1];
            rhs[k] = 1.0;
            if let Some(sol) = solve(a, rhs) {
                if sol[..k].iter().all(|&w| w >= -1e-12) {
                    let dim = p[0].len();
                    let mut x = vec![0.0; dim];
                    for (i, &c) in subset.iter().enumerate() {
                        for d in 0..dim {
                            x[d] += sol[i] * p[c][d];
                        }
                    }
                    let d = x.iter().map(|z| z * z).sum::<f64>().sqrt();
                    if d < *best {
                        *best = d;
                    }
                }
            }
        }
        if subset.len() == max {
            return;
        }
        for i in start..n {
            subset.push(i);
            recurse(i + 1, n, max, subset, p, best);
            subset.pop();
        }
    }
    recurse(0, n, dim + 1, &mut subset, &p, &mut best);
    best
}
