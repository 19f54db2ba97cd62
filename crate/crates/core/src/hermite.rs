//! Scaled Hermite singular functions of the Gaussian convolution operator.
//!
//! The convolution `t -> ∫ φ(t - h) π(h) dh` has singular value decomposition
//! with right singular functions `χ_j(h) = He_j(h / √(1 + σ²)) / √j!`, left
//! singular functions `ψ_j(t) = He_j(t / σ) / √j!` and singular values
//! `η_j = (σ² / (1 + σ²))^{j/2}`, where `σ² = σ_Y²` is the variance of the
//! Gaussian weight that defines the Y-norm
//! `‖g‖_Y = (∫ g(t)² φ_{σ²}(t) dt)^{1/2}`.
//!
//! Everything here returns the *weighted* functions `ψ_j φ_{σ²}` and
//! `χ_j φ_{1+σ²}`, which are uniformly bounded by `1/√(2π)` when `σ² = 1`.

use std::f64::consts::PI;

use crate::error::{argument, Result};

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;

/// Density of `N(0, var)` at `x`.
#[inline]
pub fn normal_pdf(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

#[inline]
fn log_normal_pdf(x: f64, var: f64) -> f64 {
    -0.5 * x * x / var - 0.5 * (2.0 * PI * var).ln()
}

/// Immutable evaluation context: weight variance `σ_Y²`, truncation level `J`
/// and the singular values `η_0 ..= η_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteContext {
    sigma_y2: f64,
    j_max: usize,
    eta: Vec<f64>,
}

impl HermiteContext {
    pub fn new(sigma_y2: f64, j_max: usize) -> Result<Self> {
        if !(sigma_y2 > 0.0 && sigma_y2.is_finite()) {
            return Err(argument(format!("sigma_y2 must be positive, got {sigma_y2}")));
        }
        if j_max < 1 {
            return Err(argument("J must be at least 1"));
        }
        let eta = (0..=j_max).map(|j| eta_of(sigma_y2, j)).collect();
        Ok(Self {
            sigma_y2,
            j_max,
            eta,
        })
    }

    /// `σ_Y² = 1`, the setting used throughout.
    pub fn standard(j_max: usize) -> Result<Self> {
        Self::new(1.0, j_max)
    }

    pub fn sigma_y2(&self) -> f64 {
        self.sigma_y2
    }

    /// Truncation level `J`.
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Singular value `η_j`. Defined for every `j`, not only `j ≤ J`.
    pub fn eta(&self, j: usize) -> f64 {
        self.eta
            .get(j)
            .copied()
            .unwrap_or_else(|| eta_of(self.sigma_y2, j))
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j > self.j_max {
            return Err(argument(format!(
                "Hermite index {j} out of range 0..={}",
                self.j_max
            )));
        }
        Ok(())
    }

    /// `ψ_j(t) φ_{σ_Y²}(t)`.
    pub fn eval_psi_weighted(&self, j: usize, t: f64) -> Result<f64> {
        self.check_index(j)?;
        let mut out = vec![0.0; j + 1];
        self.psi_weighted_into(t, &mut out);
        Ok(out[j])
    }

    /// `χ_j(h) φ_{σ_Y²+1}(h)`.
    pub fn eval_chi_weighted(&self, j: usize, h: f64) -> Result<f64> {
        self.check_index(j)?;
        let mut out = vec![0.0; j + 1];
        self.chi_weighted_into(h, &mut out);
        Ok(out[j])
    }

    /// Fills `out[j] = ψ_j(t) φ_{σ_Y²}(t)` for `j < out.len()`.
    ///
    /// `out` may be longer than `J + 1`; the recurrence has no upper limit.
    pub fn psi_weighted_into(&self, t: f64, out: &mut [f64]) {
        let x = t / self.sigma_y2.sqrt();
        weighted_hermite(x, log_normal_pdf(t, self.sigma_y2), out);
    }

    /// Fills `out[j] = χ_j(h) φ_{σ_Y²+1}(h)` for `j < out.len()`.
    pub fn chi_weighted_into(&self, h: f64, out: &mut [f64]) {
        let var = 1.0 + self.sigma_y2;
        weighted_hermite(h / var.sqrt(), log_normal_pdf(h, var), out);
    }
}

fn eta_of(sigma_y2: f64, j: usize) -> f64 {
    (sigma_y2 / (1.0 + sigma_y2)).powf(0.5 * j as f64)
}

/// Normalized probabilists' Hermite values `He_j(x)/√j!` times `exp(log_weight)`.
///
/// Runs `h̃_{j+1} = (x h̃_j − √j h̃_{j−1}) / √(j+1)` on the unweighted values,
/// keeping a running log-scale so nothing overflows, and applies the weight
/// last.
fn weighted_hermite(x: f64, log_weight: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = log_weight.exp();
    for j in 1..n {
        let k = (j - 1) as f64;
        let next = (x * cur - k.sqrt() * prev) / (k + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            prev *= RESCALE_BY;
            log_scale -= RESCALE_BY.ln();
        }
        out[j] = if cur == 0.0 {
            0.0
        } else {
            cur.signum() * (cur.abs().ln() + log_scale + log_weight).exp()
        };
    }
}

/// `∫ φ_s(t) φ(t − a) φ(t − b) dt = φ_2(a − b) φ_{s+1/2}((a + b)/2)`.
pub fn gaussian_triple_product(a: f64, b: f64, sigma_y2: f64) -> f64 {
    normal_pdf(a - b, 2.0) * normal_pdf(0.5 * (a + b), sigma_y2 + 0.5)
}

/// Y-norm distance between two unit-variance Gaussian densities,
/// `√∫ φ_{σ_Y²}(t) (φ(t − μ₁) − φ(t − μ₂))² dt`.
///
/// An infinite `mu2` drops the second density, giving `‖φ(· − μ₁)‖_Y`.
/// The expansion of the square is rearranged with `exp_m1` so that nearly
/// equal means do not cancel catastrophically.
pub fn y_norm_gaussian_diff(mu1: f64, mu2: f64, sigma_y2: f64) -> f64 {
    let v = sigma_y2 + 0.5;
    let c0 = normal_pdf(0.0, 2.0);
    if mu2.is_infinite() {
        if mu1.is_infinite() {
            return 0.0;
        }
        return (c0 * normal_pdf(mu1, v)).sqrt();
    }
    if mu1.is_infinite() {
        return (c0 * normal_pdf(mu2, v)).sqrt();
    }
    let d = mu1 - mu2;
    let m = 0.5 * (mu1 + mu2);
    // √A − √B with A = φ_v(μ₁), B = φ_v(μ₂).
    let sqrt_a = normal_pdf(mu1, v).sqrt();
    let root_diff = -sqrt_a * (-(mu2 * mu2 - mu1 * mu1) / (4.0 * v)).exp_m1();
    let c = normal_pdf(m, v);
    let a = d * d / 4.0;
    let b = d * d / (8.0 * v);
    let cross = -2.0 * c * (-b).exp() * (-(a - b)).exp_m1();
    (c0 * (root_diff * root_diff + cross)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Explicit He_j coefficients: Σ_l (−1)^l (2l)!/(2^l l!) C(j, 2l) x^{j−2l}.
    fn he_explicit(j: u32, x: f64) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let binom = |n: u32, k: u32| fact(n) / (fact(k) * fact(n - k));
        (0..=j / 2)
            .map(|l| {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                sign * fact(2 * l) / (2f64.powi(l as i32) * fact(l))
                    * binom(j, 2 * l)
                    * x.powi((j - 2 * l) as i32)
            })
            .sum()
    }

    #[test]
    fn psi_identity_cases() {
        let ctx = HermiteContext::standard(30).unwrap();
        assert_abs_diff_eq!(
            ctx.eval_psi_weighted(0, 0.0).unwrap(),
            0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
        assert_eq!(ctx.eval_psi_weighted(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_matches_explicit_polynomial() {
        let ctx = HermiteContext::standard(30).unwrap();
        let t = 2.3;
        let expected = he_explicit(5, t) * normal_pdf(t, 1.0) / 120f64.sqrt();
        assert_abs_diff_eq!(ctx.eval_psi_weighted(5, t).unwrap(), expected, epsilon = 1e-14);
        for j in 0..12 {
            for &t in &[-3.1, -0.4, 0.0, 1.7, 4.2] {
                let fact: f64 = (1..=j).map(|k| k as f64).product();
                let expected = he_explicit(j, t) * normal_pdf(t, 1.0) / fact.sqrt();
                assert_abs_diff_eq!(
                    ctx.eval_psi_weighted(j as usize, t).unwrap(),
                    expected,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn chi_identity_cases() {
        let ctx = HermiteContext::standard(30).unwrap();
        let phi2 = 1.0 / (4.0 * PI).sqrt();
        assert_abs_diff_eq!(ctx.eval_chi_weighted(0, 0.0).unwrap(), phi2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            ctx.eval_chi_weighted(2, 0.0).unwrap(),
            -phi2 / 2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(ctx.eval_chi_weighted(2, 0.0).unwrap(), -0.199_471, epsilon = 1e-6);
    }

    #[test]
    fn index_out_of_range_is_an_error() {
        let ctx = HermiteContext::standard(5).unwrap();
        assert!(ctx.eval_psi_weighted(6, 0.0).is_err());
        assert!(ctx.eval_chi_weighted(6, 0.0).is_err());
        assert!(HermiteContext::new(0.0, 5).is_err());
        assert!(HermiteContext::new(1.0, 0).is_err());
    }

    #[test]
    fn eta_values() {
        let ctx = HermiteContext::standard(30).unwrap();
        assert_eq!(ctx.eta(0), 1.0);
        assert_abs_diff_eq!(ctx.eta(2), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(ctx.eta(30), 2f64.powi(-15), epsilon = 1e-20);
        assert_abs_diff_eq!(ctx.eta(31), 2f64.powf(-15.5), epsilon = 1e-20);
        for j in 0..30 {
            assert!(ctx.eta(j + 1) < ctx.eta(j));
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let ctx = HermiteContext::standard(60).unwrap();
        let mut out = vec![0.0; 61];
        for &t in &[-40.0, -25.0, 12.5, 40.0] {
            ctx.psi_weighted_into(t, &mut out);
            assert!(out.iter().all(|v| v.is_finite()));
            ctx.chi_weighted_into(t, &mut out);
            assert!(out.iter().all(|v| v.is_finite()));
        }
        // Well past the point where φ(t) underflows the values are still resolved.
        let mut out = vec![0.0; 200];
        ctx.psi_weighted_into(30.0, &mut out);
        assert!(out[199].abs() > 0.0 && out[199].is_finite());
    }

    #[test]
    fn y_norm_identities() {
        assert_eq!(y_norm_gaussian_diff(0.7, 0.7, 1.0), 0.0);
        let far = y_norm_gaussian_diff(6.5, f64::INFINITY, 1.0);
        let expected = (normal_pdf(0.0, 2.0) * normal_pdf(6.5, 1.5)).sqrt();
        assert_abs_diff_eq!(far, expected, epsilon = 1e-18);
        assert_abs_diff_eq!(far, 0.000_265, epsilon = 1e-6);
    }

    #[test]
    fn y_norm_expansion_matches_naive_expansion() {
        // Away from cancellation the naive three-term expansion is accurate.
        for &(a, b) in &[(0.0, 1.0), (-2.0, 3.0), (1.5, 0.5), (4.0, -4.0)] {
            let naive = gaussian_triple_product(a, a, 1.0) - 2.0 * gaussian_triple_product(a, b, 1.0)
                + gaussian_triple_product(b, b, 1.0);
            let got = y_norm_gaussian_diff(a, b, 1.0);
            assert_abs_diff_eq!(got * got, naive, epsilon = 1e-15);
        }
    }
}
