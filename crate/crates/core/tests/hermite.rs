mod common;

use common::{adaptive_simpson, composite_simpson, hermite_explicit, phi};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcurve::hermite::{y_norm_gaussian_diff, HermiteContext};
use tcurve::quadrature::default_rule;

const BOUND: f64 = 0.398_942_280_401_432_7 + 1e-12;

/// `a·b/φ_var(x)` in logs, since φ_var underflows in the far tail.
fn quotient(a: f64, b: f64, x: f64, var: f64) -> f64 {
    let log_phi = -0.5 * x * x / var - 0.5 * (2.0 * std::f64::consts::PI * var).ln();
    (a * b).signum() * (a.abs().ln() + b.abs().ln() - log_phi).exp()
}

#[test]
fn psi_and_chi_are_orthonormal() {
    let ctx = HermiteContext::standard(30).unwrap();
    let s = ctx.sigma_y2();
    let mut worst: f64 = 0.0;
    for j in 0..=30 {
        for k in 0..=j {
            let target = if j == k { 1.0 } else { 0.0 };
            // ψ_j φ_s · ψ_k φ_s / φ_s = ψ_j ψ_k φ_s
            let psi = default_rule().integrate(|t| {
                quotient(ctx.eval_psi_weighted(j, t).unwrap(), ctx.eval_psi_weighted(k, t).unwrap(), t, s)
            });
            let chi = default_rule().integrate(|h| {
                quotient(ctx.eval_chi_weighted(j, h).unwrap(), ctx.eval_chi_weighted(k, h).unwrap(), h, s + 1.0)
            });
            assert!(psi.is_finite() && chi.is_finite());
            worst = worst.max((psi - target).abs()).max((chi - target).abs());
        }
    }
    assert!(worst < 1e-8, "worst deviation {worst:e}");
}

#[test]
fn recurrence_matches_explicit_polynomials() {
    let ctx = HermiteContext::standard(25).unwrap();
    for j in 0..=25u32 {
        for &t in &[-4.0, -1.3, 0.0, 0.7, 2.5, 5.0] {
            let want = hermite_explicit(j, t) * phi(t, 1.0);
            let got = ctx.eval_psi_weighted(j as usize, t).unwrap();
            assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "j={j} t={t}");
        }
    }
}

#[test]
fn weighted_functions_are_bounded_on_dense_grid() {
    let ctx = HermiteContext::standard(60).unwrap();
    let mut psi = vec![0.0; 61];
    let mut chi = vec![0.0; 61];
    for i in 0..=8000 {
        let t = -40.0 + i as f64 * 0.01;
        ctx.psi_weighted_into(t, &mut psi);
        ctx.chi_weighted_into(t, &mut chi);
        for (p, c) in psi.iter().zip(&chi) {
            assert!(p.is_finite() && c.is_finite());
            assert!(p.abs() <= BOUND && c.abs() <= BOUND, "t={t}");
        }
    }
}

proptest! {
    #[test]
    fn psi_bound_random(j in 0usize..=60, t in -40.0f64..40.0) {
        let ctx = HermiteContext::standard(60).unwrap();
        prop_assert!(ctx.eval_psi_weighted(j, t).unwrap().abs() <= BOUND);
    }
}

/// The series Σ θ_j ψ_j, with θ_j = η_j E_π[χ_j(h) φ_2(h)] for π = N(0, 1),
/// recovers the convolution φ_2.
#[test]
fn svd_reconstructs_gaussian_convolution() {
    let ctx = HermiteContext::standard(40).unwrap();
    let theta: Vec<f64> = (0..40)
        .map(|j| {
            ctx.eta(j)
                * default_rule().integrate(|h| ctx.eval_chi_weighted(j, h).unwrap() * phi(h, 1.0))
        })
        .collect();
    let mut psi = vec![0.0; 40];
    let mut worst: f64 = 0.0;
    for i in 0..=1200 {
        let t = -6.0 + i as f64 * 0.01;
        ctx.psi_weighted_into(t, &mut psi);
        let series: f64 = theta.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>() / phi(t, 1.0);
        worst = worst.max((series - phi(t, 2.0)).abs());
    }
    assert!(worst < 1e-6, "max reconstruction error {worst:e}");
}

#[test]
fn y_norm_closed_form_matches_adaptive_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let mu1: f64 = rng.random_range(-8.0..8.0);
        let mu2: f64 = if rng.random_bool(0.3) {
            mu1 + rng.random_range(0.001..0.01)
        } else {
            rng.random_range(-8.0..8.0)
        };
        let f = |t: f64| {
            let d = phi(t - mu1, 1.0) - phi(t - mu2, 1.0);
            d * d * phi(t, 1.0)
        };
        let scale = composite_simpson(&f, -30.0, 30.0, 6000);
        let want = adaptive_simpson(&f, -30.0, 30.0, 1e-12 * scale).sqrt();
        let got = y_norm_gaussian_diff(mu1, mu2, 1.0);
        assert!(
            (got - want).abs() <= 1e-10 * want,
            "mu1={mu1} mu2={mu2}: {got:e} vs {want:e}"
        );
    }
}
