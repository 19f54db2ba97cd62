//! Article-level bootstrap, critical values, p-values and the breakdown
//! statistic.
//!
//! The bootstrap recenters at the projected point `p = P_Ũ θ̂`: each
//! replication resamples whole articles from the raw sample, re-applies the
//! transform, forms `e* = θ̂* − θ̂` and records `d_J(Ũ, p + e*)`. The critical
//! value is the `1 − α` quantile of those draws plus the grid error `ε`
//! (plus `Δ` when testing under approximate normality).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edgeworth::BSD_CONSTANT;
use crate::error::{argument, Error, Result};
use crate::hermite::HermiteContext;
use crate::preprocess::{transform_scores, MetaSample, PreprocessSpec, Raw};
use crate::projection::{Projector, DEFAULT_TOL};
use crate::spectral::{BasisSet, ThetaVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Misspecification allowance `Δ` added to the critical value.
    pub delta_misspec: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            reps: 1000,
            seed: 0,
            alpha: 0.05,
            delta_misspec: 0.0,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(argument("reps must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(argument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.delta_misspec >= 0.0 && self.delta_misspec.is_finite()) {
            return Err(argument("delta must be finite and nonnegative"));
        }
        if self.reps < 100 {
            log::warn!("only {} bootstrap replications; critical values will be noisy", self.reps);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub epsilon: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub breakdown: Option<f64>,
    /// Breakdown size distortion in percent.
    pub bsd: Option<f64>,
    pub reject: bool,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub sigma_y2: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "M")]
    pub grid_m: usize,
    pub reps: usize,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
}

/// `⌈q·B⌉`-th order statistic (1-based) of the draws.
pub fn quantile(draws: &[f64], q: f64) -> Result<f64> {
    if draws.is_empty() {
        return Err(argument("quantile of an empty sequence"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(argument(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = (q * sorted.len() as f64).ceil() as usize;
    Ok(sorted[k.clamp(1, sorted.len()) - 1])
}

/// Critical value without the `Δ` add-on: `F⁻¹(1 − α) + ε`.
pub fn base_critical_value(draws: &[f64], alpha: f64, epsilon: f64) -> Result<f64> {
    Ok(quantile(draws, 1.0 - alpha)? + epsilon)
}

/// Add-one Monte Carlo p-value `(1 + #{d_b + ε + Δ ≥ stat}) / (B + 1)`.
pub fn p_value(draws: &[f64], statistic: f64, shift: f64) -> f64 {
    let exceed = draws.iter().filter(|&&d| d + shift >= statistic).count();
    (1 + exceed) as f64 / (draws.len() + 1) as f64
}

/// Article indices for replication `b`. Every replication owns an
/// independent ChaCha stream keyed by `(seed, b)`, so the draws do not depend
/// on scheduling.
pub fn resample_indices(m: usize, seed: u64, b: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b);
    (0..m).map(|_| rng.random_range(0..m)).collect()
}

/// The raw sample drawn in replication `b`.
pub fn resample_articles(sample: &MetaSample<Raw>, seed: u64, b: u64) -> MetaSample<Raw> {
    sample.select(&resample_indices(sample.m(), seed, b))
}

/// Per-article sums of `ψ_j φ_{σ_Y²}` over the transformed scores. θ̂ of any
/// resample is the count-weighted combination of these rows.
#[derive(Debug, Clone)]
struct ArticleMoments {
    j: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl ArticleMoments {
    fn new(sample: &MetaSample<Raw>, pre: &PreprocessSpec, ctx: &HermiteContext) -> Self {
        let j = ctx.j_max();
        let mut sums = vec![0.0; sample.m() * j];
        let mut counts = Vec::with_capacity(sample.m());
        let mut buf = vec![0.0; j];
        for (a, row) in sample.articles().iter().zip(sums.chunks_exact_mut(j)) {
            let scores = transform_scores(&a.scores, pre);
            for t in &scores {
                ctx.psi_weighted_into(*t, &mut buf);
                for (s, b) in row.iter_mut().zip(&buf) {
                    *s += b;
                }
            }
            counts.push(scores.len());
        }
        Self { j, sums, counts }
    }

    fn theta(&self, indices: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut acc = vec![0.0; self.j];
        let mut n = 0;
        for i in indices {
            for (a, s) in acc.iter_mut().zip(&self.sums[i * self.j..(i + 1) * self.j]) {
                *a += s;
            }
            n += self.counts[i];
        }
        acc.iter_mut().for_each(|a| *a /= n as f64);
        acc
    }
}

/// Everything fixed across one analysis: transform, Hermite context, basis.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionTest<'a> {
    pub pre: PreprocessSpec,
    pub ctx: &'a HermiteContext,
    pub basis: &'a BasisSet,
    pub tol: f64,
}

/// Point estimate: θ̂, its distance to the hull and the projected point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub theta: ThetaVector,
    pub statistic: f64,
    pub projected_point: Vec<f64>,
    pub support: Vec<usize>,
}

impl<'a> ProjectionTest<'a> {
    pub fn new(pre: PreprocessSpec, ctx: &'a HermiteContext, basis: &'a BasisSet) -> Result<Self> {
        basis.check_context(ctx)?;
        Ok(Self {
            pre,
            ctx,
            basis,
            tol: DEFAULT_TOL,
        })
    }

    fn projector(&self) -> Projector<'a> {
        Projector::new(self.basis).with_tol(self.tol)
    }

    fn moments(&self, sample: &MetaSample<Raw>) -> Result<ArticleMoments> {
        if sample.n() == 0 {
            return Err(Error::EmptySample);
        }
        Ok(ArticleMoments::new(sample, &self.pre, self.ctx))
    }

    /// `d_J(Ũ, θ̂)` of the transformed sample.
    pub fn statistic(&self, sample: &MetaSample<Raw>) -> Result<f64> {
        let mom = self.moments(sample)?;
        self.projector().distance(&mom.theta(0..sample.m()))
    }

    pub fn point_estimate(&self, sample: &MetaSample<Raw>) -> Result<PointEstimate> {
        let mom = self.moments(sample)?;
        self.point_from_moments(&mom, sample)
    }

    fn point_from_moments(&self, mom: &ArticleMoments, sample: &MetaSample<Raw>) -> Result<PointEstimate> {
        let coeffs = mom.theta(0..sample.m());
        let proj = self.projector().project(&coeffs)?;
        Ok(PointEstimate {
            theta: ThetaVector {
                coeffs,
                n_effective: mom.counts.iter().sum(),
            },
            statistic: proj.distance,
            support: proj.support(),
            projected_point: proj.projected_point,
        })
    }

    /// Bootstrap draws `d_J(Ũ, p + e*_b)` for `b = 0..reps`, along with the
    /// point estimate they were centered on.
    pub fn bootstrap(
        &self,
        sample: &MetaSample<Raw>,
        cfg: &BootstrapConfig,
    ) -> Result<(PointEstimate, Vec<f64>)> {
        cfg.validate()?;
        let mom = self.moments(sample)?;
        let point = self.point_from_moments(&mom, sample)?;
        let projector = self.projector();
        let m = sample.m();
        let draws = (0..cfg.reps as u64)
            .into_par_iter()
            .map(|b| {
                let idx = resample_indices(m, cfg.seed, b);
                let star = mom.theta(idx.into_iter());
                let shifted: Vec<f64> = point
                    .projected_point
                    .iter()
                    .zip(star.iter().zip(&point.theta.coeffs))
                    .map(|(p, (s, t))| p + (s - t))
                    .collect();
                projector.distance_warm(&shifted, &point.support)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok((point, draws))
    }

    pub fn run(&self, sample: &MetaSample<Raw>, cfg: &BootstrapConfig) -> Result<TestReport> {
        let (point, draws) = self.bootstrap(sample, cfg)?;
        Ok(self.report(sample, cfg, point.statistic, &draws))
    }

    /// Assembles a report from a statistic and bootstrap draws.
    pub fn report(
        &self,
        sample: &MetaSample<Raw>,
        cfg: &BootstrapConfig,
        statistic: f64,
        draws: &[f64],
    ) -> TestReport {
        let epsilon = self.basis.epsilon();
        // draws are nonempty: validated reps > 0
        let base_cv = base_critical_value(draws, cfg.alpha, epsilon).unwrap_or(f64::NAN);
        let critical_value = base_cv + cfg.delta_misspec;
        let reject = statistic > critical_value;
        let breakdown = reject.then(|| statistic - base_cv);
        TestReport {
            statistic,
            epsilon,
            critical_value,
            p_value: p_value(draws, statistic, epsilon + cfg.delta_misspec),
            breakdown,
            bsd: breakdown.map(bsd_percent),
            reject,
            n: sample.n(),
            m: sample.m(),
            j: self.ctx.j_max(),
            sigma_y2: self.ctx.sigma_y2(),
            l: self.basis.l(),
            grid_m: self.basis.m(),
            reps: cfg.reps,
            seed: cfg.seed,
            alpha: cfg.alpha,
            delta: cfg.delta_misspec,
        }
    }
}

/// `1.7506 × B̂`, in percent.
pub fn bsd_percent(breakdown: f64) -> f64 {
    100.0 * BSD_CONSTANT * breakdown
}

/// Two-decimal percent string, e.g. `0.53%`.
pub fn format_bsd(bsd_percent: f64) -> String {
    format!("{bsd_percent:.2}%")
}

/// Renders a p-value, showing `< 1/(B+1)` for the smallest attainable value.
pub fn format_p_value(p: f64, reps: usize) -> String {
    let floor = 1.0 / (reps + 1) as f64;
    if p <= floor {
        format!("< {floor:.4}")
    } else {
        format!("{p:.4}")
    }
}

/// Bootstrap draws for a raw sample.
pub fn bootstrap_distribution(
    sample: &MetaSample<Raw>,
    pre: &PreprocessSpec,
    ctx: &HermiteContext,
    basis: &BasisSet,
    cfg: &BootstrapConfig,
) -> Result<Vec<f64>> {
    ProjectionTest::new(*pre, ctx, basis)?
        .bootstrap(sample, cfg)
        .map(|(_, d)| d)
}

/// Full test on a raw sample.
pub fn run_test(
    sample: &MetaSample<Raw>,
    pre: &PreprocessSpec,
    ctx: &HermiteContext,
    basis: &BasisSet,
    cfg: &BootstrapConfig,
) -> Result<TestReport> {
    ProjectionTest::new(*pre, ctx, basis)?.run(sample, cfg)
}
