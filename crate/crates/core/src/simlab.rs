//! Monte Carlo meta-samples under selective reporting, and power curves.
//!
//! A simulated researcher draws a true effect `h`, then one or two t-scores
//! `h + noise`, and a selection rule decides what gets reported:
//!
//! * publication bias: an insignificant score (`|t| < 1.96`) is dropped with
//!   probability `q`;
//! * threshold p-hacking: with probability `prob` the researcher draws a
//!   second score and reports `T₁` if significant, else `max(T₁, T₂)`;
//! * maximization p-hacking: always reports `max(T₁, T₂)`.
//!
//! The pair `(T₁, T₂)` shares `h` and has noise correlation `ρ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::inference::{base_critical_value, BootstrapConfig, ProjectionTest};
use crate::preprocess::{MetaSample, Raw};

/// Two-sided 5% cutoff used by every selection rule.
pub const SIGNIFICANCE_CUTOFF: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    PointMass(f64),
    NormalMixture(Vec<MixtureComponent>),
}

impl Effect {
    pub fn normal(mean: f64, variance: f64) -> Self {
        Effect::NormalMixture(vec![MixtureComponent {
            weight: 1.0,
            mean,
            variance,
        }])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Noise {
    Normal,
    StudentT(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    None,
    PublicationBias { q: f64 },
    ThresholdPhack { prob: f64, rho: f64 },
    MaximizationPhack { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub effect: Effect,
    pub noise: Noise,
    pub selection: Selection,
    pub n_target: usize,
    pub scores_per_article: usize,
}

impl DgpSpec {
    /// `h = 2` almost surely, normal noise, no selection, one score per article.
    pub fn baseline(n_target: usize) -> Self {
        Self {
            effect: Effect::PointMass(2.0),
            noise: Noise::Normal,
            selection: Selection::None,
            n_target,
            scores_per_article: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_target == 0 {
            return Err(argument("n_target must be positive"));
        }
        if self.scores_per_article == 0 {
            return Err(argument("scores_per_article must be positive"));
        }
        match &self.effect {
            Effect::PointMass(h) if !h.is_finite() => {
                return Err(argument("point mass must be finite"))
            }
            Effect::NormalMixture(comps) => {
                if comps.is_empty() {
                    return Err(argument("mixture has no components"));
                }
                if comps
                    .iter()
                    .any(|c| !(c.weight >= 0.0) || !(c.variance >= 0.0) || !c.mean.is_finite())
                {
                    return Err(argument(
                        "mixture weights and variances must be nonnegative, means finite",
                    ));
                }
                let total: f64 = comps.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(argument(format!("mixture weights sum to {total}, not 1")));
                }
            }
            _ => {}
        }
        if let Noise::StudentT(nu) = self.noise {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(argument("student-t degrees of freedom must be positive"));
            }
        }
        let unit = |x: f64, name: &str| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(argument(format!("{name} = {x} outside [0, 1]")))
            }
        };
        let corr = |rho: f64| {
            if rho > -1.0 && rho < 1.0 {
                Ok(())
            } else {
                Err(argument(format!("rho = {rho} outside (-1, 1)")))
            }
        };
        match self.selection {
            Selection::None => Ok(()),
            Selection::PublicationBias { q } => unit(q, "q"),
            Selection::ThresholdPhack { prob, rho } => unit(prob, "prob").and(corr(rho)),
            Selection::MaximizationPhack { rho } => corr(rho),
        }
    }
}

/// Mixes a master seed with indices into an independent 64-bit seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, indices: &[u64]) -> u64 {
    let mut z = master;
    for &i in indices {
        z = z
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(i.wrapping_mul(0xD6E8_FEB8_6659_FD93));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

struct Generator<'a> {
    dgp: &'a DgpSpec,
    rng: ChaCha8Rng,
    chi2: Option<ChiSquared<f64>>,
}

impl Generator<'_> {
    fn effect(&mut self) -> f64 {
        match &self.dgp.effect {
            Effect::PointMass(h) => *h,
            Effect::NormalMixture(comps) => {
                let u: f64 = self.rng.random();
                let mut acc = 0.0;
                let mut pick = comps[comps.len() - 1];
                for c in comps {
                    acc += c.weight;
                    if u < acc {
                        pick = *c;
                        break;
                    }
                }
                let z: f64 = self.rng.sample(StandardNormal);
                pick.mean + pick.variance.sqrt() * z
            }
        }
    }

    /// Scale that turns a standard normal into the noise distribution
    /// (`1` or `√(ν/χ²_ν)`).
    fn mixing(&mut self) -> f64 {
        match self.chi2 {
            None => 1.0,
            Some(chi2) => {
                let nu = match self.dgp.noise {
                    Noise::StudentT(nu) => nu,
                    Noise::Normal => unreachable!(),
                };
                (nu / chi2.sample(&mut self.rng)).sqrt()
            }
        }
    }

    fn single(&mut self, h: f64) -> f64 {
        let z: f64 = self.rng.sample(StandardNormal);
        h + z * self.mixing()
    }

    /// Pair sharing `h` whose underlying normals have correlation `ρ`.
    /// Under Student-t noise each score gets its own chi-square mixing
    /// variable, so marginals are exactly t(ν) and `ρ = 0` gives independent
    /// scores.
    fn pair(&mut self, h: f64, rho: f64) -> (f64, f64) {
        let z1: f64 = self.rng.sample(StandardNormal);
        let w: f64 = self.rng.sample(StandardNormal);
        let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * w;
        (h + self.mixing() * z1, h + self.mixing() * z2)
    }

    fn report(&mut self, h: f64) -> Option<f64> {
        match self.dgp.selection {
            Selection::None => Some(self.single(h)),
            Selection::PublicationBias { q } => {
                let t = self.single(h);
                let u: f64 = self.rng.random();
                (t.abs() >= SIGNIFICANCE_CUTOFF || u >= q).then_some(t)
            }
            Selection::ThresholdPhack { prob, rho } => {
                let u: f64 = self.rng.random();
                if u < prob {
                    let (t1, t2) = self.pair(h, rho);
                    Some(if t1.abs() > SIGNIFICANCE_CUTOFF { t1 } else { t1.max(t2) })
                } else {
                    Some(self.single(h))
                }
            }
            Selection::MaximizationPhack { rho } => {
                let (t1, t2) = self.pair(h, rho);
                Some(t1.max(t2))
            }
        }
    }
}

/// Draws a meta-sample with exactly `n_target` reported scores.
pub fn simulate_sample(dgp: &DgpSpec, seed: u64) -> Result<MetaSample<Raw>> {
    dgp.validate()?;
    let chi2 = match dgp.noise {
        Noise::StudentT(nu) => Some(ChiSquared::new(nu).map_err(|e| argument(e.to_string()))?),
        Noise::Normal => None,
    };
    let mut gen = Generator {
        dgp,
        rng: ChaCha8Rng::seed_from_u64(seed),
        chi2,
    };
    let mut groups = Vec::new();
    let mut n = 0;
    let mut article = 0usize;
    while n < dgp.n_target {
        let h = gen.effect();
        let mut scores = Vec::with_capacity(dgp.scores_per_article);
        for _ in 0..dgp.scores_per_article {
            if n == dgp.n_target {
                break;
            }
            if let Some(t) = gen.report(h) {
                scores.push(t);
                n += 1;
            }
        }
        if !scores.is_empty() {
            groups.push((article.to_string(), scores));
        }
        article += 1;
    }
    MetaSample::from_articles(groups)
}

/// Which selection parameter a power curve sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityFamily {
    /// Sweeps the omission probability `q`.
    PublicationBias,
    /// Sweeps the p-hacking probability at fixed `ρ`.
    ThresholdPhack { rho: f64 },
}

impl SeverityFamily {
    pub fn selection(&self, severity: f64) -> Selection {
        match *self {
            SeverityFamily::PublicationBias => Selection::PublicationBias { q: severity },
            SeverityFamily::ThresholdPhack { rho } => Selection::ThresholdPhack {
                prob: severity,
                rho,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveConfig {
    /// Effect, noise and sample size; its `selection` is replaced per severity.
    pub dgp: DgpSpec,
    pub family: SeverityFamily,
    pub severities: Vec<f64>,
    pub sims: usize,
    pub seed: u64,
    pub bootstrap: BootstrapConfig,
    /// Bootstrap only simulation 0 of each severity and reuse its critical
    /// value for the rest.
    pub reuse_cv: bool,
}

/// Per-simulation outcomes at one severity. Critical values exclude `Δ`, so
/// one run yields rejection rates for any `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub severity: f64,
    pub statistics: Vec<f64>,
    pub critical_values: Vec<f64>,
}

impl PowerPoint {
    pub fn rejections(&self, delta: f64) -> Vec<bool> {
        self.statistics
            .iter()
            .zip(&self.critical_values)
            .map(|(s, cv)| *s > cv + delta)
            .collect()
    }

    pub fn rejection_rate(&self, delta: f64) -> f64 {
        let r = self.rejections(delta);
        r.iter().filter(|&&x| x).count() as f64 / r.len() as f64
    }
}

/// Runs `sims` simulated tests at each severity.
pub fn power_curve(cfg: &PowerCurveConfig, test: &ProjectionTest<'_>) -> Result<Vec<PowerPoint>> {
    if cfg.sims == 0 {
        return Err(argument("sims must be positive"));
    }
    cfg.severities
        .iter()
        .enumerate()
        .map(|(k, &severity)| {
            let dgp = DgpSpec {
                selection: cfg.family.selection(severity),
                ..cfg.dgp.clone()
            };
            dgp.validate()?;
            let k = k as u64;
            let run_one = |s: u64| -> Result<(f64, Option<f64>)> {
                let sample = simulate_sample(&dgp, derive_seed(cfg.seed, &[k, s, 0]))?;
                if cfg.reuse_cv && s > 0 {
                    return Ok((test.statistic(&sample)?, None));
                }
                let boot = BootstrapConfig {
                    seed: derive_seed(cfg.seed, &[k, s, 1]),
                    ..cfg.bootstrap
                };
                let (point, draws) = test.bootstrap(&sample, &boot)?;
                let cv = base_critical_value(&draws, boot.alpha, test.basis.epsilon())?;
                Ok((point.statistic, Some(cv)))
            };
            let outcomes = (0..cfg.sims as u64)
                .into_par_iter()
                .map(run_one)
                .collect::<Result<Vec<_>>>()?;
            let shared = outcomes[0].1;
            let (statistics, critical_values) = outcomes
                .into_iter()
                .map(|(s, cv)| (s, cv.or(shared).unwrap_or(f64::NAN)))
                .unzip();
            Ok(PowerPoint {
                severity,
                statistics,
                critical_values,
            })
        })
        .collect()
}

/// Writes `severity,rejection_rate,sims,n` rows at allowance `delta`.
pub fn write_power_csv<W: std::io::Write>(
    points: &[PowerPoint],
    delta: f64,
    n: usize,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["severity", "rejection_rate", "sims", "n"])?;
    for p in points {
        w.write_record([
            format!("{}", p.severity),
            format!("{}", p.rejection_rate(delta)),
            p.statistics.len().to_string(),
            n.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::Csv(e.into()))?;
    Ok(())
}
