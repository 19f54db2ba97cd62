//! Command-line front end: `test`, `simulate`, `power-curve`, `delta`,
//! `basis-info`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::edgeworth::{bsd_audit_ratio, delta_student_t, BSD_CONSTANT};
use crate::error::{argument, Error, Result};
use crate::hermite::HermiteContext;
use crate::inference::{BootstrapConfig, ProjectionTest, TestReport};
use crate::preprocess::{load_csv, load_csv_filtered, PreprocessSpec};
use crate::simlab::{
    power_curve, simulate_sample, write_power_csv, DgpSpec, Effect, Noise, PowerCurveConfig,
    Selection, SeverityFamily,
};
use crate::spectral::{BasisSet, DEFAULT_J, DEFAULT_L, DEFAULT_M};

#[derive(Debug, Parser)]
#[command(name = "tcurve", version, about = "Projection test for selective reporting in t-curves")]
pub struct Cli {
    /// Worker threads for bootstrap and simulation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for cached basis sets.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the projection test on a CSV of t-scores.
    Test(TestCmd),
    /// Write a simulated meta-sample as CSV.
    Simulate(SimulateCmd),
    /// Rejection rates over a sweep of selection severities, as CSV.
    PowerCurve(PowerCurveCmd),
    /// Misspecification bound for Student-t noise.
    Delta(DeltaCmd),
    /// Describe the discretized hull basis.
    BasisInfo(BasisArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BasisArgs {
    /// Number of Hermite coefficients J.
    #[arg(long = "j", default_value_t = DEFAULT_J)]
    pub j: usize,
    /// Variance of the Y-norm weight.
    #[arg(long, default_value_t = 1.0)]
    pub sigma_y2: f64,
    /// Effect grid spans [-L, L].
    #[arg(long = "grid-half-width", default_value_t = DEFAULT_L)]
    pub l: f64,
    /// Number of effect grid points M.
    #[arg(long = "grid-points", default_value_t = DEFAULT_M)]
    pub m: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PreArgs {
    /// Subtracted from every score after symmetrizing.
    #[arg(long, default_value_t = 1.96)]
    pub shift: f64,
    /// Use the scores as given instead of randomizing their signs.
    #[arg(long)]
    pub no_symmetrize: bool,
}

impl PreArgs {
    fn spec(&self) -> PreprocessSpec {
        PreprocessSpec {
            symmetrize: !self.no_symmetrize,
            shift: self.shift,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BootArgs {
    /// Bootstrap replications.
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Misspecification allowance added to the critical value.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
}

impl BootArgs {
    fn config(&self) -> BootstrapConfig {
        BootstrapConfig {
            reps: self.reps,
            seed: self.seed,
            alpha: self.alpha,
            delta_misspec: self.delta,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestCmd {
    /// CSV with columns `t` and `article_id`.
    pub input: PathBuf,
    /// Keep only rows whose COLUMN equals VALUE.
    #[arg(long, num_args = 2, value_names = ["COLUMN", "VALUE"])]
    pub filter: Option<Vec<String>>,
    /// Warn when an article reports more than this many scores.
    #[arg(long)]
    pub article_cap: Option<usize>,
    /// Also write the report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    pub pre: PreArgs,
    #[command(flatten)]
    pub boot: BootArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Normal,
    StudentT,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionKind {
    None,
    PublicationBias,
    ThresholdPhack,
    MaximizationPhack,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    PublicationBias,
    ThresholdPhack,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DgpArgs {
    /// Reported scores per sample.
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    /// Mean of the normal effect distribution.
    #[arg(long, default_value_t = 2.0)]
    pub effect_mean: f64,
    /// Variance of the effect distribution; 0 gives a point mass.
    #[arg(long, default_value_t = 0.0)]
    pub effect_var: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::Normal)]
    pub noise: NoiseKind,
    /// Degrees of freedom for Student-t noise.
    #[arg(long, default_value_t = 50.0)]
    pub nu: f64,
    /// Correlation of the two scores a p-hacker draws.
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub scores_per_article: usize,
}

impl DgpArgs {
    fn spec(&self, selection: Selection) -> DgpSpec {
        DgpSpec {
            effect: if self.effect_var == 0.0 {
                Effect::PointMass(self.effect_mean)
            } else {
                Effect::normal(self.effect_mean, self.effect_var)
            },
            noise: match self.noise {
                NoiseKind::Normal => Noise::Normal,
                NoiseKind::StudentT => Noise::StudentT(self.nu),
            },
            selection,
            n_target: self.n,
            scores_per_article: self.scores_per_article,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[arg(long, value_enum, default_value_t = SelectionKind::None)]
    pub selection: SelectionKind,
    /// Omission probability of insignificant scores.
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    /// Probability that a researcher p-hacks.
    #[arg(long, default_value_t = 0.0)]
    pub prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination (stdout if absent); the configuration goes to
    /// `<output>.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl SimulateCmd {
    fn selection(&self) -> Selection {
        match self.selection {
            SelectionKind::None => Selection::None,
            SelectionKind::PublicationBias => Selection::PublicationBias { q: self.q },
            SelectionKind::ThresholdPhack => Selection::ThresholdPhack {
                prob: self.prob,
                rho: self.dgp.rho,
            },
            SelectionKind::MaximizationPhack => Selection::MaximizationPhack { rho: self.dgp.rho },
        }
    }
}

#[derive(Debug, Args)]
pub struct PowerCurveCmd {
    #[arg(long, value_enum, default_value_t = FamilyKind::PublicationBias)]
    pub family: FamilyKind,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    pub severities: Vec<f64>,
    /// Simulated samples per severity.
    #[arg(long, default_value_t = 500)]
    pub sims: usize,
    /// Bootstrap only the first simulation of each severity and reuse its
    /// critical value.
    #[arg(long)]
    pub reuse_cv: bool,
    /// CSV destination (stdout if absent); the configuration goes to
    /// `<output>.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub dgp: DgpArgs,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    pub pre: PreArgs,
    #[command(flatten)]
    pub boot: BootArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DeltaCmd {
    #[arg(long, default_value_t = 50.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_y2: f64,
    /// Largest location in the grid `0, step, …, h_max`.
    #[arg(long, default_value_t = 8.0)]
    pub h_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub h_step: f64,
}

/// `test` output: the report plus the inputs it does not already echo.
#[derive(Debug, Serialize)]
pub struct TestOutput<'a> {
    #[serde(flatten)]
    pub report: &'a TestReport,
    pub input: &'a Path,
    pub filter: Option<&'a [String]>,
    pub article_cap: Option<usize>,
    pub shift: f64,
    pub symmetrize: bool,
    pub bsd_constant: f64,
    pub bsd_audit_ratio: f64,
}

pub fn init_thread_pool(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(argument("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| argument(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command, writing its primary output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let cache = cli.cache_dir.as_deref();
    match &cli.command {
        Command::Test(cmd) => cmd_test(cmd, cache, out),
        Command::Simulate(cmd) => cmd_simulate(cmd, out),
        Command::PowerCurve(cmd) => cmd_power_curve(cmd, cache, out),
        Command::Delta(cmd) => cmd_delta(cmd, out),
        Command::BasisInfo(args) => cmd_basis_info(args, cache, out),
    }
}

fn load_basis(args: &BasisArgs, cache: Option<&Path>) -> Result<(HermiteContext, BasisSet)> {
    let ctx = HermiteContext::new(args.sigma_y2, args.j)?;
    let basis = match cache {
        Some(dir) => BasisSet::cached(dir, &ctx, args.l, args.m)?,
        None => BasisSet::build(&ctx, args.l, args.m)?,
    };
    Ok((ctx, basis))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out).map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn sidecar(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_test(cmd: &TestCmd, cache: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let sample = match cmd.filter.as_deref() {
        Some([column, value]) => load_csv_filtered(&cmd.input, column, value)?,
        Some(_) => return Err(argument("--filter takes COLUMN VALUE")),
        None => load_csv(&cmd.input)?,
    };
    if let Some(cap) = cmd.article_cap {
        let over = sample.articles_over_cap(cap);
        if !over.is_empty() {
            log::warn!("{} articles report more than {cap} scores: {:?}", over.len(), over);
        }
    }
    let (ctx, basis) = load_basis(&cmd.basis, cache)?;
    let pre = cmd.pre.spec();
    let report = ProjectionTest::new(pre, &ctx, &basis)?.run(&sample, &cmd.boot.config())?;
    let output = TestOutput {
        report: &report,
        input: &cmd.input,
        filter: cmd.filter.as_deref(),
        article_cap: cmd.article_cap,
        shift: pre.shift,
        symmetrize: pre.symmetrize,
        bsd_constant: BSD_CONSTANT,
        bsd_audit_ratio: bsd_audit_ratio(ctx.sigma_y2()),
    };
    if let Some(path) = &cmd.output {
        write_json(&output, &mut create(path)?)?;
    }
    write_json(&output, out)
}

#[derive(Serialize)]
struct SimulateEcho<'a> {
    dgp: &'a DgpSpec,
    seed: u64,
}

fn cmd_simulate(cmd: &SimulateCmd, out: &mut dyn Write) -> Result<()> {
    let dgp = cmd.dgp.spec(cmd.selection());
    let sample = simulate_sample(&dgp, cmd.seed)?;
    let echo = SimulateEcho {
        dgp: &dgp,
        seed: cmd.seed,
    };
    match &cmd.output {
        Some(path) => {
            sample.write_csv(create(path)?)?;
            write_json(&echo, &mut create(&sidecar(path))?)
        }
        None => {
            log::info!("{}", serde_json::to_string(&echo)?);
            sample.write_csv(out)
        }
    }
}

#[derive(Serialize)]
struct PowerCurveEcho<'a> {
    config: &'a PowerCurveConfig,
    basis: &'a BasisArgs,
    preprocess: PreprocessSpec,
    delta: f64,
}

fn cmd_power_curve(cmd: &PowerCurveCmd, cache: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let (ctx, basis) = load_basis(&cmd.basis, cache)?;
    let pre = cmd.pre.spec();
    let test = ProjectionTest::new(pre, &ctx, &basis)?;
    let family = match cmd.family {
        FamilyKind::PublicationBias => SeverityFamily::PublicationBias,
        FamilyKind::ThresholdPhack => SeverityFamily::ThresholdPhack { rho: cmd.dgp.rho },
    };
    let cfg = PowerCurveConfig {
        dgp: cmd.dgp.spec(Selection::None),
        family,
        severities: cmd.severities.clone(),
        sims: cmd.sims,
        seed: cmd.boot.seed,
        bootstrap: cmd.boot.config(),
        reuse_cv: cmd.reuse_cv,
    };
    let points = power_curve(&cfg, &test)?;
    let echo = PowerCurveEcho {
        config: &cfg,
        basis: &cmd.basis,
        preprocess: pre,
        delta: cmd.boot.delta,
    };
    match &cmd.output {
        Some(path) => {
            write_power_csv(&points, cmd.boot.delta, cmd.dgp.n, create(path)?)?;
            write_json(&echo, &mut create(&sidecar(path))?)
        }
        None => {
            log::info!("{}", serde_json::to_string(&echo)?);
            write_power_csv(&points, cmd.boot.delta, cmd.dgp.n, out)
        }
    }
}

#[derive(Serialize)]
struct DeltaOutput<'a> {
    delta: f64,
    #[serde(flatten)]
    config: &'a DeltaCmd,
}

fn cmd_delta(cmd: &DeltaCmd, out: &mut dyn Write) -> Result<()> {
    if !(cmd.h_step > 0.0 && cmd.h_max >= 0.0) {
        return Err(argument("h grid needs h_step > 0 and h_max >= 0"));
    }
    let steps = (cmd.h_max / cmd.h_step + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * cmd.h_step).collect();
    let delta = delta_student_t(cmd.nu, cmd.sigma_y2, &grid)?;
    write_json(&DeltaOutput { delta, config: cmd }, out)
}

#[derive(Serialize)]
struct BasisInfo {
    #[serde(rename = "J")]
    j: usize,
    sigma_y2: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "M")]
    m: usize,
    grid_spacing: f64,
    epsilon: f64,
    num_columns: usize,
    max_column_norm: f64,
    eta_last: f64,
}

fn cmd_basis_info(args: &BasisArgs, cache: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let (ctx, basis) = load_basis(args, cache)?;
    let max_column_norm = basis
        .columns()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let info = BasisInfo {
        j: ctx.j_max(),
        sigma_y2: ctx.sigma_y2(),
        l: basis.l(),
        m: basis.m(),
        grid_spacing: basis.delta(),
        epsilon: basis.epsilon(),
        num_columns: basis.num_columns(),
        max_column_norm,
        eta_last: ctx.eta(ctx.j_max() - 1),
    };
    write_json(&info, out)
}
