//! Runs the projection test on a CSV of t-scores, or on a simulated
//! literature with publication bias when no path is given.
//!
//! cargo run --release --example projection_test -- [scores.csv]

use tcurve::hermite::HermiteContext;
use tcurve::inference::{format_bsd, format_p_value, BootstrapConfig, ProjectionTest};
use tcurve::preprocess::{load_csv, PreprocessSpec};
use tcurve::simlab::{simulate_sample, DgpSpec, Selection};
use tcurve::spectral::{BasisSet, DEFAULT_J, DEFAULT_L, DEFAULT_M};

fn main() -> tcurve::Result<()> {
    let sample = match std::env::args().nth(1) {
        Some(path) => load_csv(path)?,
        None => {
            let dgp = DgpSpec {
                selection: Selection::PublicationBias { q: 0.3 },
                ..DgpSpec::baseline(5000)
            };
            simulate_sample(&dgp, 42)?
        }
    };
    println!("{} scores from {} articles", sample.n(), sample.m());

    let ctx = HermiteContext::standard(DEFAULT_J)?;
    let basis = BasisSet::build(&ctx, DEFAULT_L, DEFAULT_M)?;
    let test = ProjectionTest::new(PreprocessSpec::default(), &ctx, &basis)?;
    let cfg = BootstrapConfig::default();
    let report = test.run(&sample, &cfg)?;

    println!("statistic      {:.5}", report.statistic);
    println!("critical value {:.5} (epsilon {:.5})", report.critical_value, report.epsilon);
    println!("p-value        {}", format_p_value(report.p_value, cfg.reps));
    match report.bsd {
        Some(bsd) => println!(
            "reject; breakdown {:.4}, size distortion {}",
            report.breakdown.unwrap(),
            format_bsd(bsd)
        ),
        None => println!("no evidence of selective reporting"),
    }
    Ok(())
}
