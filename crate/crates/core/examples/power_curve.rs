//! Power against threshold p-hacking, with and without a Student-t(50)
//! misspecification allowance, from one set of simulations.
//!
//! cargo run --release --example power_curve

use tcurve::edgeworth::{default_h_grid, delta_student_t};
use tcurve::hermite::HermiteContext;
use tcurve::inference::{BootstrapConfig, ProjectionTest};
use tcurve::preprocess::PreprocessSpec;
use tcurve::simlab::{power_curve, DgpSpec, PowerCurveConfig, SeverityFamily};
use tcurve::spectral::BasisSet;

fn main() -> tcurve::Result<()> {
    let ctx = HermiteContext::standard(30)?;
    let basis = BasisSet::build(&ctx, 6.5, 3000)?;
    let test = ProjectionTest::new(PreprocessSpec::default(), &ctx, &basis)?;
    let cfg = PowerCurveConfig {
        dgp: DgpSpec::baseline(5000),
        family: SeverityFamily::ThresholdPhack { rho: 0.0 },
        severities: vec![0.0, 0.1, 0.2, 0.3, 0.5, 1.0],
        sims: 100,
        seed: 1,
        bootstrap: BootstrapConfig::default(),
        reuse_cv: true,
    };
    let points = power_curve(&cfg, &test)?;
    let delta = delta_student_t(50.0, 1.0, &default_h_grid())?;

    println!("p-hack prob   power   power (+{delta:.4})");
    for p in &points {
        println!(
            "{:>11.2}   {:.3}   {:.3}",
            p.severity,
            p.rejection_rate(0.0),
            p.rejection_rate(delta)
        );
    }
    Ok(())
}
