//! Maximization p-hacking is invisible when true effects are dispersed
//! enough and visible when many effects are exactly zero.
//!
//! cargo run --release --example detectability

use tcurve::hermite::HermiteContext;
use tcurve::inference::{BootstrapConfig, ProjectionTest};
use tcurve::preprocess::PreprocessSpec;
use tcurve::simlab::{simulate_sample, DgpSpec, Effect, Selection};
use tcurve::spectral::BasisSet;

fn main() -> tcurve::Result<()> {
    let ctx = HermiteContext::standard(30)?;
    let basis = BasisSet::build(&ctx, 6.5, 3000)?;
    // raw scores: symmetrizing would fold max(T1, T2) back toward a normal
    let test = ProjectionTest::new(PreprocessSpec::identity(), &ctx, &basis)?;
    let cfg = BootstrapConfig {
        reps: 300,
        ..BootstrapConfig::default()
    };
    let selection = Selection::MaximizationPhack { rho: 0.5 };
    for (label, effect) in [
        ("effects ~ N(0, 1.5)", Effect::normal(0.0, 1.5)),
        ("effects all zero", Effect::PointMass(0.0)),
    ] {
        for n in [5_000, 50_000] {
            let dgp = DgpSpec {
                effect: effect.clone(),
                selection,
                ..DgpSpec::baseline(n)
            };
            let r = test.run(&simulate_sample(&dgp, 7)?, &cfg)?;
            println!(
                "{label:<20} n = {n:>6}: statistic {:.5}, cv {:.5}, reject {}",
                r.statistic, r.critical_value, r.reject
            );
        }
    }
    Ok(())
}
