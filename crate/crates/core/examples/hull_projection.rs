//! Projects an empirical coefficient vector onto the hull and reads off the
//! fitted mixing distribution of true effects.
//!
//! cargo run --release --example hull_projection

use tcurve::hermite::HermiteContext;
use tcurve::preprocess::PreprocessSpec;
use tcurve::projection::Projector;
use tcurve::simlab::{simulate_sample, DgpSpec, Effect, MixtureComponent, Selection};
use tcurve::spectral::{compute_theta, BasisSet};

fn main() -> tcurve::Result<()> {
    let ctx = HermiteContext::standard(30)?;
    let basis = BasisSet::build(&ctx, 6.5, 3000)?;
    let projector = Projector::new(&basis);
    let identity = PreprocessSpec::identity();

    let effects = Effect::NormalMixture(vec![
        MixtureComponent { weight: 0.6, mean: 0.0, variance: 0.0 },
        MixtureComponent { weight: 0.4, mean: 2.5, variance: 0.0 },
    ]);
    for (label, selection) in [
        ("full reporting", Selection::None),
        ("maximization p-hacking", Selection::MaximizationPhack { rho: 0.0 }),
    ] {
        let dgp = DgpSpec {
            effect: effects.clone(),
            selection,
            ..DgpSpec::baseline(50_000)
        };
        let sample = simulate_sample(&dgp, 3)?.transform(&identity);
        let theta = compute_theta(&sample, &ctx)?;
        let fit = projector.project(&theta.coeffs)?;
        println!("{label}: distance {:.5} after {} iterations", fit.distance, fit.iterations);
        for c in fit.support() {
            let at = basis.grid().get(c).map_or("inf".into(), |h| format!("{h:+.3}"));
            println!("  h = {at:>7}  weight {:.3}", fit.weights[c]);
        }
    }
    Ok(())
}
