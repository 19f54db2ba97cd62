//! Discretization error of the hull for a few grid choices, and a look at
//! the basis vectors themselves.
//!
//! cargo run --release --example basis_certificate

use tcurve::hermite::HermiteContext;
use tcurve::spectral::{grid_epsilon, BasisSet};

fn main() -> tcurve::Result<()> {
    println!("    L      M   epsilon");
    for (l, m) in [(4.0, 1000), (6.5, 1000), (6.5, 3000), (6.5, 10000), (8.0, 3000)] {
        let delta = 2.0 * l / (m - 1) as f64;
        println!("{l:>5} {m:>6}   {:.6}", grid_epsilon(l, delta, 1.0));
    }

    let ctx = HermiteContext::standard(30)?;
    let basis = BasisSet::build(&ctx, 6.5, 3000)?;
    println!(
        "\n{} columns of length {}, spacing {:.5}",
        basis.num_columns(),
        basis.dim(),
        basis.delta()
    );
    for x in [0.0, 2.0, 6.5] {
        let c = basis
            .grid()
            .iter()
            .position(|g| (g - x).abs() < 0.5 * basis.delta())
            .unwrap();
        let head: Vec<String> = basis.column(c)[..5].iter().map(|v| format!("{v:+.4}")).collect();
        println!("u(h = {x:.1}) starts {}", head.join(" "));
    }
    Ok(())
}
