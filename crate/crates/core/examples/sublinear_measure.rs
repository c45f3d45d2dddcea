//! Tail masses μ([1-ε, 1]) and the sublinear norm of a mixed measure.

use muntz_embed::measure::{default_eps_grid, DensityExpr};
use muntz_embed::Measure;

fn main() -> muntz_embed::Result<()> {
    let mu = Measure::from_density(0.0, 1.0, DensityExpr::Const(1.0))?
        .with_atom(0.9, 0.05)?
        .with_atom(0.99, 0.001)?;
    for eps in [0.5, 0.1, 0.01, 1e-4] {
        println!("μ(J_{eps}) = {:.6}", mu.tail_mass(eps)?);
    }
    let p = mu.sublinear_profile(&default_eps_grid())?;
    println!("‖μ‖_S ≥ {:.6} (exact: {}), vanishing: {}", p.sublinear_norm_estimate, p.exact, p.vanishing_flag);

    let sqrt_tail = Measure::from_density(0.0, 1.0, DensityExpr::XPow { c: 1.0, alpha: 0.5 })?;
    println!("∫ x^10 d(x^½ dx) = {:.10}", sqrt_tail.integrate(|x| x.powi(10), 1e-12)?);
    Ok(())
}
