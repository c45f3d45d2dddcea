//! Weighted composition operators: boundedness, condition (α) and the
//! essential norm, plus the pullback measure they induce.

use muntz_embed::composition::{analyze_composition, pullback, FnExpr, MapSpec, PiecewiseFn};

fn main() -> muntz_embed::Result<()> {
    let one = PiecewiseFn::constant(1.0);
    let maps = [
        ("tent", PiecewiseFn::tent()),
        ("identity", PiecewiseFn::identity()),
        ("x/2", PiecewiseFn::single(FnExpr::Affine { c0: 0.0, c1: 0.5 })),
        ("4x(1-x)", PiecewiseFn::single(FnExpr::Poly(vec![0.0, 4.0, -4.0]))),
    ];
    for (name, f) in maps {
        let phi = MapSpec::new(f)?;
        let r = analyze_composition(&phi, &one)?;
        println!("{name}: {:?}, essential norm {:?}", r.boundedness, r.essential_norm);
        let mu = pullback(&phi, &one)?;
        println!("  pullback tail mass μ(J_0.01) = {:.6}", mu.tail_mass(0.01)?);
    }
    Ok(())
}
