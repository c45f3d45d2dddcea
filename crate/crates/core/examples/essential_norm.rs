//! Essential norm of the embedding for μ = x dx as the limit of the norms
//! of its restrictions to [1 - 1/m, 1].

use muntz_embed::embedding::essential_norm_estimate;
use muntz_embed::measure::DensityExpr;
use muntz_embed::{ExponentSequence, Measure};

fn main() -> muntz_embed::Result<()> {
    let mu = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![0.0, 1.0]))?;
    let seq = ExponentSequence::geometric(1.0, 2.0);
    let e = essential_norm_estimate(&mu, &seq, 10, &[2, 4, 8, 16, 32], 16, 1)?;
    println!("{:>4} {:>12} {:>12}", "m", "norm", "monomial");
    for row in &e.table {
        println!("{:>4} {:>12.8} {:>12.8}", row.m, row.value, row.monomial);
    }
    println!("estimate: {:.6}", e.estimate);
    Ok(())
}
