//! Lower and upper bounds for the embedding constant of μ = 2x dx and a
//! verdict for a measure with too much mass near 1.

use muntz_embed::embedding::{embed_estimate, EstimateOptions, KappaMajorant};
use muntz_embed::measure::{DensityExpr, DensityPiece};
use muntz_embed::{ExponentSequence, Measure};

fn main() -> muntz_embed::Result<()> {
    let seq = ExponentSequence::geometric(1.0, 2.0);
    let mu = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![0.0, 2.0]))?;
    let opts = EstimateOptions {
        kappa: Some(KappaMajorant::lacunary(0.25, &seq, 40)?),
        ..Default::default()
    };
    let r = embed_estimate(&mu, &seq, &opts)?;
    println!("‖ι_μ‖ ≥ {:.6}", r.lower_bound.value);
    if let Some(u) = r.upper_bound.and_then(|u| u.value) {
        println!("∫κ dμ = {u:.4} (upper bound, with an assumed d₁ = 1/4)");
    }
    println!("verdict: {:?} ({})", r.verdict.kind, r.verdict.reason);

    let heavy = Measure::zero().with_piece(DensityPiece::new(
        0.0,
        1.0,
        DensityExpr::PowLaw { c: 0.5, alpha: -0.5 },
        true,
    )?)?;
    let opts = EstimateOptions {
        n_check: 30,
        ..Default::default()
    };
    let r = embed_estimate(&heavy, &ExponentSequence::geometric(2.0, 2.0), &opts)?;
    println!("(1-x)^(-1/2)/2: verdict {:?}, sup λμ(J_1/λ) = {:.1}", r.verdict.kind, r.necessary.sup_ratio);
    Ok(())
}
