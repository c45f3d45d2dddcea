//! The two discrete counterexample measures.

use muntz_embed::constructions::{build_example1, build_example2, verify_example1};

fn main() -> muntz_embed::Result<()> {
    let ex = build_example1(12)?;
    println!("c = Σcₖ = {:.6}; recursion violations: {}", ex.total_mass, verify_example1(&ex).len());
    println!("{:>3} {:>12} {:>12} {:>10} {:>10}", "n", "λₙ", "1-aₙ", "∫λₙx^λₙ", "∫λ'ₙx^λ'ₙ");
    for r in &ex.rows {
        println!(
            "{:>3} {:>12.4e} {:>12.4e} {:>10.5} {:>10.5}",
            r.n, r.lambda, r.delta, r.bounded_integral, r.growth_integral
        );
    }
    println!("growth slope C₁ = {:.5}", ex.c1_fit);

    let ex = build_example2(5)?;
    println!("\n‖μ‖_S = {:.6} ≤ π²/6", ex.sublinear_norm);
    for r in &ex.rows {
        println!("p = {:>6}, q = {:>4}: ratio {:>9.4}, ratio/√(q+1) {:.4}", r.p, r.q, r.ratio, r.normalized);
    }
    Ok(())
}
