//! Norms, roots and the elementary L¹ lower bound of a Müntz polynomial.

use muntz_embed::MuntzPolynomial;

fn main() -> muntz_embed::Result<()> {
    let p = MuntzPolynomial::from_parts(&[1.0, 2.5, 7.0], &[1.0, -3.0, 2.2])?;
    println!("sign changes in (0, 1): {:?}", p.sign_changes());
    let (sup, at) = p.sup_norm()?;
    println!("‖p‖_∞ = {sup:.8} at x = {at:.6}");
    println!("‖p‖₁ = {:.10}", p.l1_norm());
    println!("‖p‖₂ = {:.10}", p.l2_norm());
    println!("elementary lower bound = {:.10}", p.elementary_lower_bound()?);
    println!("triangle upper bound = {:.10}", p.triangle_l1_bound());
    Ok(())
}
