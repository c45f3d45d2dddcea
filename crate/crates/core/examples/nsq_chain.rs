//! Coefficient bounds for λₙ = n² and the analytic κ-majorant.

use muntz_embed::nsq::{default_c, final_bound_threshold, kappa_nsq, nsq_product_bounds, theta_sum, DEFAULT_C1};

fn main() -> muntz_embed::Result<()> {
    let l10 = std::f64::consts::LN_10;
    println!("{:>3} {:>10} {:>10} {:>10}", "m", "log10 1/d", "tilde", "100^m");
    for m in [1, 2, 5, 10, 20] {
        let c = nsq_product_bounds(m)?;
        println!(
            "{m:>3} {:>10.4} {:>10.4} {:>10.4}",
            c.ln_inv_gram_distance / l10,
            c.ln_coeff_bound_tilde / l10,
            c.ln_coeff_bound / l10
        );
    }
    let (m0, exceptions) = final_bound_threshold(150)?;
    println!("closed-form chain reaches 100^m from m = {m0:?} ({} exceptions below)", exceptions.len());

    let t = theta_sum(100.0, 0.99)?;
    println!("Σ 100^m 0.99^(m²): ln = {:.4}, ln predictor = {:.4}", t.ln_value, t.ln_predictor);
    for x in [0.0, 0.5, 0.9] {
        println!("κ({x}) = {:.6e}", kappa_nsq(x, DEFAULT_C1, default_c())?);
    }
    Ok(())
}
