//! Coefficient bounds and the analytic κ-majorant for `λₙ = n²`.
//!
//! The chain runs: Gram distance of `x^{m²+1}` to the other `x^{n²+1}`,
//! split of the resulting infinite product into `n < m`, `m < n ≤ 2m` and
//! `n > 2m`, factorial majorants via Stirling, the bound
//! `|ã_m| ≤ m 3^{(8m²+3)/(2m)} ‖f‖₂`, and finally `|a_m| ≤ 100^m ‖p‖₁`.
//! Everything is kept in natural-log units.

use serde::Serialize;

use crate::error::{MuntzError, Result};
use crate::special::{ln_factorial, stirling_ln_bounds};

/// `(ln 100)² / 4`, from the theta asymptotic at `a = 100`.
pub fn default_c() -> f64 {
    let l = 100f64.ln();
    l * l / 4.0
}

pub const DEFAULT_C1: f64 = 1.0;

/// `ln d` where `d = (2γ+1)^{-1/2} Π |γ-γₙ|/(γ+γₙ+1)` is the `L²[0,1]`
/// distance from `x^γ` to the span of the `x^{γₙ}`.
pub fn ln_gram_distance(gamma: f64, others: &[f64]) -> Result<f64> {
    if !(gamma > -0.5) || !gamma.is_finite() {
        return Err(MuntzError::invalid(format!("γ = {gamma} must exceed -1/2")));
    }
    let mut s = -0.5 * (2.0 * gamma + 1.0).ln();
    for &g in others {
        if !(g > -0.5) || !g.is_finite() {
            return Err(MuntzError::invalid(format!("exponent {g} must exceed -1/2")));
        }
        if g == gamma {
            return Err(MuntzError::invalid(format!("γ = {gamma} also appears among the others")));
        }
        s += (gamma - g).abs().ln() - (gamma + g + 1.0).ln();
    }
    Ok(s)
}

pub fn gram_distance(gamma: f64, others: &[f64]) -> Result<f64> {
    Ok(ln_gram_distance(gamma, others)?.exp())
}

/// `d⁻¹` for `γ = exponents[m]` against the rest: `|a_m| ≤ d⁻¹ ‖f‖₂`.
pub fn coefficient_bound_gram(exponents: &[f64], m: usize) -> Result<f64> {
    let gamma = *exponents
        .get(m)
        .ok_or_else(|| MuntzError::invalid(format!("index {m} out of range")))?;
    let others: Vec<f64> = exponents
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m)
        .map(|(_, &g)| g)
        .collect();
    Ok((-ln_gram_distance(gamma, &others)?).exp())
}

/// One row of the `n²` bound chain, natural logs throughout.
#[derive(Debug, Clone, Serialize)]
pub struct NsqBoundChain {
    pub m: usize,
    /// `ln d⁻¹` for `x^{m²+1}` against all other `x^{n²+1}` (upper bound:
    /// truncated product plus tail bound).
    pub ln_inv_gram_distance: f64,
    /// Directly computed parts `ln P₁, ln P₂, ln P₃` (`P₃` truncated at
    /// `n = 10m` plus a tail bound).
    pub ln_parts: [f64; 3],
    /// `ln (2m-1)!/(m!(m-1)!)`, `ln (3m)!/((2m)!m!)`, `((2m²+3)/(2m)) ln 3`.
    pub ln_part_bounds: [f64; 3],
    /// Stirling upper bound for `ln(√(2m²+3) · bound₁ · bound₂ · bound₃)`.
    pub ln_stirling_bound: f64,
    /// `ln(m 3^{(8m²+3)/(2m)})`.
    pub ln_coeff_bound_tilde: f64,
    /// `m ln 100`.
    pub ln_coeff_bound: f64,
    /// `√(2m²+3) P₁P₂P₃ ≤ m 3^{(8m²+3)/(2m)}`.
    pub tilde_holds: bool,
    /// `m(m²+1) · m 3^{(8m²+3)/(2m)} ≤ 100^m`.
    pub final_holds: bool,
}

fn factor(m: f64, n: f64) -> f64 {
    ((m * m + n * n + 3.0) / (m * m - n * n)).abs().ln()
}

/// Build the bound chain for one `m ≥ 1`.
pub fn nsq_product_bounds(m: usize) -> Result<NsqBoundChain> {
    if m == 0 {
        return Err(MuntzError::invalid("m must be at least 1"));
    }
    let mf = m as f64;
    let mu = m as u64;
    let p1: f64 = (1..m).map(|n| factor(mf, n as f64)).sum();
    let p2: f64 = (m + 1..=2 * m).map(|n| factor(mf, n as f64)).sum();
    let a = 2.0 * mf * mf + 3.0;
    let p3_trunc: f64 = (2 * m + 1..=10 * m)
        .map(|n| {
            let nf = n as f64;
            (a / (nf * nf - mf * mf)).ln_1p()
        })
        .sum();
    // log(1+x) ≤ x and Σ_{n>10m} 1/(n²-m²) ≤ ∫_{10m}^∞ = ln(11/9)/(2m)
    let p3 = p3_trunc + a / (2.0 * mf) * (11.0f64 / 9.0).ln();
    let b1 = ln_factorial(2 * mu - 1) - ln_factorial(mu) - ln_factorial(mu - 1);
    let b2 = ln_factorial(3 * mu) - ln_factorial(2 * mu) - ln_factorial(mu);
    let b3 = a / (2.0 * mf) * 3f64.ln();
    let up = |n: u64| if n == 0 { 0.0 } else { stirling_ln_bounds(n).1 };
    let lo = |n: u64| if n == 0 { 0.0 } else { stirling_ln_bounds(n).0 };
    let stirling = 0.5 * a.ln() + up(2 * mu - 1) - lo(mu) - lo(mu - 1) + up(3 * mu) - lo(2 * mu) - lo(mu) + b3;
    let tilde = mf.ln() + (8.0 * mf * mf + 3.0) / (2.0 * mf) * 3f64.ln();
    let fin = mf * 100f64.ln();
    let ln_inv = 0.5 * a.ln() + p1 + p2 + p3;
    Ok(NsqBoundChain {
        m,
        ln_inv_gram_distance: ln_inv,
        ln_parts: [p1, p2, p3],
        ln_part_bounds: [b1, b2, b3],
        ln_stirling_bound: stirling,
        ln_coeff_bound_tilde: tilde,
        ln_coeff_bound: fin,
        tilde_holds: ln_inv <= tilde,
        final_holds: (mf * (mf * mf + 1.0)).ln() + tilde <= fin,
    })
}

/// `(ln |ã_m| bound, ln |a_m| bound) = (ln(m 3^{(8m²+3)/(2m)}), m ln 100)`.
pub fn nsq_coeff_bound(m: usize) -> Result<(f64, f64)> {
    let c = nsq_product_bounds(m)?;
    Ok((c.ln_coeff_bound_tilde, c.ln_coeff_bound))
}

/// Smallest `m₀ ≤ m_max` such that `m(m²+1) m 3^{(8m²+3)/(2m)} ≤ 100^m` for
/// every `m` in `m₀..=m_max`, with the exceptions below `m₀`.
pub fn final_bound_threshold(m_max: usize) -> Result<(Option<usize>, Vec<usize>)> {
    let holds: Vec<bool> = (1..=m_max)
        .map(|m| nsq_product_bounds(m).map(|c| c.final_holds))
        .collect::<Result<_>>()?;
    let m0 = (1..=m_max).rev().take_while(|&m| holds[m - 1]).last();
    let exceptions = (1..=m_max)
        .filter(|&m| !holds[m - 1] && m0.is_none_or(|m0| m < m0))
        .collect();
    Ok((m0, exceptions))
}

/// Largest number of terms `theta_sum` will add.
pub const THETA_MAX_TERMS: u64 = 100_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct ThetaSum {
    pub value: f64,
    pub ln_value: f64,
    pub terms: u64,
    /// `-(ln a)² / (4 ln x)`, the log of the asymptotic predictor.
    pub ln_predictor: f64,
    /// `ln(sum) / ln(predictor)`.
    pub log_ratio: f64,
}

/// `Σ_{m≥1} aᵐ x^{m²}` in the log domain, stopping once terms past the peak
/// fall below `10⁻³⁰` of the largest.
pub fn theta_sum(a: f64, x: f64) -> Result<ThetaSum> {
    if !(a > 1.0) || !(x > 0.0 && x < 1.0) {
        return Err(MuntzError::invalid(format!("need a > 1 and 0 < x < 1 (got {a}, {x})")));
    }
    let (la, lx) = (a.ln(), x.ln());
    let peak = -la / (2.0 * lx);
    let cutoff = 30.0 * 10f64.ln();
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0; // Σ exp(term - max)
    let mut m = 1u64;
    loop {
        if m > THETA_MAX_TERMS {
            return Err(MuntzError::Resource(format!(
                "theta sum at x = {x} needs more than {THETA_MAX_TERMS} terms"
            )));
        }
        let mf = m as f64;
        let t = mf * la + mf * mf * lx;
        if t > max {
            acc = acc * (max - t).exp() + 1.0;
            max = t;
        } else {
            acc += (t - max).exp();
        }
        if mf > peak && t < max - cutoff {
            break;
        }
        m += 1;
    }
    let ln_value = max + acc.ln();
    let ln_predictor = -la * la / (4.0 * lx);
    Ok(ThetaSum {
        value: ln_value.exp(),
        ln_value,
        terms: m,
        ln_predictor,
        log_ratio: ln_value / ln_predictor,
    })
}

/// `κ(t) = C₁ e^{C/(1-t)}`.
pub fn kappa_nsq(t: f64, c1: f64, c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(MuntzError::invalid(format!("t = {t} must lie in [0, 1)")));
    }
    Ok(c1 * (c / (1.0 - t)).exp())
}
