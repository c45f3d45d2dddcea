//! The two counterexample measures: a discrete measure that is embedding
//! for one lacunary sequence but not for another, and scaled Diracs at the
//! maxima of `x^p (1-x)^q` showing that sublinearity alone does not force
//! embedding for non-quasilacunary sequences.

use serde::Serialize;

use crate::error::{MuntzError, Result};
use crate::measure::{Atom, Measure};
use crate::sequence::ExponentSequence;
use crate::special::ln_beta;

pub const EXAMPLE1_N_MAX: usize = 25;
pub const EXAMPLE2_K_MAX: usize = 6;

/// Atoms closer to 1 than this are left out of [`Example1::measure`]:
/// their location is no longer resolved by an `f64`.
pub const EXAMPLE1_ATOM_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Example1Row {
    pub n: usize,
    pub lambda: f64,
    /// `1 - aₙ`.
    pub delta: f64,
    pub c: f64,
    pub lambda_prime: f64,
    /// `∫ λₙ x^{λₙ} dμ`.
    pub bounded_integral: f64,
    /// `∫ λ'ₙ x^{λ'ₙ} dμ`.
    pub growth_integral: f64,
}

/// `μ = Σ cₖ δ_{aₖ}` together with `Λ` and `Λ' = (-1/ln aₙ)`.
///
/// Atom locations are stored through `δₖ = 1 - aₖ`, which stays
/// representable long after `aₖ` rounds to 1.
#[derive(Debug, Clone, Serialize)]
pub struct Example1 {
    pub n_max: usize,
    pub c: Vec<f64>,
    pub delta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `λ'ₙ` for `n ≥ 1` (`a₀ = 0` has none).
    pub lambda_prime: Vec<f64>,
    pub total_mass: f64,
    pub rows: Vec<Example1Row>,
    /// Least-squares slope through the origin of the growth integrals
    /// against `n`, over `3 ≤ n ≤ n_max`.
    pub c1_fit: f64,
    pub bounded_ok: bool,
    pub growth_ok: bool,
}

impl Example1 {
    pub fn a(&self, k: usize) -> f64 {
        1.0 - self.delta[k]
    }

    /// `∫ λ x^λ dμ`, summed in the log domain.
    pub fn integral(&self, lambda: f64) -> f64 {
        let ln_l = lambda.ln();
        self.c
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d < 1.0)
            .map(|(&c, &d)| (c.ln() + ln_l + lambda * (-d).ln_1p()).exp())
            .sum()
    }

    /// The atoms that an `f64` location can still represent.
    pub fn measure(&self) -> Result<Measure> {
        let atoms = self
            .c
            .iter()
            .zip(&self.delta)
            .filter(|(_, &d)| d >= EXAMPLE1_ATOM_CUTOFF)
            .map(|(&weight, &d)| Atom { t: 1.0 - d, weight })
            .collect();
        Measure::from_atoms(atoms)
    }

    pub fn sequence(&self) -> Result<ExponentSequence> {
        ExponentSequence::explicit(self.lambda[1..].to_vec())
    }

    pub fn sequence_prime(&self) -> Result<ExponentSequence> {
        ExponentSequence::explicit(self.lambda_prime.clone())
    }
}

/// Build the recursion with minimal admissible choices: `λ_{n+1}` is the
/// smallest `λₙ 2^j` (`j ≥ 1`) with `λ_{n+1} aₖ^{λ_{n+1}} ≤ 1` for all
/// `k ≤ n`, and `1 - a_{n+1} = min((1-aₙ)/2, 1/((n+1)λ_{n+1}))`.
pub fn build_example1(n_max: usize) -> Result<Example1> {
    if n_max > EXAMPLE1_N_MAX {
        return Err(MuntzError::Resource(format!(
            "n_max = {n_max} exceeds the cap of {EXAMPLE1_N_MAX}"
        )));
    }
    if n_max < 3 {
        return Err(MuntzError::invalid("n_max must be at least 3"));
    }
    let mut c: Vec<f64> = vec![1.0];
    let mut delta: Vec<f64> = vec![1.0];
    let mut lambda: Vec<f64> = vec![1.0];
    for n in 0..n_max {
        let feasible = |l: f64| {
            delta
                .iter()
                .all(|&d| d >= 1.0 || l.ln() + l * (-d).ln_1p() <= 0.0)
        };
        let mut next = lambda[n];
        loop {
            next *= 2.0;
            if !next.is_finite() || next > 1e300 {
                return Err(MuntzError::Resource(format!(
                    "λ_{} overflows the representable range",
                    n + 1
                )));
            }
            if feasible(next) {
                break;
            }
        }
        let m = (n + 1) as f64;
        let d = (0.5 * delta[n]).min(1.0 / (m * next));
        lambda.push(next);
        delta.push(d);
        c.push(m * d);
    }
    let lambda_prime: Vec<f64> = delta[1..].iter().map(|&d| -1.0 / (-d).ln_1p()).collect();
    let mut ex = Example1 {
        n_max,
        total_mass: c.iter().sum(),
        c,
        delta,
        lambda,
        lambda_prime,
        rows: Vec::new(),
        c1_fit: 0.0,
        bounded_ok: false,
        growth_ok: false,
    };
    for n in 1..=n_max {
        let row = Example1Row {
            n,
            lambda: ex.lambda[n],
            delta: ex.delta[n],
            c: ex.c[n],
            lambda_prime: ex.lambda_prime[n - 1],
            bounded_integral: ex.integral(ex.lambda[n]),
            growth_integral: ex.integral(ex.lambda_prime[n - 1]),
        };
        ex.rows.push(row);
    }
    let tail = &ex.rows[2..];
    let (num, den) = tail.iter().fold((0.0, 0.0), |(a, b), r| {
        let n = r.n as f64;
        (a + n * r.growth_integral, b + n * n)
    });
    ex.c1_fit = num / den;
    ex.bounded_ok = tail.iter().all(|r| r.bounded_integral <= ex.total_mass + 3.0);
    ex.growth_ok = ex.c1_fit > 0.0 && tail.iter().all(|r| r.growth_integral >= 0.5 * ex.c1_fit * r.n as f64);
    Ok(ex)
}

/// `ln(1 - δ)` from the Mercator series for small `δ`.
fn ln_one_minus(d: f64) -> f64 {
    if d < 1e-3 {
        -(1..=8).map(|j| d.powi(j) / j as f64).sum::<f64>()
    } else {
        (1.0 - d).ln()
    }
}

/// Re-check every recursion clause from the stored values, in the log
/// domain. Returns a description of each violated clause.
pub fn verify_example1(ex: &Example1) -> Vec<String> {
    let mut bad = Vec::new();
    if ex.c[0] != 1.0 || ex.lambda[0] != 1.0 || ex.delta[0] != 1.0 {
        bad.push("seeds".to_string());
    }
    for n in 0..ex.n_max {
        let l = ex.lambda[n + 1];
        let d = ex.delta[n + 1];
        for k in 1..=n {
            let v = l.ln() + l * ln_one_minus(ex.delta[k]);
            if v > 1e-9 * (l * ex.delta[k]).max(1.0) {
                bad.push(format!("λ_{} a_{k}^λ > 1", n + 1));
            }
        }
        if d > ex.delta[n] / 2.0 {
            bad.push(format!("(i) fails at n = {}", n + 1));
        }
        let m = (n + 1) as f64;
        if m.ln() + d.ln() + l.ln() > 1e-12 {
            bad.push(format!("(ii) fails at n = {}", n + 1));
        }
        if (ex.c[n + 1] - m * d).abs() > 1e-15 * ex.c[n + 1] {
            bad.push(format!("c_{} ≠ (n+1)(1 - a)", n + 1));
        }
        if l <= ex.lambda[n] {
            bad.push(format!("λ not increasing at {}", n + 1));
        }
    }
    bad
}

#[derive(Debug, Clone, Serialize)]
pub struct HpqRatio {
    pub p: u64,
    pub q: u64,
    /// Maximizer `p/(p+q+1)` of `(1-x) x^p (1-x)^q`.
    pub t: f64,
    /// `ln ‖h_{p,q}‖₁ = ln B(p+1, q+1)`.
    pub ln_norm: f64,
    /// `∫ h_{p,q} dδ'_t = (1-t) h_{p,q}(t)`.
    pub integral: f64,
    pub ratio: f64,
    /// `ratio / √(q+1)`.
    pub normalized: f64,
}

/// `∫ h_{p,q} dδ'_t / ‖h_{p,q}‖₁` at `t = p/(p+q+1)`, in logs.
pub fn hpq_ratio(p: u64, q: u64) -> HpqRatio {
    let (pf, qf) = (p as f64, q as f64);
    let s = pf + qf + 1.0;
    let ln_t = (pf / s).ln();
    let ln_1t = ((qf + 1.0) / s).ln();
    let ln_int = ln_1t + pf * ln_t + qf * ln_1t;
    let ln_norm = ln_beta(pf + 1.0, qf + 1.0);
    let ratio = (ln_int - ln_norm).exp();
    HpqRatio {
        p,
        q,
        t: pf / s,
        ln_norm,
        integral: ln_int.exp(),
        ratio,
        normalized: ratio / (qf + 1.0).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Example2 {
    pub k_max: usize,
    pub sequence: ExponentSequence,
    pub rows: Vec<HpqRatio>,
    /// Exact `‖μ‖_S` for `μ = Σ k⁻² δ'_{t_k}`.
    pub sublinear_norm: f64,
    pub sublinear_ok: bool,
    pub band: (f64, f64),
    pub band_ok: bool,
    pub ratio_nondecreasing: bool,
    /// Every `h_{k⁷,k⁵}` only uses exponents of block `k`.
    pub span_ok: bool,
    #[serde(skip)]
    pub measure: Measure,
}

pub fn build_example2(k_max: usize) -> Result<Example2> {
    if k_max > EXAMPLE2_K_MAX {
        return Err(MuntzError::Resource(format!(
            "k_max = {k_max} exceeds the cap of {EXAMPLE2_K_MAX}"
        )));
    }
    if k_max == 0 {
        return Err(MuntzError::invalid("k_max must be positive"));
    }
    let sequence = ExponentSequence::grouped_powers(7, 5);
    let rows: Vec<HpqRatio> = (1..=k_max as u64).map(|k| hpq_ratio(k.pow(7), k.pow(5))).collect();
    let mut measure = Measure::zero();
    for (k, r) in rows.iter().enumerate() {
        let w = 1.0 / ((k + 1) as f64).powi(2);
        measure = measure.with_atom(r.t, w * (1.0 - r.t))?;
    }
    let profile = measure.sublinear_profile(&crate::measure::default_eps_grid())?;
    let sublinear_norm = profile.sublinear_norm_estimate;
    let band = (0.1, 10.0);
    let band_ok = rows.iter().all(|r| band.0 <= r.normalized && r.normalized <= band.1);
    let ratio_nondecreasing = rows.windows(2).all(|w| w[1].ratio >= w[0].ratio);

    let ranges = sequence.block_ranges(k_max)?;
    let values = sequence.materialize(ranges.last().map_or(0, |r| r.1))?;
    let span_ok = rows.iter().zip(&ranges).all(|(r, &(first, last))| {
        let block = &values[first - 1..last];
        (0..=r.q).all(|j| block.contains(&((r.p + j) as f64)))
    });
    Ok(Example2 {
        k_max,
        sequence,
        rows,
        sublinear_norm,
        sublinear_ok: sublinear_norm <= std::f64::consts::PI.powi(2) / 6.0 + 1e-6,
        band,
        band_ok,
        ratio_nondecreasing,
        span_ok,
        measure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_opening_terms() {
        let ex = build_example1(5).unwrap();
        assert_eq!(&ex.lambda[..4], &[1.0, 2.0, 4.0, 32.0]);
        assert_eq!(ex.delta[1], 0.5);
        assert_eq!(ex.c[1], 0.5);
        assert_eq!(ex.delta[2], 0.125);
        assert_eq!(ex.c[2], 0.25);
        assert!(verify_example1(&ex).is_empty());
    }

    #[test]
    fn example1_branches() {
        let ex = build_example1(12).unwrap();
        assert!(ex.bounded_ok && ex.growth_ok, "{:?}", ex.rows);
        // cₙλ'ₙaₙ^{λ'ₙ} = cₙλ'ₙ/e ≈ n/e
        let last = ex.rows.last().unwrap();
        assert!((last.growth_integral / 12.0 - (-1.0f64).exp()).abs() < 0.05);
        assert!(verify_example1(&ex).is_empty());
        assert!(matches!(build_example1(26), Err(MuntzError::Resource(_))));
    }

    #[test]
    fn example1_measure_agrees_with_log_sum() {
        let ex = build_example1(6).unwrap();
        let mu = ex.measure().unwrap();
        for l in [2.0, 32.0, 1024.0] {
            let direct: f64 = mu.flat_atoms().iter().map(|a| a.weight * l * a.t.powf(l)).sum();
            assert!((direct - ex.integral(l)).abs() < 1e-9 * ex.integral(l).max(1.0));
        }
    }

    #[test]
    fn hpq_values() {
        let r = hpq_ratio(1, 1);
        assert!((r.t - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.ln_norm.exp() - 1.0 / 6.0).abs() < 1e-13);
        assert!((r.integral - 4.0 / 27.0).abs() < 1e-15);
        assert!((r.ratio - 8.0 / 9.0).abs() < 1e-12);
        assert!((hpq_ratio(2, 3).ln_norm.exp() - 1.0 / 60.0).abs() < 1e-14);
    }

    #[test]
    fn example2_checks() {
        let ex = build_example2(4).unwrap();
        assert!(ex.sublinear_ok && ex.band_ok && ex.ratio_nondecreasing && ex.span_ok, "{ex:?}");
        assert!(matches!(build_example2(7), Err(MuntzError::Resource(_))));
    }
}
