//! Log-domain special functions: log-gamma, log-factorial, log-beta and
//! the two-sided Stirling bracket for `N!`.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of `Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `ln(n!)`; exact summation up to 1024, log-gamma beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n <= 1024 {
        let mut s = 0.0;
        for k in 2..=n {
            s += (k as f64).ln();
        }
        s
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lower and upper Stirling bounds for `ln(N!)`:
/// `√(2πN)(N/e)^N e^{1/(12N+1)} ≤ N! ≤ √(2πN)(N/e)^N e^{1/(12N)}`.
pub fn stirling_ln_bounds(n: u64) -> (f64, f64) {
    assert!(n >= 1, "Stirling bracket needs N >= 1");
    let nf = n as f64;
    let base = 0.5 * (2.0 * PI * nf).ln() + nf * (nf.ln() - 1.0);
    (base + 1.0 / (12.0 * nf + 1.0), base + 1.0 / (12.0 * nf))
}

/// `ln(Σ exp(v))` for a slice of log values.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers_matches_factorials() {
        let mut fact = 1.0_f64;
        for n in 1..20u64 {
            fact *= n as f64;
            let lg = ln_gamma(n as f64 + 1.0);
            assert!((lg - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0), "n={n}");
            assert!((ln_factorial(n) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_identity() {
        // B(3, 4) = 2! 3! / 6! = 1/60
        assert!((ln_beta(3.0, 4.0).exp() - 1.0 / 60.0).abs() < 1e-15);
    }

    #[test]
    fn stirling_brackets_ten_factorial() {
        let (lo, hi) = stirling_ln_bounds(10);
        let f = 3_628_800.0_f64.ln();
        assert!(lo <= f && f <= hi);
    }

    #[test]
    fn stirling_brackets_log_factorial_everywhere() {
        for n in 1..2000u64 {
            let (lo, hi) = stirling_ln_bounds(n);
            let f = ln_factorial(n);
            assert!(lo <= f + 1e-12 * f.max(1.0) && f <= hi + 1e-12 * f.max(1.0), "n={n}");
        }
    }
}
