//! Müntz polynomials `Σ aₙ x^{λₙ}` and the generalized power sums used to
//! manipulate them.
//!
//! Real roots in `(0, 1)` are isolated exactly by recursion on the number of
//! terms: after dividing by the leading power `x^{e₀}`, the derivative of the
//! quotient is `x^{e₁-e₀-1}` times a power sum with one term fewer. Its roots
//! split `(0, 1)` into intervals on which the quotient is monotone, so each
//! interval holds at most one root and bisection finds it. This is the
//! constructive form of the generalized Descartes rule: a sum of `k` powers
//! has at most `k - 1` roots in `(0, ∞)`.

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::measure::Measure;

/// `Σ cᵢ x^{eᵢ}` with real (possibly non-positive) exponents, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    terms: Vec<(f64, f64)>,
}

impl PowerSum {
    /// Build from `(exponent, coefficient)` pairs. Exponents are sorted and
    /// equal exponents merged; zero coefficients are kept.
    pub fn new(mut terms: Vec<(f64, f64)>) -> Self {
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => merged.push((e, c)),
            }
        }
        PowerSum { terms: merged }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    fn nonzero(&self) -> Vec<(f64, f64)> {
        self.terms.iter().copied().filter(|t| t.1 != 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.1 == 0.0)
    }

    /// Smallest exponent carrying a nonzero coefficient.
    pub fn min_exponent(&self) -> Option<f64> {
        self.terms.iter().find(|t| t.1 != 0.0).map(|t| t.0)
    }

    /// Evaluate at `x ≥ 0` with the conventions `0^0 = 1`, `0^e = 0` for
    /// `e > 0` and `0^e = ∞` for `e < 0`.
    pub fn eval(&self, x: f64) -> f64 {
        eval_terms(&self.terms, x)
    }

    /// Term-wise derivative.
    pub fn derivative(&self) -> PowerSum {
        PowerSum::new(
            self.terms
                .iter()
                .filter(|t| t.0 != 0.0)
                .map(|&(e, c)| (e - 1.0, c * e))
                .collect(),
        )
    }

    /// Points of `(0, 1)` where the sum changes sign, ascending.
    pub fn sign_changes(&self) -> Vec<f64> {
        let nz = self.nonzero();
        if nz.len() < 2 {
            return Vec::new();
        }
        let e0 = nz[0].0;
        let shifted: Vec<(f64, f64)> = nz.iter().map(|&(e, c)| (e - e0, c)).collect();
        sign_changes_shifted(&shifted)
    }

    /// `max |s(x)|` over `[0, 1]` and a maximizing point; exponents must be
    /// non-negative where the coefficient is nonzero.
    pub fn sup_abs(&self) -> Result<(f64, f64)> {
        let nz = self.nonzero();
        if nz.is_empty() {
            return Ok((0.0, 1.0));
        }
        if nz[0].0 < 0.0 {
            return Err(MuntzError::UnsupportedDomain(
                "negative exponent: unbounded near 0".into(),
            ));
        }
        // critical points: roots of the derivative in (0, 1)
        let crit = self.derivative().sign_changes();
        let mut best = (eval_terms(&nz, 0.0).abs(), 0.0);
        for x in crit.into_iter().chain(std::iter::once(1.0)) {
            let v = eval_terms(&nz, x).abs();
            if v > best.0 {
                best = (v, x);
            }
        }
        Ok(best)
    }
}

fn eval_terms(terms: &[(f64, f64)], x: f64) -> f64 {
    if x == 0.0 {
        let mut s = 0.0;
        for &(e, c) in terms {
            if c == 0.0 {
                continue;
            }
            if e == 0.0 {
                s += c;
            } else if e < 0.0 {
                return c.signum() * f64::INFINITY;
            }
        }
        return s;
    }
    let lx = x.ln();
    // Neumaier summation over the terms
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &(e, c) in terms {
        if c == 0.0 {
            continue;
        }
        let v = c * (e * lx).exp();
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sign changes in (0,1) of `Σ cᵢ x^{eᵢ}` where `e₀ = 0` and all `cᵢ ≠ 0`.
fn sign_changes_shifted(terms: &[(f64, f64)]) -> Vec<f64> {
    if terms.len() < 2 {
        return Vec::new();
    }
    // derivative = x^{e₁-1} Σ_{i≥1} cᵢ eᵢ x^{eᵢ-e₁}
    let e1 = terms[1].0;
    let reduced: Vec<(f64, f64)> = terms[1..].iter().map(|&(e, c)| (e - e1, c * e)).collect();
    let crit = sign_changes_shifted(&reduced);
    let mut nodes = Vec::with_capacity(crit.len() + 2);
    nodes.push(0.0);
    nodes.extend(crit);
    nodes.push(1.0);
    let values: Vec<f64> = nodes.iter().map(|&x| eval_terms(terms, x)).collect();
    let mut roots = Vec::new();
    for i in 0..nodes.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        // an exact zero at an interior node with a genuine sign change
        if i > 0 && fa == 0.0 {
            let before = values[i - 1];
            if before != 0.0 && fb != 0.0 && before.signum() != fb.signum() {
                roots.push(nodes[i]);
            }
            continue;
        }
        if fa == 0.0 || fb == 0.0 || fa.signum() == fb.signum() {
            continue;
        }
        roots.push(bisect(terms, nodes[i], nodes[i + 1], fa));
    }
    roots.retain(|&r| r > 0.0 && r < 1.0);
    roots
}

fn bisect(terms: &[(f64, f64)], mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_terms(terms, mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A Müntz polynomial: strictly increasing positive exponents, one term each.
#[derive(Debug, Clone, PartialEq)]
pub struct MuntzPolynomial {
    sum: PowerSum,
}

/// Term-wise derivative of a Müntz polynomial. Exponents `λ - 1` may be
/// zero or negative, in which case the derivative is not bounded at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MuntzDerivative {
    pub sum: PowerSum,
    /// True when every exponent is `≥ 0`, i.e. the derivative extends
    /// continuously to `[0, 1]`.
    pub bounded_at_zero: bool,
}

impl MuntzPolynomial {
    pub fn new(terms: Vec<(f64, f64)>) -> Result<Self> {
        for w in terms.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(MuntzError::invalid(format!(
                    "exponents must be strictly increasing: {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(e, c) in &terms {
            if !(e > 0.0) || !e.is_finite() || !c.is_finite() {
                return Err(MuntzError::invalid(format!(
                    "term ({e}, {c}): exponents must be positive and finite"
                )));
            }
        }
        Ok(MuntzPolynomial {
            sum: PowerSum { terms },
        })
    }

    /// Build from exponents and coefficients of equal length.
    pub fn from_parts(exponents: &[f64], coeffs: &[f64]) -> Result<Self> {
        if exponents.len() != coeffs.len() {
            return Err(MuntzError::invalid("exponent/coefficient length mismatch"));
        }
        Self::new(exponents.iter().copied().zip(coeffs.iter().copied()).collect())
    }

    /// `(λ + 1) x^λ`, which has unit `L¹` norm.
    pub fn normalized_monomial(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(MuntzError::invalid(format!("exponent {lambda} must be positive")));
        }
        Self::new(vec![(lambda, lambda + 1.0)])
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        self.sum.terms()
    }

    pub fn exponents(&self) -> Vec<f64> {
        self.terms().iter().map(|t| t.0).collect()
    }

    pub fn as_power_sum(&self) -> &PowerSum {
        &self.sum
    }

    pub fn is_zero(&self) -> bool {
        self.sum.is_zero()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sum.eval(x)
    }

    pub fn derivative(&self) -> MuntzDerivative {
        let sum = self.sum.derivative();
        let bounded_at_zero = sum.terms().iter().all(|t| t.1 == 0.0 || t.0 >= 0.0);
        MuntzDerivative { sum, bounded_at_zero }
    }

    /// Sign changes of `p` in `(0, 1)`; at most `#terms - 1` of them.
    pub fn sign_changes(&self) -> Vec<f64> {
        self.sum.sign_changes()
    }

    /// `(‖p‖_∞, argmax)` on `[0, 1]`.
    pub fn sup_norm(&self) -> Result<(f64, f64)> {
        if self.is_zero() {
            return Err(MuntzError::invalid("sup norm of the zero polynomial"));
        }
        self.sum.sup_abs()
    }

    /// Closed-form antiderivative `Σ aₙ x^{λₙ+1}/(λₙ+1)` vanishing at 0.
    pub fn antiderivative(&self) -> PowerSum {
        PowerSum::new(
            self.terms()
                .iter()
                .map(|&(e, c)| (e + 1.0, c / (e + 1.0)))
                .collect(),
        )
    }

    /// Exact `∫₀¹ |p|`: sum of antiderivative increments between sign changes.
    pub fn l1_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let anti = self.antiderivative();
        let mut nodes = vec![0.0];
        nodes.extend(self.sign_changes());
        nodes.push(1.0);
        let vals: Vec<f64> = nodes.iter().map(|&x| anti.eval(x)).collect();
        vals.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// `∫₀¹ p²`, exact from the Gram entries `1/(λᵢ+λⱼ+1)`.
    pub fn l2_norm(&self) -> f64 {
        let t = self.terms();
        let mut s = 0.0;
        for &(ei, ci) in t {
            for &(ej, cj) in t {
                s += ci * cj / (ei + ej + 1.0);
            }
        }
        s.max(0.0).sqrt()
    }

    /// `min{‖p‖²_∞ / (2‖p'‖_∞), ‖p‖_∞ / 4}`, a lower bound for `‖p‖₁`
    /// valid for differentiable nonconstant functions on `[0, 1]`.
    pub fn elementary_lower_bound(&self) -> Result<f64> {
        if let Some(&(e, _)) = self.terms().iter().find(|t| t.1 != 0.0 && t.0 < 1.0) {
            return Err(MuntzError::UnsupportedDomain(format!(
                "exponent {e} < 1: derivative unbounded at 0"
            )));
        }
        let (sup, _) = self.sup_norm()?;
        let (dsup, _) = self.derivative().sum.sup_abs()?;
        Ok((sup * sup / (2.0 * dsup)).min(sup / 4.0))
    }

    /// `∫ |p| dμ`, splitting density pieces at the sign changes of `p`.
    pub fn l1_mu_norm(&self, mu: &Measure, tol: f64) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let roots = self.sign_changes();
        mu.integrate_split(|x| self.eval(x).abs(), &roots, tol)
    }

    /// Upper bound `Σ |aₙ| / (λₙ + 1)` from the triangle inequality.
    pub fn triangle_l1_bound(&self) -> f64 {
        self.terms().iter().map(|&(e, c)| c.abs() / (e + 1.0)).sum()
    }

    /// Multiply all coefficients by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        MuntzPolynomial {
            sum: PowerSum {
                terms: self.terms().iter().map(|&(e, c)| (e, c * s)).collect(),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PolyDescriptor {
    terms: Vec<(f64, f64)>,
}

impl Serialize for MuntzPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyDescriptor {
            terms: self.terms().to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MuntzPolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = PolyDescriptor::deserialize(d)?;
        MuntzPolynomial::new(desc.terms).map_err(serde::de::Error::custom)
    }
}
