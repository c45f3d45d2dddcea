//! Multi-restart direct search for `max_c Σ wᵢ|(Ac)ᵢ| / Σ vⱼ|(Bc)ⱼ|`.
//!
//! Both functionals are discretized once: the columns of `A` and `B` hold
//! the basis functions `(λ+1)x^λ` sampled at the numerator and denominator
//! nodes. The ratio is scale invariant, so the search runs on the unit
//! sphere of coefficient vectors with a coordinate pattern search whose
//! step halves after each sweep without improvement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{MuntzError, Result};

/// Stop refining once the step falls below this (relative to `‖c‖ = 1`).
pub const STEP_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 4000;

/// `(λ+1) x^λ`, with `0^λ = 0`.
pub fn normalized_monomial(lambda: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (lambda + 1.0) * (lambda * x.ln()).exp()
    }
}

/// A discretized weighted `L¹` functional `c ↦ Σ wᵢ |Σⱼ cⱼ gⱼ(xᵢ)|`.
#[derive(Debug, Clone)]
pub struct Functional {
    weights: Vec<f64>,
    /// Row-major `nodes × basis`.
    matrix: Vec<f64>,
    dim: usize,
}

impl Functional {
    pub fn new(rule: &[(f64, f64)], exponents: &[f64]) -> Self {
        let dim = exponents.len();
        let mut matrix = Vec::with_capacity(rule.len() * dim);
        for &(x, _) in rule {
            matrix.extend(exponents.iter().map(|&l| normalized_monomial(l, x)));
        }
        Functional {
            weights: rule.iter().map(|r| r.1).collect(),
            matrix,
            dim,
        }
    }

    /// From an explicit row-major `weights.len() × dim` matrix.
    pub fn from_matrix(weights: Vec<f64>, matrix: Vec<f64>, dim: usize) -> Result<Self> {
        if matrix.len() != weights.len() * dim {
            return Err(MuntzError::invalid("functional matrix has the wrong shape"));
        }
        Ok(Functional { weights, matrix, dim })
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.weights.len()).map(|i| self.matrix[i * self.dim + j]).collect()
    }

    fn apply(&self, c: &[f64]) -> Vec<f64> {
        self.matrix
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn value(&self, c: &[f64]) -> f64 {
        weighted_abs(&self.weights, &self.apply(c), None, 0.0)
    }
}

fn weighted_abs(w: &[f64], u: &[f64], dir: Option<&[f64]>, step: f64) -> f64 {
    match dir {
        None => w.iter().zip(u).map(|(w, u)| w * u.abs()).sum(),
        Some(d) => w
            .iter()
            .zip(u.iter().zip(d))
            .map(|(w, (u, d))| w * (u + step * d).abs())
            .sum(),
    }
}

/// A ratio objective over a fixed exponent set.
#[derive(Debug, Clone)]
pub struct RatioProblem {
    pub exponents: Vec<f64>,
    num: Functional,
    den: Functional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Coefficients in the normalized-monomial basis, unit Euclidean norm.
    pub coeffs: Vec<f64>,
    /// Discretized ratio.
    pub value: f64,
    pub start: usize,
}

impl RatioProblem {
    pub fn new(exponents: &[f64], num_rule: &[(f64, f64)], den_rule: &[(f64, f64)]) -> Result<Self> {
        if exponents.is_empty() {
            return Err(MuntzError::invalid("empty exponent set"));
        }
        Ok(RatioProblem {
            exponents: exponents.to_vec(),
            num: Functional::new(num_rule, exponents),
            den: Functional::new(den_rule, exponents),
        })
    }

    pub fn from_functionals(exponents: &[f64], num: Functional, den: Functional) -> Result<Self> {
        if num.dim != exponents.len() || den.dim != exponents.len() {
            return Err(MuntzError::invalid("functional dimension mismatch"));
        }
        Ok(RatioProblem {
            exponents: exponents.to_vec(),
            num,
            den,
        })
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn ratio(&self, c: &[f64]) -> f64 {
        let d = self.den.value(c);
        if d > 0.0 {
            self.num.value(c) / d
        } else {
            0.0
        }
    }

    /// Coordinate pattern search from `start`.
    pub fn climb(&self, start: &[f64]) -> (Vec<f64>, f64) {
        let n = self.dim();
        let mut c = start.to_vec();
        normalize(&mut c);
        let mut u = self.num.apply(&c);
        let mut v = self.den.apply(&c);
        let cols_a: Vec<Vec<f64>> = (0..n).map(|j| self.num.column(j)).collect();
        let cols_b: Vec<Vec<f64>> = (0..n).map(|j| self.den.column(j)).collect();
        let ratio = |u: &[f64], v: &[f64], j: Option<usize>, s: f64| {
            let (da, db) = match j {
                Some(j) => (Some(cols_a[j].as_slice()), Some(cols_b[j].as_slice())),
                None => (None, None),
            };
            let d = weighted_abs(&self.den.weights, v, db, s);
            if d > 0.0 {
                weighted_abs(&self.num.weights, u, da, s) / d
            } else {
                0.0
            }
        };
        let mut best = ratio(&u, &v, None, 0.0);
        let mut step = 0.5;
        let mut sweeps = 0;
        while step >= STEP_TOL && sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut improved = false;
            for j in 0..n {
                for s in [step, -step] {
                    let r = ratio(&u, &v, Some(j), s);
                    if r > best * (1.0 + 1e-13) {
                        best = r;
                        c[j] += s;
                        axpy(&mut u, s, &cols_a[j]);
                        axpy(&mut v, s, &cols_b[j]);
                        improved = true;
                        break;
                    }
                }
            }
            // keep ‖c‖ = 1 so the step stays relative
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in c.iter_mut().chain(u.iter_mut()).chain(v.iter_mut()) {
                    *x /= norm;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        (c, best)
    }

    /// The deterministic start set: optional warm start, the basis vectors,
    /// all sign patterns up to global sign when `dim ≤ 4`, then `budget`
    /// Gaussian restarts drawn from `(seed, restart index)`.
    pub fn starts(&self, budget: usize, seed: u64, warm: Option<&[f64]>) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut starts = Vec::new();
        if let Some(w) = warm {
            let mut c = vec![0.0; n];
            for (ci, wi) in c.iter_mut().zip(w) {
                *ci = *wi;
            }
            if c.iter().any(|x| *x != 0.0) {
                starts.push(c);
            }
        }
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            starts.push(e);
        }
        if (2..=4).contains(&n) {
            for mask in 0..(1u32 << (n - 1)) {
                starts.push(
                    (0..n)
                        .map(|j| if j > 0 && mask >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 })
                        .collect(),
                );
            }
        }
        for r in 0..budget {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            starts.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
        starts
    }

    /// Run every start in parallel and return the results sorted by value
    /// (descending, ties broken by start index).
    pub fn maximize(&self, budget: usize, seed: u64, warm: Option<&[f64]>) -> Vec<Candidate> {
        let starts = self.starts(budget, seed, warm);
        let mut out: Vec<Candidate> = starts
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let (coeffs, value) = self.climb(s);
                Candidate { coeffs, value, start: i }
            })
            .collect();
        out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.start.cmp(&b.start)));
        out
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(c: &mut [f64]) {
    let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        c.iter_mut().for_each(|x| *x /= n);
    }
}
