//! Bounds for the embedding `M¹_Λ ⊂ L¹(μ)`: tail-mass necessary checks,
//! ratio-search lower bounds, κ-integral upper bounds, and essential-norm
//! estimates from tail restrictions.
//!
//! Every number produced by search is a lower bound for the quantity it
//! estimates; only κ-integrals with an analytic or lacunary κ are upper
//! bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::measure::{default_eps_grid, Measure};
use crate::poly::MuntzPolynomial;
use crate::search::{Functional, RatioProblem};
use crate::sequence::{ExponentSequence, QuasilacunaryCertificate};

/// Absolute quadrature target for the exact re-evaluation of witnesses.
pub const EXACT_TOL: f64 = 1e-10;
/// Number of top search candidates re-evaluated exactly.
const RESCORE: usize = 5;

/// An increasing function with `|f(t)| ≤ κ(t)‖f‖₁` on the Müntz space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum KappaMajorant {
    /// `C₁ e^{C/(1-t)}`.
    AnalyticNsq { c1: f64, c: f64 },
    /// `sup_n λₙ t^{λₙ} / d₁` from the lacunary norm equivalence. Exponents
    /// past the materialized range are covered by `sup_λ λt^λ = 1/(e ln(1/t))`.
    Lacunary { d1: f64, exponents: Vec<f64> },
    /// Step function through `(t, κ̂(t))`, `+∞` beyond the last grid point.
    NumericTable { table: Vec<(f64, f64)> },
}

impl KappaMajorant {
    pub fn analytic_nsq(c1: f64, c: f64) -> Result<Self> {
        if !(c1 > 0.0 && c > 0.0) {
            return Err(MuntzError::invalid("analytic κ needs C₁ > 0 and C > 0"));
        }
        Ok(KappaMajorant::AnalyticNsq { c1, c })
    }

    pub fn lacunary(d1: f64, seq: &ExponentSequence, n_terms: usize) -> Result<Self> {
        if !(d1 > 0.0) {
            return Err(MuntzError::invalid("d₁ must be positive"));
        }
        Ok(KappaMajorant::Lacunary {
            d1,
            exponents: seq.materialize(n_terms)?,
        })
    }

    /// Sorts by `t` and applies a running max so the table is nondecreasing.
    pub fn numeric(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(MuntzError::invalid("empty κ table"));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut run = 0.0_f64;
        for row in table.iter_mut() {
            run = run.max(row.1);
            row.1 = run;
        }
        Ok(KappaMajorant::NumericTable { table })
    }

    /// Parse `{"form":"analytic-nsq","c1":1,"c":5.3}` and friends, re-running
    /// the constructor checks.
    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str(text)? {
            KappaMajorant::AnalyticNsq { c1, c } => Self::analytic_nsq(c1, c),
            KappaMajorant::Lacunary { d1, exponents } => {
                let n = exponents.len();
                Self::lacunary(d1, &ExponentSequence::explicit(exponents)?, n)
            }
            KappaMajorant::NumericTable { table } => Self::numeric(table),
        }
    }

    /// Whether `∫κ dμ` is an upper bound for `‖ι_μ‖` (numeric tables are
    /// truncation-dependent lower estimates of κ).
    pub fn is_majorant(&self) -> bool {
        !matches!(self, KappaMajorant::NumericTable { .. })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            KappaMajorant::AnalyticNsq { c1, c } => c1 * (c / (1.0 - t)).exp(),
            KappaMajorant::Lacunary { d1, exponents } => {
                if t <= 0.0 {
                    return 0.0;
                }
                if t >= 1.0 {
                    return f64::INFINITY;
                }
                let lt = t.ln();
                let mut best = exponents.iter().map(|&l| l * (l * lt).exp()).fold(0.0, f64::max);
                let peak = -1.0 / lt;
                if exponents.last().is_none_or(|&l| peak > l) {
                    best = best.max(peak / std::f64::consts::E);
                }
                best / d1
            }
            KappaMajorant::NumericTable { table } => table
                .iter()
                .find(|row| row.0 >= t)
                .map_or(f64::INFINITY, |row| row.1),
        }
    }
}

/// A search lower bound for `‖ι_μ‖` with the polynomial attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct RatioBound {
    /// `‖w‖_{L¹(μ)}/‖w‖₁` for the witness, evaluated without discretization.
    pub value: f64,
    pub witness: MuntzPolynomial,
    /// Witness coefficients in the `(λ+1)x^λ` basis, unit norm.
    #[serde(skip)]
    pub basis_coeffs: Vec<f64>,
    pub degree: usize,
    pub budget: usize,
    pub seed: u64,
}

fn witness_from(exponents: &[f64], basis_coeffs: &[f64]) -> Result<MuntzPolynomial> {
    let coeffs: Vec<f64> = exponents.iter().zip(basis_coeffs).map(|(l, c)| c * (l + 1.0)).collect();
    MuntzPolynomial::from_parts(exponents, &coeffs)
}

/// Exact `‖p‖_{L¹(μ)} / ‖p‖₁`.
pub fn exact_ratio(p: &MuntzPolynomial, mu: &Measure) -> Result<f64> {
    let den = p.l1_norm();
    if den <= 0.0 {
        return Ok(0.0);
    }
    Ok(p.l1_mu_norm(mu, EXACT_TOL)? / den)
}

/// Maximize `‖p‖_{L¹(μ)}/‖p‖₁` over polynomials on `λ₁..λ_N`.
pub fn ratio_lower_bound(mu: &Measure, seq: &ExponentSequence, degree: usize, budget: usize, seed: u64) -> Result<RatioBound> {
    ratio_lower_bound_warm(mu, seq, degree, budget, seed, None)
}

/// As [`ratio_lower_bound`], adding `warm` (basis coefficients over a prefix
/// of the exponents) as a start. The result is never below the exact ratio
/// of the warm start itself.
pub fn ratio_lower_bound_warm(
    mu: &Measure,
    seq: &ExponentSequence,
    degree: usize,
    budget: usize,
    seed: u64,
    warm: Option<&[f64]>,
) -> Result<RatioBound> {
    if degree == 0 {
        return Err(MuntzError::invalid("degree must be at least 1"));
    }
    if !(mu.total_mass()? > 0.0) {
        return Err(MuntzError::invalid("measure has zero mass"));
    }
    let exps = seq.materialize(degree)?;
    let (lo, hi) = (exps[0], exps[degree - 1]);
    let num = mu.discretize(lo, hi);
    let den = Measure::lebesgue().discretize(lo, hi);
    let prob = RatioProblem::new(&exps, &num, &den)?;
    let ranked = prob.maximize(budget, seed, warm);

    let mut pool: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = warm {
        let mut c = vec![0.0; degree];
        c.iter_mut().zip(w).for_each(|(ci, wi)| *ci = *wi);
        if c.iter().any(|x| *x != 0.0) {
            pool.push(c);
        }
    }
    for cand in &ranked {
        if pool.len() >= RESCORE + usize::from(warm.is_some()) {
            break;
        }
        if !pool.iter().any(|c| same_direction(c, &cand.coeffs)) {
            pool.push(cand.coeffs.clone());
        }
    }
    let mut best: Option<(f64, MuntzPolynomial, Vec<f64>)> = None;
    for c in pool {
        let p = witness_from(&exps, &c)?;
        let r = exact_ratio(&p, mu)?;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, p, c));
        }
    }
    let (value, witness, basis_coeffs) = best.expect("at least one start");
    Ok(RatioBound {
        value,
        witness,
        basis_coeffs,
        degree,
        budget,
        seed,
    })
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot.abs() / (na * nb)) > 1.0 - 1e-12
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryRow {
    pub n: usize,
    pub lambda: f64,
    /// `λₙ μ(J_{1/λₙ})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessaryCheck {
    pub sup_ratio: f64,
    pub table: Vec<NecessaryRow>,
    /// Last ratio above `10³ ×` the first and nondecreasing over the last
    /// five points: a not-embedding candidate.
    pub diverging: bool,
    /// Index attaining the largest ratio.
    pub witness_n: usize,
}

/// Tabulate `λₙ μ(J_{1/λₙ})`, which stays bounded for embedding measures.
pub fn necessary_check(mu: &Measure, seq: &ExponentSequence, n_max: usize) -> Result<NecessaryCheck> {
    let exps = seq.materialize(n_max)?;
    let mut table = Vec::with_capacity(n_max);
    for (i, &l) in exps.iter().enumerate() {
        let eps = (1.0 / l).min(1.0);
        table.push(NecessaryRow {
            n: i + 1,
            lambda: l,
            ratio: l * mu.tail_mass(eps)?,
        });
    }
    let (witness_n, sup_ratio) = table
        .iter()
        .map(|r| (r.n, r.ratio))
        .fold((1, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let first = table[0].ratio;
    let last = table[table.len() - 1].ratio;
    let tail = &table[table.len().saturating_sub(5)..];
    let monotone = tail.windows(2).all(|w| w[1].ratio >= w[0].ratio);
    let diverging = table.len() >= 5 && last > 1e3 * first && monotone;
    Ok(NecessaryCheck {
        sup_ratio,
        table,
        diverging,
        witness_n,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaIntegral {
    /// `∫κ dμ` when finite.
    pub value: Option<f64>,
    pub kappa: KappaMajorant,
    /// Whether `value` bounds `‖ι_μ‖` from above.
    pub is_upper_bound: bool,
    pub diagnostic: Option<String>,
}

/// `∫κ dμ`; absent (with a diagnostic) when the integral diverges.
pub fn kappa_upper_bound(mu: &Measure, kappa: &KappaMajorant, tol: f64) -> Result<KappaIntegral> {
    let r = mu.integrate(|t| kappa.eval(t), tol);
    let (value, diagnostic) = match r {
        Ok(v) => (Some(v), None),
        Err(MuntzError::Divergent(msg)) => (None, Some(msg)),
        Err(MuntzError::Evaluation { x, value }) if !value.is_nan() => {
            (None, Some(format!("κ is infinite at t = {x} inside the support of μ")))
        }
        Err(e) => return Err(e),
    };
    Ok(KappaIntegral {
        value,
        kappa: kappa.clone(),
        is_upper_bound: kappa.is_majorant(),
        diagnostic,
    })
}

/// `κ̂(t) = max |p(t)|/‖p‖₁` over the degree-`N` span, made nondecreasing.
pub fn kappa_numeric(seq: &ExponentSequence, degree: usize, t_grid: &[f64], budget: usize, seed: u64) -> Result<KappaMajorant> {
    if t_grid.iter().any(|&t| !(0.0..1.0).contains(&t)) {
        return Err(MuntzError::invalid("κ grid must lie in [0, 1)"));
    }
    let exps = seq.materialize(degree)?;
    let den = Measure::lebesgue().discretize(exps[0], exps[degree - 1]);
    let mut table = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t == 0.0 {
            table.push((t, 0.0));
            continue;
        }
        let prob = RatioProblem::new(&exps, &[(t, 1.0)], &den)?;
        let mut best = 0.0_f64;
        for cand in prob.maximize(budget, seed, None).iter().take(RESCORE) {
            let p = witness_from(&exps, &cand.coeffs)?;
            let l1 = p.l1_norm();
            if l1 > 0.0 {
                best = best.max(p.eval(t).abs() / l1);
            }
        }
        table.push((t, best));
    }
    KappaMajorant::numeric(table)
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialRow {
    pub m: usize,
    /// Search lower bound for `‖ι_{μ'_m}‖`.
    pub raw: f64,
    /// Running minimum of `raw`.
    pub value: f64,
    /// Best single normalized monomial `(λ+1)x^λ` on the tail.
    pub monomial: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialNormEstimate {
    /// Last entry of the monotone table.
    pub estimate: f64,
    pub table: Vec<EssentialRow>,
    /// Least-squares intercept of `value` against `1/m` over the last half
    /// of the table (heuristic).
    pub extrapolated: Option<f64>,
    pub slope: Option<f64>,
}

/// `‖ι_μ‖_e = lim_m ‖ι_{μ'_m}‖`, tabulated over `m_list`.
pub fn essential_norm_estimate(
    mu: &Measure,
    seq: &ExponentSequence,
    degree: usize,
    m_list: &[usize],
    budget: usize,
    seed: u64,
) -> Result<EssentialNormEstimate> {
    if m_list.is_empty() {
        return Err(MuntzError::invalid("empty m list"));
    }
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let exps = seq.materialize(degree)?;
    let monomials: Vec<MuntzPolynomial> = exps
        .iter()
        .map(|&l| MuntzPolynomial::normalized_monomial(l))
        .collect::<Result<_>>()?;
    let mut table: Vec<EssentialRow> = Vec::with_capacity(ms.len());
    let mut warm: Option<Vec<f64>> = None;
    let mut run = f64::INFINITY;
    for &m in &ms {
        let tail = mu.tail_restriction(m)?;
        let (raw, monomial) = if tail.total_mass()? > 0.0 {
            let rb = ratio_lower_bound_warm(&tail, seq, degree, budget, seed, warm.as_deref())?;
            warm = Some(rb.basis_coeffs.clone());
            let mut mono = 0.0_f64;
            for p in &monomials {
                mono = mono.max(exact_ratio(p, &tail)?);
            }
            (rb.value, mono)
        } else {
            (0.0, 0.0)
        };
        run = run.min(raw);
        table.push(EssentialRow {
            m,
            raw,
            value: run,
            monomial,
        });
    }
    let half = &table[table.len() / 2..];
    let (extrapolated, slope) = if half.len() >= 2 {
        let pts: Vec<(f64, f64)> = half.iter().map(|r| (1.0 / r.m as f64, r.value)).collect();
        match fit_line(&pts) {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(EssentialNormEstimate {
        estimate: table.last().unwrap().value,
        table,
        extrapolated,
        slope,
    })
}

/// Least squares `y = a + b x`.
fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Some((my - b * mx, b))
}

/// Empirical constants and the resulting quasilacunary embedding bound.
#[derive(Debug, Clone, Serialize)]
pub struct QuasilacunaryBound {
    /// `2 K̂ N d̂ q^{2(N-1)} ‖μ‖_S`.
    pub bound: f64,
    /// Sampled `max ‖f'‖_∞ / ((Σ_block λ) ‖f‖_∞)`.
    pub k_hat: f64,
    /// Sampled `max sup_x |f(x)| / (x^{λ_first} ‖f‖_∞)`.
    pub d_hat: f64,
    pub n_block: usize,
    /// `√(max λ_{n+1}/λₙ)`, so that consecutive ratios are at most `q²`.
    pub q: f64,
    /// `max_k λ_{n_{k+1}} / λ_{n_k+1}` (never above `q^{2(N-1)}`).
    pub block_ratio: f64,
    pub sublinear_norm: f64,
    /// `4 d̂ ‖μ‖_S / λ_min`, the bound in the other case of the
    /// elementary lower bound.
    pub small_derivative_case: f64,
    /// Per-block constant: the larger of the two cases.
    pub per_block: f64,
    /// Sampled `min ‖Σ f_k‖₁ / Σ ‖f_k‖₁` (an estimate from above of the
    /// block-decomposition constant).
    pub d1_hat: f64,
    /// `per_block / d1_hat`.
    pub whole_space: f64,
    pub blocks_sampled: usize,
    pub samples: usize,
    pub note: &'static str,
}

/// Quasilacunary bound with empirically estimated constants over the first
/// `blocks` blocks of the certificate.
pub fn quasilacunary_bound(
    mu: &Measure,
    seq: &ExponentSequence,
    cert: &QuasilacunaryCertificate,
    blocks: usize,
    budget: usize,
    seed: u64,
) -> Result<QuasilacunaryBound> {
    cert.validate(seq)?;
    let idx = &cert.block_indices;
    let blocks = blocks.clamp(1, idx.len() - 1);
    let v = seq.materialize(*idx.last().unwrap())?;
    if v[0] < 1.0 {
        return Err(MuntzError::UnsupportedDomain(
            "exponents below 1: block derivatives are unbounded at 0".into(),
        ));
    }
    let q = v.windows(2).map(|w| w[1] / w[0]).fold(1.0_f64, f64::max).sqrt();
    let n = cert.n_block;
    let block_ratio = idx
        .windows(2)
        .map(|w| v[w[1] - 1] / v[w[0]])
        .fold(0.0_f64, f64::max);
    let mut k_hat = 0.0_f64;
    let mut d_hat = 0.0_f64;
    let mut block_exps: Vec<Vec<f64>> = Vec::with_capacity(blocks);
    for k in 0..blocks {
        // F_k = span{x^{λ_{n_k+1}}, …, x^{λ_{n_{k+1}}}}, 1-based
        let exps = v[idx[k]..idx[k + 1]].to_vec();
        let lsum: f64 = exps.iter().sum();
        let first = exps[0];
        for c in sample_coeffs(exps.len(), budget, seed ^ (k as u64).wrapping_mul(0x9E37_79B9)) {
            let p = MuntzPolynomial::from_parts(&exps, &c)?;
            let (sup, _) = p.sup_norm()?;
            let (dsup, _) = p.derivative().sum.sup_abs()?;
            k_hat = k_hat.max(dsup / (lsum * sup));
            let shifted = crate::poly::PowerSum::new(exps.iter().zip(&c).map(|(&e, &a)| (e - first, a)).collect());
            d_hat = d_hat.max(shifted.sup_abs()?.0 / sup);
        }
        block_exps.push(exps);
    }
    let s_norm = mu.sublinear_profile(&default_eps_grid())?.sublinear_norm_estimate;
    let bound = 2.0 * k_hat * n as f64 * d_hat * q.powi(2 * (n as i32 - 1)) * s_norm;
    let small = 4.0 * d_hat * s_norm / v[idx[0]];
    let per_block = bound.max(small);

    // block-decomposition constant over random sums of block polynomials
    let mut d1_hat = 1.0_f64;
    let all: Vec<f64> = block_exps.concat();
    let samples = sample_coeffs(all.len(), budget, seed.wrapping_add(0xD1));
    for c in &samples {
        let p = MuntzPolynomial::from_parts(&all, c)?;
        let whole = p.l1_norm();
        let mut parts = 0.0;
        let mut off = 0;
        for e in &block_exps {
            parts += MuntzPolynomial::from_parts(e, &c[off..off + e.len()])?.l1_norm();
            off += e.len();
        }
        if parts > 0.0 {
            d1_hat = d1_hat.min(whole / parts);
        }
    }
    Ok(QuasilacunaryBound {
        bound,
        k_hat,
        d_hat,
        n_block: n,
        q,
        block_ratio,
        sublinear_norm: s_norm,
        small_derivative_case: small,
        per_block,
        d1_hat,
        whole_space: per_block / d1_hat,
        blocks_sampled: blocks,
        samples: samples.len(),
        note: "K̂, d̂ and d̂₁ are sampled estimates, not proven constants",
    })
}

/// Basis vectors followed by `budget` Gaussian vectors.
fn sample_coeffs(dim: usize, budget: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..dim)
        .map(|j| (0..dim).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if dim > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..budget {
            out.push((0..dim).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
    }
    out
}

/// Estimate of `d₁` in `d₁ Σ|aₙ|/λₙ ≤ ‖p‖₁` over the first `degree`
/// exponents: the reciprocal of the best search ratio (an estimate from above).
pub fn lacunary_d1_estimate(seq: &ExponentSequence, degree: usize, budget: usize, seed: u64) -> Result<f64> {
    let exps = seq.materialize(degree)?;
    let n = exps.len();
    // coefficient aₙ = cₙ(λₙ+1), so |aₙ|/λₙ = |cₙ|(λₙ+1)/λₙ
    let weights: Vec<f64> = exps.iter().map(|l| (l + 1.0) / l).collect();
    let mut eye = vec![0.0; n * n];
    for j in 0..n {
        eye[j * n + j] = 1.0;
    }
    let num = Functional::from_matrix(weights, eye, n)?;
    let den = Functional::new(&Measure::lebesgue().discretize(exps[0], exps[n - 1]), &exps);
    let prob = RatioProblem::from_functionals(&exps, num, den)?;
    let mut best = 0.0_f64;
    for cand in prob.maximize(budget, seed, None).iter().take(RESCORE) {
        let p = witness_from(&exps, &cand.coeffs)?;
        let l1 = p.l1_norm();
        if l1 > 0.0 {
            let weighted: f64 = p.terms().iter().map(|&(l, a)| a.abs() / l).sum();
            best = best.max(weighted / l1);
        }
    }
    Ok(1.0 / best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    EmbeddingLikely,
    EmbeddingProvedByKappa,
    NotEmbedding,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    /// For `not-embedding`: the index whose tail ratio exploded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_n: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub lower_bound: RatioBound,
    /// Lower bound at half the degree, for the stability check.
    pub lower_bound_half_degree: Option<f64>,
    pub upper_bound: Option<KappaIntegral>,
    pub necessary: NecessaryCheck,
    pub essential_norm: Option<EssentialNormEstimate>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub degree: usize,
    pub budget: usize,
    pub seed: u64,
    /// Indices tested by the necessary check.
    pub n_check: usize,
    pub kappa: Option<KappaMajorant>,
    pub m_list: Option<Vec<usize>>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            degree: 8,
            budget: 32,
            seed: 0,
            n_check: 20,
            kappa: None,
            m_list: None,
        }
    }
}

/// Run all estimators and combine them into a verdict.
pub fn embed_estimate(mu: &Measure, seq: &ExponentSequence, opts: &EstimateOptions) -> Result<EmbeddingReport> {
    let n_check = match seq.len() {
        Some(len) => opts.n_check.min(len),
        None => opts.n_check,
    };
    let necessary = necessary_check(mu, seq, n_check.max(1))?;
    let lower = ratio_lower_bound(mu, seq, opts.degree, opts.budget, opts.seed)?;
    let half = if opts.degree >= 2 {
        Some(ratio_lower_bound(mu, seq, opts.degree / 2, opts.budget, opts.seed)?.value)
    } else {
        None
    };
    let upper = match &opts.kappa {
        Some(k) => Some(kappa_upper_bound(mu, k, 1e-9)?),
        None => None,
    };
    let essential = match &opts.m_list {
        Some(ms) => Some(essential_norm_estimate(mu, seq, opts.degree, ms, opts.budget, opts.seed)?),
        None => None,
    };
    let verdict = if let Some(v) = upper.as_ref().filter(|u| u.is_upper_bound).and_then(|u| u.value) {
        Verdict {
            kind: VerdictKind::EmbeddingProvedByKappa,
            witness_n: None,
            reason: format!("∫κ dμ = {v} is finite"),
        }
    } else if necessary.diverging {
        Verdict {
            kind: VerdictKind::NotEmbedding,
            witness_n: Some(necessary.witness_n),
            reason: format!(
                "λₙ μ(J_(1/λₙ)) grows without bound (reaches {} at n = {})",
                necessary.sup_ratio, necessary.witness_n
            ),
        }
    } else if half.is_none_or(|h| lower.value <= 1.1 * h) {
        Verdict {
            kind: VerdictKind::EmbeddingLikely,
            witness_n: None,
            reason: "tail ratios bounded and the ratio search is stable under doubling the degree".into(),
        }
    } else {
        Verdict {
            kind: VerdictKind::Inconclusive,
            witness_n: None,
            reason: "ratio search still growing with the degree".into(),
        }
    };
    Ok(EmbeddingReport {
        lower_bound: lower,
        lower_bound_half_degree: half,
        upper_bound: upper,
        necessary,
        essential_norm: essential,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{DensityExpr, DensityPiece};

    #[test]
    fn necessary_check_examples() {
        let geo = ExponentSequence::geometric(2.0, 2.0);
        let c = necessary_check(&Measure::lebesgue(), &geo, 20).unwrap();
        assert!((c.sup_ratio - 1.0).abs() < 1e-12 && !c.diverging);

        let sqrt_tail = Measure::zero()
            .with_piece(DensityPiece::new(0.0, 1.0, DensityExpr::PowLaw { c: 0.5, alpha: -0.5 }, true).unwrap())
            .unwrap();
        let c = necessary_check(&sqrt_tail, &geo, 24).unwrap();
        for row in &c.table {
            assert!((row.ratio - row.lambda.sqrt()).abs() < 1e-9 * row.lambda.sqrt());
        }
        assert!(c.diverging);

        let c = necessary_check(&Measure::scaled_dirac(0.9).unwrap(), &ExponentSequence::power(2.0), 10).unwrap();
        assert!((c.sup_ratio - 0.9).abs() < 1e-12 && c.witness_n == 3);
    }

    #[test]
    fn ratio_examples() {
        let seq = ExponentSequence::geometric(1.0, 2.0);
        let r = ratio_lower_bound(&Measure::lebesgue(), &seq, 4, 8, 1).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8);
        let two = Measure::lebesgue().scaled(2.0).unwrap();
        let r = ratio_lower_bound(&two, &seq, 4, 8, 1).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
        let exact = exact_ratio(&r.witness, &two).unwrap();
        assert!((exact - r.value).abs() < 1e-12);

        let t = 0.9;
        let seq = ExponentSequence::explicit(vec![1.0, 5.0, 10.0]).unwrap();
        let r = ratio_lower_bound(&Measure::scaled_dirac(t).unwrap(), &seq, 3, 8, 1).unwrap();
        let oracle = 0.1 * 0.9_f64.powi(10) * 11.0;
        assert!(r.value >= oracle - 1e-12, "{} < {oracle}", r.value);
        assert!(ratio_lower_bound(&Measure::zero(), &seq, 3, 8, 1).is_err());
    }

    #[test]
    fn kappa_examples() {
        let k = KappaMajorant::analytic_nsq(1.0, 5.3).unwrap();
        let v = kappa_upper_bound(&Measure::scaled_dirac(0.5).unwrap(), &k, 1e-9).unwrap();
        assert!((v.value.unwrap() - 0.5 * 10.6_f64.exp()).abs() < 1e-9 * v.value.unwrap());

        let c = 5.3;
        let mu = Measure::from_density(0.0, 1.0, DensityExpr::ExpTail { c: 1.0, s: 2.0 * c }).unwrap();
        let v = kappa_upper_bound(&mu, &k, 1e-12).unwrap().value.unwrap();
        // ∫₀¹ e^{-C/(1-x)} dx = E₂(C) = e^{-C} - C E₁(C), E₁ from its series
        let mut series = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -c / k as f64;
            series += term / k as f64;
        }
        let e1 = -0.577_215_664_901_532_9 - c.ln() - series;
        let e2 = (-c).exp() - c * e1;
        assert!((v - e2).abs() < 1e-9, "{v} vs {e2}");

        let lam = ExponentSequence::explicit(vec![3.0]).unwrap();
        let table = kappa_numeric(&lam, 1, &[0.0, 0.5, 0.9], 2, 0).unwrap();
        assert!((table.eval(0.5) - 4.0 * 0.125).abs() < 1e-9);
        assert!((table.eval(0.9) - 4.0 * 0.729).abs() < 1e-9);
        assert!(table.eval(0.95).is_infinite());
        assert!(!table.is_majorant());

        let mu = Measure::dirac(0.3, 1.0).unwrap().with_atom(0.5, 2.0).unwrap();
        let v = kappa_upper_bound(&mu, &table, 1e-12).unwrap().value.unwrap();
        assert!(v <= table.eval(0.5) * 3.0);
    }

    #[test]
    fn lacunary_kappa_is_monotone() {
        let k = KappaMajorant::lacunary(0.5, &ExponentSequence::geometric(1.0, 2.0), 30).unwrap();
        let mut prev = 0.0;
        for i in 0..100 {
            let t = i as f64 / 100.0;
            let v = k.eval(t);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn compact_support_has_zero_essential_norm() {
        let mu = Measure::from_density(0.0, 0.9, DensityExpr::Const(1.0)).unwrap();
        let seq = ExponentSequence::geometric(1.0, 2.0);
        let e = essential_norm_estimate(&mu, &seq, 4, &[2, 4, 8, 16], 4, 3).unwrap();
        assert_eq!(e.estimate, 0.0);
        assert!(e.table[0].value > 0.0);
    }

    #[test]
    fn quasilacunary_lacunary_case() {
        let seq = ExponentSequence::geometric(1.0, 2.0);
        let cert = crate::sequence::find_quasilacunary_blocks(&seq, 12, 2.0, 1).unwrap().unwrap();
        let leb = quasilacunary_bound(&Measure::lebesgue(), &seq, &cert, 8, 8, 0).unwrap();
        assert!((leb.bound - 2.0 * leb.k_hat * leb.d_hat).abs() < 1e-9);
        let three = quasilacunary_bound(&Measure::lebesgue().scaled(3.0).unwrap(), &seq, &cert, 8, 8, 0).unwrap();
        assert!((three.bound - 3.0 * leb.bound).abs() < 1e-9 * three.bound);
    }
}
