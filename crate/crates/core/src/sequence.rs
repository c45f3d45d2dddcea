//! Exponent sequences `Λ = (λₙ)` and their lacunarity structure.

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};

/// Ratios `λ_{n+1}/λₙ` at or above `1 + LACUNARY_TOL` count as `> 1`.
pub const LACUNARY_TOL: f64 = 1e-9;

/// Hard cap on how many exponents a single call may materialize.
pub const MATERIALIZE_LIMIT: usize = 50_000_000;

/// A block of consecutive integers `start, start+1, …, start+len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: u64,
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupedBlocks {
    /// Explicit finite list of blocks.
    Listed { blocks: Vec<Block> },
    /// Block `k ≥ 1` starts at `k^start_power` and has length `k^len_power`.
    Parametric { start_power: u32, len_power: u32 },
}

/// An increasing sequence of positive exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExponentSequence {
    Explicit { values: Vec<f64> },
    Geometric { lambda1: f64, q: f64 },
    /// `λₙ = n^s`.
    Power { s: f64 },
    Grouped(GroupedBlocks),
}

/// Enclosure of `Σ 1/λₙ`. `upper` is `+∞` when no tail bound is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ExponentSequence {
    pub fn power(s: f64) -> Self {
        ExponentSequence::Power { s }
    }

    pub fn geometric(lambda1: f64, q: f64) -> Self {
        ExponentSequence::Geometric { lambda1, q }
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let seq = ExponentSequence::Explicit { values };
        seq.validate()?;
        Ok(seq)
    }

    /// Blocks `k^a .. k^a + k^b` for `k ≥ 1`.
    pub fn grouped_powers(start_power: u32, len_power: u32) -> Self {
        ExponentSequence::Grouped(GroupedBlocks::Parametric {
            start_power,
            len_power,
        })
    }

    /// Parse and validate a JSON sequence, e.g. `{"kind":"geometric","lambda1":1,"q":2}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let seq: ExponentSequence = serde_json::from_str(text)?;
        seq.validate()?;
        Ok(seq)
    }

    /// Short forms: `nsq`, `power:s`, `geometric:λ₁,q`, `grouped:a,b`,
    /// `explicit:λ₁,λ₂,…`.
    pub fn from_shorthand(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .filter(|a| !a.trim().is_empty())
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| MuntzError::invalid(format!("bad number '{a}' in '{s}'")))
                })
                .collect()
        };
        let seq = match (kind, nums()?.as_slice()) {
            ("nsq", []) => ExponentSequence::power(2.0),
            ("power", [s]) => ExponentSequence::power(*s),
            ("geometric", [l, q]) => ExponentSequence::geometric(*l, *q),
            ("grouped", [a, b]) if a.fract() == 0.0 && b.fract() == 0.0 && *a >= 0.0 && *b >= 0.0 => {
                ExponentSequence::grouped_powers(*a as u32, *b as u32)
            }
            ("explicit", v) if !v.is_empty() => ExponentSequence::Explicit { values: v.to_vec() },
            _ => return Err(MuntzError::invalid(format!("unrecognized sequence '{s}'"))),
        };
        seq.validate()?;
        Ok(seq)
    }

    /// Check the parameters and, for finite kinds, strict increase.
    pub fn validate(&self) -> Result<()> {
        match self {
            ExponentSequence::Explicit { values } => check_increasing(values),
            ExponentSequence::Geometric { lambda1, q } => {
                if !(*lambda1 > 0.0 && lambda1.is_finite()) || !(*q > 1.0 && q.is_finite()) {
                    return Err(MuntzError::invalid(format!(
                        "geometric sequence needs lambda1 > 0 and q > 1 (got {lambda1}, {q})"
                    )));
                }
                Ok(())
            }
            ExponentSequence::Power { s } => {
                if !(*s > 0.0 && s.is_finite()) {
                    return Err(MuntzError::invalid(format!("power sequence needs s > 0 (got {s})")));
                }
                Ok(())
            }
            ExponentSequence::Grouped(GroupedBlocks::Listed { blocks }) => {
                let mut prev_end: Option<u64> = None;
                for b in blocks {
                    if b.start == 0 {
                        return Err(MuntzError::invalid("block start must be positive"));
                    }
                    if let Some(end) = prev_end {
                        if b.start <= end {
                            return Err(MuntzError::invalid(format!(
                                "block starting at {} overlaps the previous block",
                                b.start
                            )));
                        }
                    }
                    prev_end = Some(b.start + b.len);
                }
                Ok(())
            }
            ExponentSequence::Grouped(GroupedBlocks::Parametric {
                start_power,
                len_power,
            }) => {
                // k^a + k^b < (k+1)^a for all k ≥ 1 needs a > b, and k = 1 needs a ≥ 2
                if *start_power < 2 || len_power >= start_power {
                    return Err(MuntzError::invalid(format!(
                        "grouped blocks need start_power >= 2 and len_power < start_power (got {start_power}, {len_power})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// How many leading exponents are finite as `f64` (`None`: no limit
    /// short of the materialization cap).
    pub fn representable_len(&self) -> Option<usize> {
        match self {
            ExponentSequence::Geometric { lambda1, q } => {
                Some(((f64::MAX / lambda1).ln() / q.ln()).floor() as usize)
            }
            _ => self.len(),
        }
    }

    /// Number of exponents, when finite.
    pub fn len(&self) -> Option<usize> {
        match self {
            ExponentSequence::Explicit { values } => Some(values.len()),
            ExponentSequence::Grouped(GroupedBlocks::Listed { blocks }) => {
                Some(blocks.iter().map(|b| b.len as usize + 1).sum())
            }
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    /// The first `n` exponents, checked positive and strictly increasing.
    pub fn materialize(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if n > MATERIALIZE_LIMIT {
            return Err(MuntzError::Resource(format!(
                "{n} exponents requested, limit is {MATERIALIZE_LIMIT}"
            )));
        }
        if let Some(len) = self.len() {
            if n > len {
                return Err(MuntzError::invalid(format!(
                    "sequence has only {len} exponents, {n} requested"
                )));
            }
        }
        let values: Vec<f64> = match self {
            ExponentSequence::Explicit { values } => values[..n].to_vec(),
            ExponentSequence::Geometric { lambda1, q } => {
                let v: Vec<f64> = (0..n).map(|i| lambda1 * q.powi(i as i32)).collect();
                if let Some(i) = v.iter().position(|x| x.is_infinite()) {
                    return Err(MuntzError::Resource(format!(
                        "exponent #{} of the geometric sequence overflows f64",
                        i + 1
                    )));
                }
                v
            }
            ExponentSequence::Power { s } => (1..=n).map(|k| (k as f64).powf(*s)).collect(),
            ExponentSequence::Grouped(g) => {
                let mut out = Vec::with_capacity(n);
                let mut k = 1u64;
                while out.len() < n {
                    let (start, len) = match g {
                        GroupedBlocks::Listed { blocks } => {
                            let b = blocks[(k - 1) as usize];
                            (b.start, b.len)
                        }
                        GroupedBlocks::Parametric {
                            start_power,
                            len_power,
                        } => (
                            k.checked_pow(*start_power).ok_or_else(|| overflow(k))?,
                            k.checked_pow(*len_power).ok_or_else(|| overflow(k))?,
                        ),
                    };
                    for j in 0..=len {
                        if out.len() == n {
                            break;
                        }
                        out.push((start + j) as f64);
                    }
                    k += 1;
                }
                out
            }
        };
        check_increasing(&values)?;
        Ok(values)
    }

    /// Exponents of the first `k_max` blocks of a grouped sequence, with the
    /// 1-based index range each block occupies.
    pub fn block_ranges(&self, k_max: usize) -> Result<Vec<(usize, usize)>> {
        let ExponentSequence::Grouped(g) = self else {
            return Err(MuntzError::invalid("block_ranges needs a grouped sequence"));
        };
        let mut out = Vec::with_capacity(k_max);
        let mut first = 1usize;
        for k in 1..=k_max as u64 {
            let len = match g {
                GroupedBlocks::Listed { blocks } => {
                    blocks
                        .get((k - 1) as usize)
                        .ok_or_else(|| MuntzError::invalid(format!("only {} blocks", blocks.len())))?
                        .len
                }
                GroupedBlocks::Parametric { len_power, .. } => {
                    k.checked_pow(*len_power).ok_or_else(|| overflow(k))?
                }
            };
            let last = first + len as usize;
            out.push((first, last));
            first = last + 1;
        }
        Ok(out)
    }

    /// Closed-form bound for `Σ_{n > n_terms} 1/λₙ` (`+∞` if unknown).
    pub fn tail_bound(&self, n_terms: usize) -> f64 {
        let nf = n_terms as f64;
        match self {
            ExponentSequence::Explicit { .. } | ExponentSequence::Grouped(GroupedBlocks::Listed { .. }) => {
                f64::INFINITY
            }
            ExponentSequence::Geometric { lambda1, q } => 1.0 / (lambda1 * q.powf(nf)) * q / (q - 1.0),
            ExponentSequence::Power { s } => {
                if *s <= 1.0 {
                    f64::INFINITY
                } else {
                    nf.powf(1.0 - s) / (s - 1.0)
                }
            }
            ExponentSequence::Grouped(GroupedBlocks::Parametric {
                start_power,
                len_power,
            }) => {
                let (a, b) = (*start_power as f64, *len_power as f64);
                if a <= b + 1.0 {
                    return f64::INFINITY;
                }
                // locate the block holding index n_terms
                let mut used = 0u64;
                let mut k = 0u64;
                let mut rest_in_block = 0u64;
                let mut next_value = 0.0;
                while used < n_terms as u64 {
                    k += 1;
                    let start = (k as f64).powf(a);
                    let count = (k as f64).powf(b) as u64 + 1;
                    if used + count >= n_terms as u64 {
                        let taken = n_terms as u64 - used;
                        rest_in_block = count - taken;
                        next_value = start + taken as f64;
                    }
                    used += count;
                }
                let kf = k.max(1) as f64;
                let partial = if rest_in_block > 0 {
                    rest_in_block as f64 / next_value
                } else {
                    0.0
                };
                let blocks_after = if k == 0 {
                    // nothing taken yet: all blocks k ≥ 1, first block is 1..2
                    1.0 + 0.5 + kf.powf(b - a + 1.0) / (a - b - 1.0) + kf.powf(1.0 - a) / (a - 1.0)
                } else {
                    kf.powf(b - a + 1.0) / (a - b - 1.0) + kf.powf(1.0 - a) / (a - 1.0)
                };
                partial + blocks_after
            }
        }
    }
}

fn overflow(k: u64) -> MuntzError {
    MuntzError::Resource(format!("block {k} start exceeds u64"))
}

fn check_increasing(values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(MuntzError::invalid(format!("exponent #{} = {v} is not positive", i + 1)));
        }
        if i > 0 && !(*v > values[i - 1]) {
            return Err(MuntzError::invalid(format!(
                "exponents not strictly increasing at #{}: {} then {v}",
                i + 1,
                values[i - 1]
            )));
        }
    }
    Ok(())
}

/// Enclosure of the Müntz sum `Σ 1/λₙ`: partial sum of `n_terms` terms plus
/// the closed-form tail bound.
pub fn muntz_sum_bound(seq: &ExponentSequence, n_terms: usize) -> Result<SumInterval> {
    if n_terms == 0 {
        return Err(MuntzError::invalid("n_terms must be positive"));
    }
    let (partial, err) = match seq {
        ExponentSequence::Grouped(GroupedBlocks::Parametric {
            start_power,
            len_power,
        }) => {
            seq.validate()?;
            grouped_partial_sum(*start_power, *len_power, n_terms as u64)?
        }
        ExponentSequence::Geometric { lambda1, q } => {
            seq.validate()?;
            // (1/λ₁) (1 - q⁻ⁿ) / (1 - q⁻¹)
            let v = -(-(n_terms as f64) * q.ln()).exp_m1() / (-(-q.ln()).exp_m1()) / lambda1;
            (v, 8.0 * f64::EPSILON * v)
        }
        _ => {
            let values = seq.materialize(n_terms)?;
            (compensated_sum(values.iter().rev().map(|v| 1.0 / v)), 0.0)
        }
    };
    let tail = seq.tail_bound(n_terms);
    let upper = if tail.is_finite() {
        (partial + err + tail).next_up().next_up()
    } else {
        f64::INFINITY
    };
    Ok(SumInterval {
        lower: (partial - err).next_down(),
        upper,
    })
}

fn compensated_sum<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `Σ_{j=m}^{n} 1/j` with an error bound; long runs use the asymptotic
/// expansion of the harmonic numbers.
fn harmonic_range(m: u64, n: u64) -> (f64, f64) {
    if n < m {
        return (0.0, 0.0);
    }
    if n - m < 20_000 || m < 1_000 {
        let v = compensated_sum((m..=n).rev().map(|j| 1.0 / j as f64));
        return (v, 1e-15 * v);
    }
    // H(n) - H(m-1), H(x) = ln x + γ + 1/(2x) - 1/(12x²) + 1/(120x⁴) - …
    let (a, b) = (m as f64 - 1.0, n as f64);
    let ln = ((b - a) / a).ln_1p();
    let v = ln + 0.5 / b - 0.5 / a - 1.0 / (12.0 * b * b) + 1.0 / (12.0 * a * a) + 1.0 / (120.0 * b.powi(4))
        - 1.0 / (120.0 * a.powi(4));
    let trunc = 2.0 / (252.0 * a.powi(6));
    (v, trunc + 4.0 * f64::EPSILON * v.abs())
}

fn grouped_partial_sum(start_power: u32, len_power: u32, n_terms: u64) -> Result<(f64, f64)> {
    let mut parts = Vec::new();
    let mut err = 0.0;
    let mut used = 0u64;
    let mut k = 1u64;
    while used < n_terms {
        let start = k.checked_pow(start_power).ok_or_else(|| overflow(k))?;
        let len = k.checked_pow(len_power).ok_or_else(|| overflow(k))?;
        let take = (len + 1).min(n_terms - used);
        let (v, e) = harmonic_range(start, start + take - 1);
        parts.push(v);
        err += e;
        used += take;
        k += 1;
    }
    Ok((compensated_sum(parts.into_iter().rev()), err))
}

/// `inf λ_{n+1}/λₙ` over `n < n_max`, when it is at least `1 + LACUNARY_TOL`.
///
/// Power and grouped families have consecutive ratios tending to 1, so they
/// are never reported lacunary regardless of the window.
pub fn check_lacunary(seq: &ExponentSequence, n_max: usize) -> Result<Option<f64>> {
    let v = seq.materialize(n_max)?;
    if v.len() < 2 {
        return Err(MuntzError::invalid("need at least two exponents"));
    }
    match seq {
        ExponentSequence::Geometric { q, .. } => return Ok(Some(*q)),
        ExponentSequence::Power { .. } | ExponentSequence::Grouped(GroupedBlocks::Parametric { .. }) => {
            return Ok(None)
        }
        _ => {}
    }
    let q = v.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    Ok((q >= 1.0 + LACUNARY_TOL).then_some(q))
}

/// Witness that `λ_{n_{k+1}}/λ_{n_k} ≥ q` with block sizes at most `n_block`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasilacunaryCertificate {
    /// 1-based indices `n₁ < n₂ < …`.
    pub block_indices: Vec<usize>,
    pub q: f64,
    /// `max_k (n_{k+1} - n_k)`.
    pub n_block: usize,
}

impl QuasilacunaryCertificate {
    /// Re-check both defining inequalities against `seq`.
    pub fn validate(&self, seq: &ExponentSequence) -> Result<()> {
        if self.block_indices.len() < 2 {
            return Err(MuntzError::invalid("certificate needs at least two block indices"));
        }
        if !(self.q > 1.0) {
            return Err(MuntzError::invalid("certificate ratio must exceed 1"));
        }
        if self.block_indices[0] == 0 {
            return Err(MuntzError::invalid("block indices are 1-based"));
        }
        let last = *self.block_indices.last().unwrap();
        let v = seq.materialize(last)?;
        for w in self.block_indices.windows(2) {
            if w[1] <= w[0] {
                return Err(MuntzError::invalid("block indices must increase"));
            }
            if w[1] - w[0] > self.n_block {
                return Err(MuntzError::invalid(format!(
                    "gap {} exceeds block size bound {}",
                    w[1] - w[0],
                    self.n_block
                )));
            }
            let r = v[w[1] - 1] / v[w[0] - 1];
            if r < self.q * (1.0 - 1e-12) {
                return Err(MuntzError::invalid(format!(
                    "ratio {r} at indices ({}, {}) is below q = {}",
                    w[0], w[1], self.q
                )));
            }
        }
        Ok(())
    }
}

/// Greedy-minimal block scan from `n₁ = 1`: each next index is the smallest
/// one whose ratio to the current block start reaches `q_min`. Returns `None`
/// when some gap exceeds `n_block_max` within the first `n_max` exponents;
/// that means "not found at these parameters" only.
pub fn find_quasilacunary_blocks(
    seq: &ExponentSequence,
    n_max: usize,
    q_min: f64,
    n_block_max: usize,
) -> Result<Option<QuasilacunaryCertificate>> {
    if !(q_min > 1.0) {
        return Err(MuntzError::invalid(format!("q_min = {q_min} must exceed 1")));
    }
    if n_block_max == 0 {
        return Err(MuntzError::invalid("block size bound must be positive"));
    }
    let v = seq.materialize(n_max)?;
    let mut idx = vec![1usize];
    let mut cur = 0usize; // 0-based
    let mut q = f64::INFINITY;
    let mut gap_max = 0usize;
    loop {
        let base = v[cur];
        let next = (cur + 1..v.len()).find(|&j| v[j] / base >= q_min);
        match next {
            Some(j) => {
                let gap = j - cur;
                if gap > n_block_max {
                    return Ok(None);
                }
                gap_max = gap_max.max(gap);
                q = q.min(v[j] / base);
                idx.push(j + 1);
                cur = j;
            }
            None => {
                if v.len() - 1 - cur >= n_block_max {
                    return Ok(None);
                }
                break;
            }
        }
    }
    if idx.len() < 2 {
        return Ok(None);
    }
    Ok(Some(QuasilacunaryCertificate {
        block_indices: idx,
        q,
        n_block: gap_max,
    }))
}

/// `(min, max)` of the block-boundary ratios `λ_{n_{k+1}}/λ_{n_k}`.
pub fn ratio_bounds(seq: &ExponentSequence, cert: &QuasilacunaryCertificate) -> Result<(f64, f64)> {
    cert.validate(seq)?;
    let v = seq.materialize(*cert.block_indices.last().unwrap())?;
    let ratios = cert.block_indices.windows(2).map(|w| v[w[1] - 1] / v[w[0] - 1]);
    let (lo, hi) = ratios.fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    Ok((lo, hi))
}

/// Insert points `λₙ q², λₙ q⁴, …` between consecutive exponents until every
/// consecutive ratio is at most `q²`. The original exponents are kept.
pub fn densify(seq: &ExponentSequence, q: f64, n_max: usize) -> Result<ExponentSequence> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(MuntzError::invalid(format!("q = {q} must exceed 1")));
    }
    let v = seq.materialize(n_max)?;
    let step = q * q;
    let mut out = Vec::with_capacity(v.len());
    for (i, &x) in v.iter().enumerate() {
        out.push(x);
        if let Some(&next) = v.get(i + 1) {
            let mut cur = x;
            while next / cur > step {
                cur *= step;
                if cur >= next {
                    break;
                }
                out.push(cur);
            }
        }
    }
    ExponentSequence::explicit(out)
}
