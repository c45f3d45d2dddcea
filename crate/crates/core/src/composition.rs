//! Weighted composition operators `f ↦ ψ · (f ∘ φ)` through their pullback
//! measures `φ*(ψ dm)`.
//!
//! Maps are piecewise polynomial. Each piece is split at the sign changes of
//! its derivative into monotone branches; the pullback density is the sum
//! over branches of `|ψ(φᵢ⁻¹(y))| / |φᵢ'(φᵢ⁻¹(y))|`, and constant branches
//! become atoms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::measure::{DensityExpr, DensityPiece, Measure};
use crate::poly::PowerSum;
use crate::quadrature::{self, QuadOptions};

/// Values within this distance of 1 count as hitting 1.
pub const LEVEL_TOL: f64 = 1e-12;
/// Root-finding tolerance in `x`.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum FnExpr {
    /// `c₀ + c₁ x`.
    Affine { c0: f64, c1: f64 },
    /// `Σ cₖ x^k`.
    Poly(Vec<f64>),
    Const(f64),
}

impl FnExpr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FnExpr::Affine { c0, c1 } => c0 + c1 * x,
            FnExpr::Poly(c) => c.iter().rev().fold(0.0, |acc, c| acc * x + c),
            FnExpr::Const(c) => *c,
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            FnExpr::Affine { c1, .. } => *c1,
            FnExpr::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
            FnExpr::Const(_) => 0.0,
        }
    }

    /// Coefficients of the derivative (ascending powers).
    fn deriv_coeffs(&self) -> Vec<f64> {
        match self {
            FnExpr::Affine { c1, .. } => vec![*c1],
            FnExpr::Poly(c) => c.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect(),
            FnExpr::Const(_) => vec![],
        }
    }
}

/// Interior sign changes of `Σ cₖ x^k` on `(a, b)`.
fn poly_sign_changes(coeffs: &[f64], a: f64, b: f64) -> Vec<f64> {
    PowerSum::new(coeffs.iter().enumerate().map(|(k, &c)| (k as f64, c)).collect())
        .sign_changes()
        .into_iter()
        .filter(|&x| x > a + ROOT_TOL && x < b - ROOT_TOL)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FnPieceDescriptor {
    pub a: f64,
    pub b: f64,
    pub expr: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// `{"pieces":[{"a":0,"b":0.5,"expr":"affine","params":[0,2]}, …]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDescriptor {
    pub pieces: Vec<FnPieceDescriptor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnPiece {
    pub a: f64,
    pub b: f64,
    pub expr: FnExpr,
}

/// A continuous function on `[0, 1]`, polynomial on each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFn {
    pieces: Vec<FnPiece>,
}

impl PiecewiseFn {
    pub fn new(pieces: Vec<FnPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(MuntzError::invalid("no pieces"));
        }
        if pieces[0].a != 0.0 || pieces[pieces.len() - 1].b != 1.0 {
            return Err(MuntzError::invalid("pieces must cover [0, 1]"));
        }
        for p in &pieces {
            if !(p.a < p.b) {
                return Err(MuntzError::invalid(format!("empty piece [{}, {}]", p.a, p.b)));
            }
        }
        for w in pieces.windows(2) {
            if w[0].b != w[1].a {
                return Err(MuntzError::invalid(format!(
                    "pieces do not meet: {} vs {}",
                    w[0].b, w[1].a
                )));
            }
            let (l, r) = (w[0].expr.eval(w[0].b), w[1].expr.eval(w[1].a));
            if (l - r).abs() > 1e-9 {
                return Err(MuntzError::invalid(format!("discontinuity at x = {}: {l} vs {r}", w[0].b)));
            }
        }
        Ok(PiecewiseFn { pieces })
    }

    pub fn single(expr: FnExpr) -> Self {
        PiecewiseFn {
            pieces: vec![FnPiece { a: 0.0, b: 1.0, expr }],
        }
    }

    pub fn identity() -> Self {
        Self::single(FnExpr::Affine { c0: 0.0, c1: 1.0 })
    }

    pub fn constant(c: f64) -> Self {
        Self::single(FnExpr::Const(c))
    }

    /// `1 - |2x - 1|`.
    pub fn tent() -> Self {
        PiecewiseFn {
            pieces: vec![
                FnPiece {
                    a: 0.0,
                    b: 0.5,
                    expr: FnExpr::Affine { c0: 0.0, c1: 2.0 },
                },
                FnPiece {
                    a: 0.5,
                    b: 1.0,
                    expr: FnExpr::Affine { c0: 2.0, c1: -2.0 },
                },
            ],
        }
    }

    pub fn pieces(&self) -> &[FnPiece] {
        &self.pieces
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self
            .pieces
            .iter()
            .find(|p| x <= p.b)
            .unwrap_or(&self.pieces[self.pieces.len() - 1]);
        p.expr.eval(x)
    }

    /// Interior piece boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.a).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: PiecewiseDescriptor = serde_json::from_str(text)?;
        Self::try_from(&d)
    }
}

impl TryFrom<&PiecewiseDescriptor> for PiecewiseFn {
    type Error = MuntzError;

    fn try_from(d: &PiecewiseDescriptor) -> Result<Self> {
        let mut pieces = Vec::with_capacity(d.pieces.len());
        for p in &d.pieces {
            let k = &p.params;
            let expr = match (p.expr.as_str(), k.len()) {
                ("affine", 2) => FnExpr::Affine { c0: k[0], c1: k[1] },
                ("const", 1) => FnExpr::Const(k[0]),
                ("poly", n) if n >= 1 => FnExpr::Poly(k.clone()),
                (e, n) => {
                    return Err(MuntzError::invalid(format!(
                        "unknown expr '{e}' with {n} params (affine: 2, const: 1, poly: ≥ 1)"
                    )))
                }
            };
            pieces.push(FnPiece { a: p.a, b: p.b, expr });
        }
        PiecewiseFn::new(pieces)
    }
}

impl From<&PiecewiseFn> for PiecewiseDescriptor {
    fn from(f: &PiecewiseFn) -> Self {
        PiecewiseDescriptor {
            pieces: f
                .pieces
                .iter()
                .map(|p| {
                    let (expr, params) = match &p.expr {
                        FnExpr::Affine { c0, c1 } => ("affine", vec![*c0, *c1]),
                        FnExpr::Poly(c) => ("poly", c.clone()),
                        FnExpr::Const(c) => ("const", vec![*c]),
                    };
                    FnPieceDescriptor {
                        a: p.a,
                        b: p.b,
                        expr: expr.into(),
                        params,
                    }
                })
                .collect(),
        }
    }
}

/// A maximal sub-interval on which `φ` is strictly monotone or constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub a: f64,
    pub b: f64,
    pub expr: FnExpr,
    /// Index of the originating piece.
    pub piece: usize,
    pub constant: bool,
}

impl Branch {
    fn values(&self) -> (f64, f64) {
        (self.expr.eval(self.a), self.expr.eval(self.b))
    }

    /// `φᵢ⁻¹(y)` by bisection (closed form for affine pieces).
    fn inverse(&self, y: f64) -> f64 {
        if let FnExpr::Affine { c0, c1 } = self.expr {
            return ((y - c0) / c1).clamp(self.a, self.b);
        }
        let (fa, fb) = self.values();
        let increasing = fb > fa;
        let (mut lo, mut hi) = (self.a, self.b);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo < 1e-15 {
                break;
            }
            let below = self.expr.eval(mid) < y;
            if below == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A map `φ: [0, 1] → [0, 1]` split into monotone branches.
#[derive(Debug, Clone)]
pub struct MapSpec {
    f: PiecewiseFn,
    branches: Vec<Branch>,
}

impl MapSpec {
    pub fn new(f: PiecewiseFn) -> Result<Self> {
        let mut branches = Vec::new();
        for (i, p) in f.pieces.iter().enumerate() {
            let dc = p.expr.deriv_coeffs();
            if dc.iter().all(|c| *c == 0.0) {
                branches.push(Branch {
                    a: p.a,
                    b: p.b,
                    expr: FnExpr::Const(p.expr.eval(p.a)),
                    piece: i,
                    constant: true,
                });
                continue;
            }
            let splits = poly_sign_changes(&dc, p.a, p.b);
            let mut nodes = vec![p.a];
            nodes.extend(&splits);
            nodes.push(p.b);
            // φ' may touch zero without changing sign: check its extrema
            let scale = nodes.iter().map(|&x| p.expr.deriv(x).abs()).fold(0.0, f64::max).max(1.0);
            let ddc: Vec<f64> = dc.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
            for x in poly_sign_changes(&ddc, p.a, p.b) {
                if p.expr.deriv(x).abs() < 1e-12 * scale && !splits.iter().any(|s| (s - x).abs() < 1e-8) {
                    return Err(MuntzError::UnsupportedDomain(format!(
                        "φ' vanishes at x = {x} inside a monotone piece"
                    )));
                }
            }
            for w in nodes.windows(2) {
                branches.push(Branch {
                    a: w[0],
                    b: w[1],
                    expr: p.expr.clone(),
                    piece: i,
                    constant: false,
                });
            }
        }
        for b in &branches {
            for v in [b.values().0, b.values().1] {
                if !(-LEVEL_TOL..=1.0 + LEVEL_TOL).contains(&v) {
                    return Err(MuntzError::invalid(format!(
                        "φ takes the value {v} on [{}, {}], outside [0, 1]",
                        b.a, b.b
                    )));
                }
            }
        }
        Ok(MapSpec { f, branches })
    }

    pub fn function(&self) -> &PiecewiseFn {
        &self.f
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    /// `max φ` (attained at a branch endpoint) and a maximizer.
    pub fn max(&self) -> (f64, f64) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for b in &self.branches {
            for x in [b.a, b.b] {
                let v = b.expr.eval(x);
                if v > best.0 {
                    best = (v, x);
                }
            }
        }
        best
    }

    /// Points with `φ(x) = 1` (to `LEVEL_TOL`) and their one-sided slopes.
    /// `None` if `φ ≡ 1` on an interval.
    fn level_one_points(&self) -> Option<Vec<AlphaPoint>> {
        let mut pts: Vec<AlphaPoint> = Vec::new();
        for (i, b) in self.branches.iter().enumerate() {
            if b.constant {
                if (b.expr.eval(b.a) - 1.0).abs() <= LEVEL_TOL {
                    return None;
                }
                continue;
            }
            for (x, left) in [(b.a, false), (b.b, true)] {
                if (b.expr.eval(x) - 1.0).abs() > LEVEL_TOL {
                    continue;
                }
                let slope = b.expr.deriv(x);
                let pos = match pts.iter().position(|p| (p.x - x).abs() < 1e-12) {
                    Some(k) => k,
                    None => {
                        pts.push(AlphaPoint {
                            x,
                            left_derivative: None,
                            right_derivative: None,
                            branches: Vec::new(),
                        });
                        pts.len() - 1
                    }
                };
                let p = &mut pts[pos];
                p.branches.push(i);
                if left {
                    p.left_derivative = Some(slope);
                } else {
                    p.right_derivative = Some(slope);
                }
            }
        }
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        Some(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub x: f64,
    /// `φ'₋(x)`, absent at `x = 0`.
    pub left_derivative: Option<f64>,
    /// `φ'₊(x)`, absent at `x = 1`.
    pub right_derivative: Option<f64>,
    #[serde(skip)]
    branches: Vec<usize>,
}

impl AlphaPoint {
    /// `1/φ'₋ + 1/|φ'₊|`, keeping only the sides that exist.
    pub fn l_factor(&self) -> f64 {
        self.left_derivative.map_or(0.0, |d| 1.0 / d) + self.right_derivative.map_or(0.0, |d| 1.0 / d.abs())
    }
}

/// Witness for condition (α).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCertificate {
    pub points: Vec<AlphaPoint>,
    pub epsilon: f64,
    pub alpha: f64,
}

/// Certify condition (α): finitely many preimages of 1, one-sided slopes
/// of the right signs, and `φ ≤ α < 1` away from them. `ε` is the largest
/// value on the ladder `1/4, 1/8, …` that works; `grid_size` samples
/// re-check `α` independently of the branch-endpoint maximization.
pub fn check_alpha(phi: &MapSpec, grid_size: usize) -> Option<AlphaCertificate> {
    let pts = phi.level_one_points()?;
    for p in &pts {
        let left_ok = p.x == 0.0 || p.left_derivative.is_some_and(|d| d > 0.0);
        let right_ok = p.x == 1.0 || p.right_derivative.is_some_and(|d| d < 0.0);
        if !(left_ok && right_ok) {
            return None;
        }
    }
    let pieces = phi.f.pieces();
    let mut eps = 0.25;
    while eps > 1e-12 {
        // (b): each one-sided neighbourhood lies inside one C¹ piece
        let c1_ok = pts.iter().all(|p| {
            let lo = (p.x - eps).max(0.0);
            let hi = (p.x + eps).min(1.0);
            let inside = |a: f64, b: f64| a >= b || pieces.iter().any(|q| q.a <= a && b <= q.b);
            inside(lo, p.x) && inside(p.x, hi)
        });
        if c1_ok {
            let excluded = |x: f64| pts.iter().any(|p| (x - p.x).abs() < eps);
            let mut alpha = f64::NEG_INFINITY;
            for b in &phi.branches {
                // the complement of the excluded neighbourhoods inside b
                let mut cuts = vec![b.a, b.b];
                for p in &pts {
                    cuts.extend([p.x - eps, p.x + eps].iter().filter(|&&c| c > b.a && c < b.b));
                }
                cuts.sort_by(f64::total_cmp);
                for w in cuts.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    if !excluded(mid) {
                        alpha = alpha.max(b.expr.eval(w[0]).max(b.expr.eval(w[1])));
                    }
                }
            }
            for i in 0..=grid_size {
                let x = i as f64 / grid_size.max(1) as f64;
                if !excluded(x) {
                    alpha = alpha.max(phi.eval(x));
                }
            }
            if alpha < 1.0 - LEVEL_TOL {
                return Some(AlphaCertificate {
                    points: pts,
                    epsilon: eps,
                    alpha: alpha.max(0.0),
                });
            }
        }
        eps *= 0.5;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Boundedness {
    Bounded { reason: String },
    Unbounded { witness: f64, reason: String },
    Inconclusive { reason: String },
}

impl Boundedness {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Boundedness::Bounded { .. })
    }
}

/// Decide boundedness of `C_φ` on the Müntz space.
pub fn boundedness_test(phi: &MapSpec) -> Boundedness {
    let (max, _) = phi.max();
    if max < 1.0 - 1e-10 {
        return Boundedness::Bounded {
            reason: format!("max φ = {max} < 1, so the pullback has compact support in [0, 1)"),
        };
    }
    let Some(pts) = phi.level_one_points() else {
        return Boundedness::Unbounded {
            witness: phi.max().1,
            reason: "φ ≡ 1 on an interval: the pullback has an atom at 1".into(),
        };
    };
    if pts.is_empty() {
        return Boundedness::Inconclusive {
            reason: format!("max φ = {max} is within 1e-10 of 1 but not equal to it"),
        };
    }
    for p in &pts {
        let flat = [p.left_derivative, p.right_derivative]
            .iter()
            .flatten()
            .any(|d| d.abs() < ROOT_TOL);
        if flat {
            return Boundedness::Unbounded {
                witness: p.x,
                reason: format!("φ({}) = 1 with φ' = 0 there", p.x),
            };
        }
    }
    if pts.iter().all(|p| p.x == 0.0 || p.x == 1.0) {
        return Boundedness::Bounded {
            reason: "φ = 1 only at endpoints, with nonzero slope".into(),
        };
    }
    match check_alpha(phi, 1000) {
        Some(_) => Boundedness::Bounded {
            reason: "φ is not C¹ at its interior maxima but satisfies condition (α)".into(),
        },
        None => Boundedness::Inconclusive {
            reason: "interior preimage of 1 with nonzero one-sided slopes, condition (α) fails".into(),
        },
    }
}

/// `Σ |ψ(xᵢ)| L(xᵢ)` over the certificate points.
pub fn essential_norm_formula(phi: &MapSpec, psi: &PiecewiseFn, cert: &AlphaCertificate) -> Result<f64> {
    let own = check_alpha(phi, 0).ok_or_else(|| MuntzError::invalid("φ does not satisfy condition (α)"))?;
    if own.points.len() != cert.points.len()
        || own
            .points
            .iter()
            .zip(&cert.points)
            .any(|(a, b)| (a.x - b.x).abs() > 1e-9)
    {
        return Err(MuntzError::invalid("certificate does not match φ"));
    }
    Ok(cert.points.iter().fold(0.0, |acc, p| acc + psi.eval(p.x).abs() * p.l_factor()))
}

/// The measure `φ*(|ψ| dm)`: `∫ f d(φ*(ψ dm)) = ∫₀¹ |ψ| (f∘φ) dx`.
pub fn pullback(phi: &MapSpec, psi: &PiecewiseFn) -> Result<Measure> {
    let mut mu = Measure::zero();
    let psi = Arc::new(psi.clone());
    for b in &phi.branches {
        if b.constant {
            let level = b.expr.eval(b.a).clamp(0.0, 1.0);
            if (level - 1.0).abs() <= LEVEL_TOL {
                return Err(MuntzError::UnsupportedDomain(format!(
                    "φ ≡ 1 on [{}, {}]: the pullback would charge the point 1",
                    b.a, b.b
                )));
            }
            let ps = psi.clone();
            let w = quadrature::integrate(|x| ps.eval(x).abs(), b.a, b.b, &QuadOptions::with_tol(1e-14))?.value;
            if w > 0.0 {
                mu = mu.with_atom(level, w)?;
            }
            continue;
        }
        let (fa, fb) = b.values();
        let (lo, hi) = (fa.min(fb).clamp(0.0, 1.0), fa.max(fb).clamp(0.0, 1.0));
        if hi - lo < 1e-15 {
            continue;
        }
        let flat = b.expr.deriv(b.a).abs() < ROOT_TOL || b.expr.deriv(b.b).abs() < ROOT_TOL;
        let branch = b.clone();
        let ps = psi.clone();
        let density = move |y: f64| {
            let x = branch.inverse(y);
            let d = branch.expr.deriv(x).abs();
            if d == 0.0 {
                0.0
            } else {
                ps.eval(x).abs() / d
            }
        };
        let expr = DensityExpr::Custom {
            label: format!("pullback[{}, {}]", b.a, b.b),
            f: Arc::new(density),
        };
        mu = mu.with_piece(DensityPiece::new(lo, hi, expr, flat)?)?;
    }
    Ok(mu)
}

/// `∫₀¹ |ψ(x)| f(φ(x)) dx` by direct quadrature over the branches.
pub fn direct_composition_integral<F: Fn(f64) -> f64>(phi: &MapSpec, psi: &PiecewiseFn, f: F, tol: f64) -> Result<f64> {
    let mut total = 0.0;
    let n = phi.branches.len() as f64;
    for b in &phi.branches {
        let r = quadrature::integrate(
            |x| psi.eval(x).abs() * f(b.expr.eval(x).clamp(0.0, 1.0)),
            b.a,
            b.b,
            &QuadOptions::with_tol(tol / n).singular_left(),
        )?;
        total += r.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    pub bounded: bool,
    pub boundedness: Boundedness,
    pub alpha_certificate: Option<AlphaCertificate>,
    /// `Σ |ψ(xᵢ)| L(xᵢ)` when condition (α) holds.
    pub essential_norm: Option<f64>,
}

pub fn analyze_composition(phi: &MapSpec, psi: &PiecewiseFn) -> Result<CompositionReport> {
    let boundedness = boundedness_test(phi);
    let cert = check_alpha(phi, 1000);
    let essential_norm = match &cert {
        Some(c) => Some(essential_norm_formula(phi, psi, c)?),
        None => None,
    };
    Ok(CompositionReport {
        bounded: boundedness.is_bounded(),
        boundedness,
        alpha_certificate: cert,
        essential_norm,
    })
}
