//! Finite positive Borel measures on `[0, 1]` with no mass at 1: finitely
//! many atoms, a density given piecewise, and finite mixtures of measures.
//!
//! Density pieces add up where they overlap, so a pullback measure can carry
//! one piece per monotone branch of the map.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::quadrature::{self, QuadOptions};

/// Closed-form density expressions. `Custom` carries an arbitrary evaluator
/// (pullback densities) and is integrated by quadrature only.
#[derive(Clone)]
pub enum DensityExpr {
    Const(f64),
    /// `Σ cₖ x^k`.
    Poly(Vec<f64>),
    /// `c (1 - x)^α`, `α > -1`.
    PowLaw { c: f64, alpha: f64 },
    /// `c x^α`, `α > -1`.
    XPow { c: f64, alpha: f64 },
    /// `c exp(-s / (1 - x))`.
    ExpTail { c: f64, s: f64 },
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for DensityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityExpr::Const(c) => write!(f, "Const({c})"),
            DensityExpr::Poly(c) => write!(f, "Poly({c:?})"),
            DensityExpr::PowLaw { c, alpha } => write!(f, "PowLaw({c}, {alpha})"),
            DensityExpr::XPow { c, alpha } => write!(f, "XPow({c}, {alpha})"),
            DensityExpr::ExpTail { c, s } => write!(f, "ExpTail({c}, {s})"),
            DensityExpr::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl DensityExpr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensityExpr::Const(c) => *c,
            DensityExpr::Poly(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            DensityExpr::PowLaw { c, alpha } => c * (1.0 - x).powf(*alpha),
            DensityExpr::XPow { c, alpha } => c * x.powf(*alpha),
            DensityExpr::ExpTail { c, s } => {
                let d = 1.0 - x;
                if d <= 0.0 {
                    0.0
                } else {
                    c * (-s / d).exp()
                }
            }
            DensityExpr::Custom { f, .. } => f(x),
        }
    }

    /// `∫_a^b` in closed form, when known.
    pub fn integral(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            DensityExpr::Const(c) => Some(c * (b - a)),
            DensityExpr::Poly(cs) => Some(
                cs.iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let p = k as i32 + 1;
                        c * (b.powi(p) - a.powi(p)) / p as f64
                    })
                    .sum(),
            ),
            DensityExpr::PowLaw { c, alpha } => {
                let e = alpha + 1.0;
                Some(c * ((1.0 - a).powf(e) - (1.0 - b).powf(e)) / e)
            }
            DensityExpr::XPow { c, alpha } => {
                let e = alpha + 1.0;
                Some(c * (b.powf(e) - a.powf(e)) / e)
            }
            DensityExpr::ExpTail { .. } | DensityExpr::Custom { .. } => None,
        }
    }

    fn descriptor(&self) -> (String, Vec<f64>) {
        match self {
            DensityExpr::Const(c) => ("const".into(), vec![*c]),
            DensityExpr::Poly(cs) => ("poly".into(), cs.clone()),
            DensityExpr::PowLaw { c, alpha } => ("powlaw".into(), vec![*c, *alpha]),
            DensityExpr::XPow { c, alpha } => ("xpow".into(), vec![*c, *alpha]),
            DensityExpr::ExpTail { c, s } => ("exptail".into(), vec![*c, *s]),
            DensityExpr::Custom { label, .. } => (format!("custom:{label}"), vec![]),
        }
    }
}

/// A density supported on `[a, b]`.
#[derive(Debug, Clone)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub expr: DensityExpr,
    /// Declares an integrable singularity at an endpoint.
    pub singular: bool,
}

impl DensityPiece {
    pub fn new(a: f64, b: f64, expr: DensityExpr, singular: bool) -> Result<Self> {
        let piece = DensityPiece { a, b, expr, singular };
        piece.validate()?;
        Ok(piece)
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = (self.a, self.b);
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(MuntzError::invalid(format!("density piece [{a}, {b}] not inside [0, 1]")));
        }
        let unbounded = match &self.expr {
            DensityExpr::PowLaw { alpha, .. } => {
                if *alpha <= -1.0 {
                    return Err(MuntzError::invalid(format!("(1-x)^{alpha} is not integrable at 1")));
                }
                *alpha < 0.0 && b == 1.0
            }
            DensityExpr::XPow { alpha, .. } => {
                if *alpha <= -1.0 {
                    return Err(MuntzError::invalid(format!("x^{alpha} is not integrable at 0")));
                }
                *alpha < 0.0 && a == 0.0
            }
            _ => false,
        };
        if unbounded && !self.singular {
            return Err(MuntzError::UnsupportedDomain(format!(
                "density on [{a}, {b}] is unbounded but not declared singular"
            )));
        }
        let w = b - a;
        let probes = (0..=64)
            .map(|i| a + w * i as f64 / 64.0)
            .chain([a + w * 1e-12, b - w * 1e-12])
            .filter(|&x| x > a && x < b);
        for x in probes {
            let v = self.expr.eval(x);
            if v.is_nan() || v < 0.0 {
                return Err(MuntzError::invalid(format!("density value {v} at x = {x}")));
            }
            if !self.singular && (!v.is_finite() || v > 1e10) {
                return Err(MuntzError::UnsupportedDomain(format!(
                    "density unbounded near x = {x} but not declared singular"
                )));
            }
        }
        Ok(())
    }

    fn quad_options(&self, tol: f64) -> QuadOptions {
        let opts = QuadOptions::with_tol(tol);
        if self.singular {
            opts.singular_left()
        } else {
            opts
        }
    }

    /// Mass on `[lo, hi] ∩ [a, b]`.
    pub fn mass_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let (l, h) = (lo.max(self.a), hi.min(self.b));
        if l >= h {
            return Ok(0.0);
        }
        if let Some(v) = self.expr.integral(l, h) {
            return Ok(v.max(0.0));
        }
        let expr = &self.expr;
        let r = quadrature::integrate(|x| expr.eval(x), l, h, &self.quad_options(1e-13))?;
        Ok(r.value.max(0.0))
    }

    /// Mass on `[1 - eps, 1]`, computed from `eps` directly where possible so
    /// that tiny tails keep full relative precision.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        if self.b < 1.0 || 1.0 - eps <= self.a {
            return self.mass_on(1.0 - eps, 1.0);
        }
        let v = match &self.expr {
            DensityExpr::Const(c) => c * eps,
            DensityExpr::PowLaw { c, alpha } => c * eps.powf(alpha + 1.0) / (alpha + 1.0),
            DensityExpr::XPow { c, alpha } => {
                let e = alpha + 1.0;
                -c * (e * (-eps).ln_1p()).exp_m1() / e
            }
            DensityExpr::Poly(cs) => {
                // p(1 - u) = Σ dⱼ uʲ, then ∫₀^ε
                let n = cs.len();
                let mut d = vec![0.0; n];
                for (k, c) in cs.iter().enumerate() {
                    let mut binom = 1.0;
                    for j in 0..=k {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        d[j] += c * binom * sign;
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                    }
                }
                d.iter()
                    .enumerate()
                    .map(|(j, dj)| dj * eps.powi(j as i32 + 1) / (j + 1) as f64)
                    .sum()
            }
            _ => return self.mass_on(1.0 - eps, 1.0),
        };
        Ok(v.max(0.0))
    }

    fn clipped(&self, lo: f64, hi: f64) -> Option<DensityPiece> {
        let (l, h) = (lo.max(self.a), hi.min(self.b));
        (l < h).then(|| DensityPiece {
            a: l,
            b: h,
            expr: self.expr.clone(),
            singular: self.singular,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub weight: f64,
}

/// A finite positive measure on `[0, 1]` with `μ({1}) = 0`.
#[derive(Debug, Clone, Default)]
pub struct Measure {
    atoms: Vec<Atom>,
    density: Vec<DensityPiece>,
    mix: Vec<(f64, Measure)>,
}

/// Samples of `ε ↦ μ(J_ε)` and the resulting sublinearity diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TailProfile {
    /// `(ε, μ([1-ε, 1]))`, ε decreasing.
    pub samples: Vec<(f64, f64)>,
    /// `sup μ(J_ε)/ε` over the grid (plus atom locations); a lower bound for
    /// `‖μ‖_S`, exact when `exact` is set.
    pub sublinear_norm_estimate: f64,
    pub exact: bool,
    /// The tail ratio at the smallest ε is below `10⁻³` of the first one.
    pub vanishing_flag: bool,
    /// Log-log slope of `μ(J_ε)/ε` over the last decade of the grid.
    pub trend_slope: Option<f64>,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

/// `n` log-spaced points from `hi` down to `lo`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (h + (l - h) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default grid for `‖μ‖_S`: 200 points from 1 down to `10⁻⁸`.
pub fn default_eps_grid() -> Vec<f64> {
    let mut g = log_grid(1e-8, 1.0, 200);
    g[0] = 1.0;
    g
}

impl Measure {
    pub fn zero() -> Self {
        Measure::default()
    }

    pub fn lebesgue() -> Self {
        Measure::from_density(0.0, 1.0, DensityExpr::Const(1.0)).expect("valid")
    }

    pub fn dirac(t: f64, weight: f64) -> Result<Self> {
        Measure::from_atoms(vec![Atom { t, weight }])
    }

    /// `δ'_t = (1 - t) δ_t`, a sublinear measure of unit sublinear norm.
    pub fn scaled_dirac(t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(MuntzError::invalid(format!("t = {t} must lie in [0, 1)")));
        }
        Measure::dirac(t, 1.0 - t)
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        let mut m = Measure::zero();
        for a in atoms {
            m = m.with_atom(a.t, a.weight)?;
        }
        Ok(m)
    }

    pub fn from_density(a: f64, b: f64, expr: DensityExpr) -> Result<Self> {
        Measure::zero().with_piece(DensityPiece::new(a, b, expr, false)?)
    }

    pub fn with_atom(mut self, t: f64, weight: f64) -> Result<Self> {
        if t == 1.0 {
            return Err(MuntzError::invalid("atom at 1: an embedding measure has no mass at 1"));
        }
        if !(0.0..1.0).contains(&t) {
            return Err(MuntzError::invalid(format!("atom location {t} outside [0, 1)")));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(MuntzError::invalid(format!("atom weight {weight} must be positive")));
        }
        self.atoms.push(Atom { t, weight });
        self.atoms.sort_by(|x, y| x.t.total_cmp(&y.t));
        Ok(self)
    }

    pub fn with_piece(mut self, piece: DensityPiece) -> Result<Self> {
        piece.validate()?;
        self.density.push(piece);
        Ok(self)
    }

    pub fn with_component(mut self, scale: f64, component: Measure) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(MuntzError::invalid(format!("mixture scale {scale} must be positive")));
        }
        self.mix.push((scale, component));
        Ok(self)
    }

    /// `s · μ`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Measure::zero().with_component(s, self.clone())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.density
    }

    pub fn components(&self) -> &[(f64, Measure)] {
        &self.mix
    }

    /// All atoms with mixture scales applied.
    pub fn flat_atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.visit(1.0, &mut |s, m| {
            out.extend(m.atoms.iter().map(|a| Atom {
                t: a.t,
                weight: s * a.weight,
            }))
        });
        out.sort_by(|x, y| x.t.total_cmp(&y.t));
        out
    }

    /// All density pieces with their mixture scale.
    pub fn flat_pieces(&self) -> Vec<(f64, DensityPiece)> {
        let mut out = Vec::new();
        self.visit(1.0, &mut |s, m| out.extend(m.density.iter().map(|p| (s, p.clone()))));
        out
    }

    fn visit<F: FnMut(f64, &Measure)>(&self, scale: f64, f: &mut F) {
        f(scale, self);
        for (s, c) in &self.mix {
            c.visit(scale * s, f);
        }
    }

    pub fn is_pure_atomic(&self) -> bool {
        let mut pure = true;
        self.visit(1.0, &mut |_, m| pure &= m.density.is_empty());
        pure
    }

    /// `μ([lo, hi])`.
    pub fn mass_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut total = 0.0;
        for a in self.flat_atoms() {
            if a.t >= lo && a.t <= hi {
                total += a.weight;
            }
        }
        for (s, p) in self.flat_pieces() {
            total += s * p.mass_on(lo, hi)?;
        }
        Ok(total)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.mass_on(0.0, 1.0)
    }

    /// `μ(J_ε) = μ([1 - ε, 1])`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(MuntzError::invalid(format!("eps = {eps} must lie in (0, 1]")));
        }
        let mut total = 0.0;
        for a in self.flat_atoms() {
            if 1.0 - a.t <= eps {
                total += a.weight;
            }
        }
        for (s, p) in self.flat_pieces() {
            total += s * p.tail_mass(eps)?;
        }
        Ok(total)
    }

    /// `∫ f dμ` with absolute error target `tol`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, tol: f64) -> Result<f64> {
        self.integrate_split(f, &[], tol)
    }

    /// Like [`Measure::integrate`], splitting density pieces at `breaks`
    /// (points where `f` has kinks).
    pub fn integrate_split<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64], tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(MuntzError::invalid("tolerance must be positive"));
        }
        let mut total = 0.0;
        for a in self.flat_atoms() {
            let v = f(a.t);
            if !v.is_finite() {
                return Err(MuntzError::Evaluation { x: a.t, value: v });
            }
            total += a.weight * v;
        }
        let pieces = self.flat_pieces();
        let per_piece = tol / pieces.len().max(1) as f64;
        for (s, p) in &pieces {
            let mut nodes = vec![p.a];
            nodes.extend(breaks.iter().copied().filter(|&x| x > p.a && x < p.b));
            nodes.push(p.b);
            nodes.sort_by(f64::total_cmp);
            let sub_tol = per_piece / (s * (nodes.len() - 1) as f64);
            let expr = &p.expr;
            let integrand = |x: f64| {
                let rho = expr.eval(x);
                if rho == 0.0 {
                    0.0
                } else {
                    f(x) * rho
                }
            };
            for w in nodes.windows(2) {
                let r = quadrature::integrate(integrand, w[0], w[1], &p.quad_options(sub_tol))?;
                total += s * r.value;
            }
        }
        Ok(total)
    }

    /// Restriction to `[lo, hi]` (atoms at `hi` included only if `hi_closed`).
    fn restricted(&self, lo: f64, hi: f64, hi_closed: bool) -> Measure {
        let keep = |t: f64| t >= lo && (t < hi || (hi_closed && t <= hi));
        Measure {
            atoms: self.atoms.iter().copied().filter(|a| keep(a.t)).collect(),
            density: self.density.iter().filter_map(|p| p.clipped(lo, hi)).collect(),
            mix: self
                .mix
                .iter()
                .map(|(s, c)| (*s, c.restricted(lo, hi, hi_closed)))
                .collect(),
        }
    }

    /// `μ'_m`: the restriction of μ to `J_{1/m} = [1 - 1/m, 1]`.
    pub fn tail_restriction(&self, m: usize) -> Result<Measure> {
        if m == 0 {
            return Err(MuntzError::invalid("m must be at least 1"));
        }
        Ok(self.restricted(1.0 - 1.0 / m as f64, 1.0, true))
    }

    /// `μ_m`: the restriction of μ to `[0, 1 - 1/m)`.
    pub fn head_restriction(&self, m: usize) -> Result<Measure> {
        if m == 0 {
            return Err(MuntzError::invalid("m must be at least 1"));
        }
        Ok(self.restricted(0.0, 1.0 - 1.0 / m as f64, false))
    }

    /// Tail profile on a grid of ε values in `(0, 1]`.
    ///
    /// For purely atomic measures the supremum of `μ(J_ε)/ε` is attained at
    /// `ε = 1 - t` for an atom `t` and is computed exactly.
    pub fn sublinear_profile(&self, eps_grid: &[f64]) -> Result<TailProfile> {
        if eps_grid.is_empty() {
            return Err(MuntzError::invalid("empty ε grid"));
        }
        let mut samples = Vec::with_capacity(eps_grid.len());
        for &e in eps_grid {
            samples.push((e, self.tail_mass(e)?));
        }
        let atoms = self.flat_atoms();
        let mut atom_sup = 0.0_f64;
        {
            let mut tail = 0.0;
            for a in atoms.iter().rev() {
                tail += a.weight;
                atom_sup = atom_sup.max(tail / (1.0 - a.t));
            }
        }
        let exact = self.is_pure_atomic();
        let estimate = if exact {
            atom_sup
        } else {
            let mut est = samples.iter().map(|&(e, m)| m / e).fold(0.0, f64::max);
            for a in &atoms {
                let e = 1.0 - a.t;
                est = est.max(self.tail_mass(e)? / e);
            }
            est
        };
        let ratio = |s: &(f64, f64)| s.1 / s.0;
        let first = ratio(&samples[0]);
        let last = ratio(samples.last().unwrap());
        let vanishing_flag = last < 1e-3 * first || (first == 0.0 && last == 0.0);
        let grid_min = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
        let grid_max = eps_grid.iter().copied().fold(0.0, f64::max);
        let decade: Vec<(f64, f64)> = samples
            .iter()
            .filter(|s| s.0 <= 10.0 * grid_min && s.1 > 0.0)
            .map(|s| (s.0.ln(), (s.1 / s.0).ln()))
            .collect();
        let trend_slope = least_squares_slope(&decade);
        Ok(TailProfile {
            samples,
            sublinear_norm_estimate: estimate,
            exact,
            vanishing_flag,
            trend_slope,
            grid_min,
            grid_max,
            grid_points: eps_grid.len(),
        })
    }

    /// Quadrature nodes and weights representing μ for integrands of the
    /// form `x^λ` with `λ ≤ lambda_max`: atoms verbatim, density pieces by
    /// 12-point Gauss–Legendre on panels refined dyadically toward the right
    /// end (and toward the left end for singular or small-exponent cases).
    pub fn discretize(&self, lambda_min: f64, lambda_max: f64) -> Vec<(f64, f64)> {
        let (gx, gw) = quadrature::gauss_legendre(12);
        let mut out: Vec<(f64, f64)> = self.flat_atoms().iter().map(|a| (a.t, a.weight)).collect();
        for (s, p) in self.flat_pieces() {
            let w = p.b - p.a;
            let mut pts = vec![p.a, p.b];
            let mut scale = 1.0;
            for _ in 0..50 {
                scale *= 0.5;
                pts.push(p.b - w * scale);
                if w * scale * lambda_max.max(1.0) < 1e-4 {
                    break;
                }
            }
            let left_levels = if p.singular {
                40
            } else if lambda_min < 1.0 && p.a == 0.0 {
                30
            } else {
                6
            };
            scale = 1.0;
            for _ in 0..left_levels {
                scale *= 0.5;
                pts.push(p.a + w * scale);
            }
            pts.retain(|&x| x >= p.a && x <= p.b);
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            for seg in pts.windows(2) {
                let (c, h) = (0.5 * (seg[0] + seg[1]), 0.5 * (seg[1] - seg[0]));
                for (x, wt) in gx.iter().zip(&gw) {
                    let node = c + h * x;
                    let rho = p.expr.eval(node);
                    if rho > 0.0 && rho.is_finite() {
                        out.push((node, s * h * wt * rho));
                    }
                }
            }
        }
        out
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `∫₀¹ g(x) ρ'(1 - x) dx`, an upper bound for `∫ g dμ` whenever g is
/// positive increasing and `μ(J_ε) ≤ ρ(ε)`.
pub fn rho_transfer_bound<R, G>(rho_prime: R, g: G, tol: f64) -> Result<f64>
where
    R: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let integrand = |x: f64| {
        let r = rho_prime(1.0 - x);
        if r == 0.0 {
            0.0
        } else {
            g(x) * r
        }
    };
    let opts = QuadOptions::with_tol(tol).singular_left();
    match quadrature::integrate(integrand, 0.0, 1.0, &opts) {
        Ok(r) => Ok(r.value),
        Err(MuntzError::Evaluation { x, value }) if value.is_infinite() => Err(MuntzError::Divergent(format!(
            "integrand overflows at x = {x}"
        ))),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// JSON descriptor

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceDescriptor {
    pub a: f64,
    pub b: f64,
    pub expr: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub singular: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DensityDescriptor {
    pub pieces: Vec<PieceDescriptor>,
}

/// `{"atoms":[[t,c],...], "density":{"pieces":[...]}, "mix":[[scale, <measure>],...]}`
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasureDescriptor {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityDescriptor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mix: Vec<(f64, MeasureDescriptor)>,
}

impl PieceDescriptor {
    fn to_piece(&self) -> Result<DensityPiece> {
        let p = &self.params;
        let need = |n: usize| -> Result<()> {
            if p.len() != n {
                return Err(MuntzError::invalid(format!(
                    "density expr '{}' takes {n} params, got {}",
                    self.expr,
                    p.len()
                )));
            }
            Ok(())
        };
        let expr = match self.expr.as_str() {
            "const" => {
                need(1)?;
                DensityExpr::Const(p[0])
            }
            "poly" => DensityExpr::Poly(p.clone()),
            "powlaw" => {
                need(2)?;
                DensityExpr::PowLaw { c: p[0], alpha: p[1] }
            }
            "xpow" => {
                need(2)?;
                DensityExpr::XPow { c: p[0], alpha: p[1] }
            }
            "exptail" => {
                need(2)?;
                DensityExpr::ExpTail { c: p[0], s: p[1] }
            }
            other => return Err(MuntzError::invalid(format!("unknown density expr '{other}'"))),
        };
        DensityPiece::new(self.a, self.b, expr, self.singular)
    }
}

impl TryFrom<&MeasureDescriptor> for Measure {
    type Error = MuntzError;

    fn try_from(d: &MeasureDescriptor) -> Result<Measure> {
        let mut m = Measure::zero();
        for &(t, c) in &d.atoms {
            m = m.with_atom(t, c)?;
        }
        if let Some(dens) = &d.density {
            for p in &dens.pieces {
                m = m.with_piece(p.to_piece()?)?;
            }
        }
        for (s, c) in &d.mix {
            m = m.with_component(*s, Measure::try_from(c)?)?;
        }
        Ok(m)
    }
}

impl From<&Measure> for MeasureDescriptor {
    fn from(m: &Measure) -> Self {
        MeasureDescriptor {
            atoms: m.atoms.iter().map(|a| (a.t, a.weight)).collect(),
            density: (!m.density.is_empty()).then(|| DensityDescriptor {
                pieces: m
                    .density
                    .iter()
                    .map(|p| {
                        let (expr, params) = p.expr.descriptor();
                        PieceDescriptor {
                            a: p.a,
                            b: p.b,
                            expr,
                            params,
                            singular: p.singular,
                        }
                    })
                    .collect(),
            }),
            mix: m.mix.iter().map(|(s, c)| (*s, MeasureDescriptor::from(c))).collect(),
        }
    }
}

impl Measure {
    pub fn from_json(text: &str) -> Result<Measure> {
        let d: MeasureDescriptor = serde_json::from_str(text)?;
        Measure::try_from(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn tail_mass_examples() {
        assert!(close(Measure::lebesgue().tail_mass(0.3).unwrap(), 0.3, 1e-15));
        assert_eq!(Measure::dirac(0.9, 2.0).unwrap().tail_mass(0.05).unwrap(), 0.0);
        let d = Measure::scaled_dirac(0.9).unwrap();
        assert!(close(d.tail_mass(0.2).unwrap(), 0.1, 1e-15));
        assert!(Measure::lebesgue().tail_mass(0.0).is_err());
        assert!(Measure::lebesgue().tail_mass(1.5).is_err());
    }

    #[test]
    fn atom_at_one_rejected() {
        assert!(Measure::dirac(1.0, 1.0).is_err());
        assert!(Measure::scaled_dirac(1.0).is_err());
        assert!(Measure::dirac(0.5, 0.0).is_err());
    }

    #[test]
    fn undeclared_singular_density_rejected() {
        let e = Measure::from_density(0.0, 1.0, DensityExpr::PowLaw { c: 0.5, alpha: -0.5 });
        assert!(matches!(e, Err(MuntzError::UnsupportedDomain(_))));
        let ok = DensityPiece::new(0.0, 1.0, DensityExpr::PowLaw { c: 0.5, alpha: -0.5 }, true);
        assert!(ok.is_ok());
        let custom = DensityExpr::Custom {
            label: "1/x".into(),
            f: Arc::new(|x| 1.0 / x),
        };
        assert!(DensityPiece::new(0.0, 1.0, custom, false).is_err());
    }

    #[test]
    fn profile_examples() {
        let grid = default_eps_grid();
        let p = Measure::dirac(0.5, 1.0).unwrap().sublinear_profile(&grid).unwrap();
        assert!(p.exact && close(p.sublinear_norm_estimate, 2.0, 1e-15));
        let p = Measure::lebesgue().sublinear_profile(&grid).unwrap();
        assert!(close(p.sublinear_norm_estimate, 1.0, 1e-12) && !p.vanishing_flag);
        let lin = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![1.0, -1.0])).unwrap();
        let p = lin.sublinear_profile(&log_grid(1e-6, 1.0, 100)).unwrap();
        assert!(close(p.sublinear_norm_estimate, 0.5, 1e-12));
        assert!(p.vanishing_flag);
        assert!(close(p.trend_slope.unwrap(), 1.0, 1e-6));
        let p = Measure::scaled_dirac(0.5).unwrap().sublinear_profile(&grid).unwrap();
        assert!(close(p.sublinear_norm_estimate, 1.0, 1e-15));
    }

    #[test]
    fn integrate_examples() {
        let leb = Measure::lebesgue();
        let v = leb.integrate(|x| x.powi(3), 1e-12).unwrap();
        assert!(close(v, 0.25, 1e-13));
        let d = Measure::scaled_dirac(0.9).unwrap();
        assert!(close(d.integrate(|x| x * x, 1e-12).unwrap(), 0.081, 1e-15));
        let lam = 1e6;
        let v = leb.integrate(|x: f64| (lam + 1.0) * (lam * x.ln()).exp(), 1e-10).unwrap();
        assert!(close(v, 1.0, 1e-9), "{v}");
    }

    #[test]
    fn integrate_reports_bad_points() {
        let r = Measure::lebesgue().integrate(|x| if x > 0.7 { f64::INFINITY } else { x }, 1e-10);
        assert!(matches!(r, Err(MuntzError::Evaluation { x, .. }) if x > 0.7));
        let r = Measure::dirac(0.3, 1.0).unwrap().integrate(|_| f64::NAN, 1e-10);
        assert!(matches!(r, Err(MuntzError::Evaluation { x, .. }) if x == 0.3));
    }

    #[test]
    fn restrictions() {
        let t = Measure::lebesgue().tail_restriction(4).unwrap();
        assert!(close(t.total_mass().unwrap(), 0.25, 1e-15));
        assert_eq!(t.pieces()[0].a, 0.75);
        let t = Measure::dirac(0.5, 1.0).unwrap().tail_restriction(4).unwrap();
        assert_eq!(t.total_mass().unwrap(), 0.0);
        let m = Measure::from_atoms(vec![Atom { t: 0.7, weight: 1.0 }, Atom { t: 0.9, weight: 2.0 }]).unwrap();
        let t = m.tail_restriction(5).unwrap();
        assert_eq!(t.flat_atoms(), vec![Atom { t: 0.9, weight: 2.0 }]);
        let h = m.head_restriction(5).unwrap();
        assert_eq!(h.flat_atoms(), vec![Atom { t: 0.7, weight: 1.0 }]);
    }

    #[test]
    fn rho_transfer_examples() {
        let v = rho_transfer_bound(|_| 1.0, |x| x, 1e-12).unwrap();
        assert!(close(v, 0.5, 1e-12));
        for lam in [0.5, 3.0, 1e4] {
            let v = rho_transfer_bound(|_| 1.0, |x: f64| (lam + 1.0) * x.powf(lam), 1e-12).unwrap();
            assert!(close(v, 1.0, 1e-9), "{lam}: {v}");
        }
        let v = rho_transfer_bound(|e| 2.0 * e, |x: f64| 1.0 / (1.0 - x).sqrt(), 1e-12).unwrap();
        assert!(close(v, 4.0 / 3.0, 1e-7), "{v}");
        let d = rho_transfer_bound(|_| 1.0, |x: f64| (10.0 / (1.0 - x)).exp(), 1e-10);
        assert!(matches!(d, Err(MuntzError::Divergent(_))), "{d:?}");
    }

    #[test]
    fn mixture_scaling() {
        let two = Measure::lebesgue().scaled(2.0).unwrap();
        assert!(close(two.total_mass().unwrap(), 2.0, 1e-15));
        assert!(close(two.tail_mass(0.5).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn json_descriptor() {
        let m = Measure::from_json(
            r#"{"atoms":[[0.5,0.25]],"density":{"pieces":[{"a":0,"b":1,"expr":"poly","params":[0,1]}]},
                "mix":[[2.0,{"atoms":[[0.9,0.1]]}]]}"#,
        )
        .unwrap();
        assert!(close(m.total_mass().unwrap(), 0.25 + 0.5 + 0.2, 1e-14));
        assert!(Measure::from_json(r#"{"atoms":[[1.0,1.0]]}"#).is_err());
        let err = Measure::from_json("{\n \"atoms\": [[0.5,]]}").unwrap_err();
        assert!(matches!(err, MuntzError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn discretization_integrates_monomials() {
        let m = Measure::from_density(0.0, 1.0, DensityExpr::Poly(vec![0.0, 1.0])).unwrap();
        let rule = m.discretize(1.0, 256.0);
        for lam in [1.0, 4.0, 49.0, 256.0] {
            let v: f64 = rule.iter().map(|(x, w)| w * x.powf(lam)).sum();
            assert!(close(v, 1.0 / (lam + 2.0), 1e-10), "{lam}: {v}");
        }
    }
}
