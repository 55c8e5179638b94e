//! Polyradial functions on ℍⁿ.
//!
//! A polyradial function is a finite sum over angular modes `m ∈ ℤⁿ`,
//!
//! ```text
//! f(z, t) = Σ_m f_m(r₁, …, rₙ, t) · e^{i(m₁θ₁ + … + mₙθₙ)},   z_j = r_j e^{iθ_j},
//! ```
//!
//! and each profile `f_m` is a sum of [`Term`]s. Separable terms
//! `c · Π_j φ_j(r_j) · ψ(t)` carry the bulk of the work because every integral
//! against them factorizes into one-dimensional pieces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{homogeneous_dimension, GroupPoint};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};

/// Nodes per panel for composite rules over profile supports.
pub(crate) const PANEL_ORDER: usize = 20;

/// `e^{−41.5} ≈ 10^{−18}`: relative size below which a Gaussian tail is dropped.
const GAUSS_TAIL_LOG: f64 = 41.5;

/// One-variable building block.
///
/// Radial factors are evaluated on `r ≥ 0`, time factors on all of `ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Factor {
    /// `x^power · e^{−width·x²}`
    Gauss { power: u32, width: f64 },
    /// `(x/support)^power · (1 − (x/support)²)^smoothness` for `|x| < support`, zero outside.
    Bump { power: u32, support: f64, smoothness: u32 },
}

impl Factor {
    pub fn gauss(power: u32, width: f64) -> Self {
        Factor::Gauss { power, width }
    }

    pub fn bump(power: u32, support: f64, smoothness: u32) -> Self {
        Factor::Bump {
            power,
            support,
            smoothness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Factor::Gauss { width, .. } if !(width > 0.0) || !width.is_finite() => Err(invalid(
                "width",
                format!("Gaussian width must be positive, got {width}"),
            )),
            Factor::Bump { support, .. } if !(support > 0.0) || !support.is_finite() => Err(invalid(
                "support",
                format!("bump support must be positive, got {support}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Factor::Gauss { power, width } => x.powi(power as i32) * (-width * x * x).exp(),
            Factor::Bump {
                power,
                support,
                smoothness,
            } => {
                let u = x / support;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    u.powi(power as i32) * (1.0 - u * u).powi(smoothness as i32)
                }
            }
        }
    }

    /// Half-width of the region carrying all but `~10^{−18}` of the factor.
    pub fn extent(&self) -> f64 {
        match *self {
            Factor::Bump { support, .. } => support,
            Factor::Gauss { power, width } => {
                // Solve k·ln x − b x² = k·ln x* − b x*² − GAUSS_TAIL_LOG beyond the peak x*.
                let k = power as f64;
                let g = |x: f64| {
                    if k == 0.0 {
                        -width * x * x
                    } else {
                        k * x.ln() - width * x * x
                    }
                };
                let peak = (k / (2.0 * width)).sqrt();
                let target = if k == 0.0 {
                    -GAUSS_TAIL_LOG
                } else {
                    g(peak) - GAUSS_TAIL_LOG
                };
                let mut lo = peak;
                let mut hi = peak.max(1.0 / width.sqrt());
                while g(hi) > target {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    /// Number of composite panels needed to resolve the factor's own shape on `[0, extent]`.
    pub(crate) fn shape_panels(&self) -> usize {
        match *self {
            Factor::Bump { .. } => 1,
            Factor::Gauss { power, width } => {
                let ext = self.extent();
                4 + (2.0 * ext * width.sqrt()).ceil() as usize + power as usize / 4
            }
        }
    }

    /// Quadrature nodes on `[0, extent]` accurate for the factor times a
    /// polynomial of degree at most `extra_degree` (exact for bumps).
    pub(crate) fn half_line_nodes(&self, extra_degree: u32) -> (Vec<f64>, Vec<f64>) {
        match *self {
            Factor::Bump {
                power,
                support,
                smoothness,
            } => {
                let degree = power + 2 * smoothness + extra_degree;
                let order = (degree as usize) / 2 + 2;
                split(gauss_legendre(order, 0.0, support))
            }
            Factor::Gauss { .. } => {
                let panels = self.shape_panels() + extra_degree as usize / 4;
                composite_gauss_legendre(0.0, self.extent(), panels, PANEL_ORDER)
            }
        }
    }

    /// Nodes on `[−extent, extent]`, same accuracy contract as [`Self::half_line_nodes`].
    pub(crate) fn full_line_nodes(&self, extra_degree: u32) -> (Vec<f64>, Vec<f64>) {
        let (x, w) = self.half_line_nodes(extra_degree);
        let nodes = x.iter().rev().map(|v| -v).chain(x.iter().copied()).collect();
        let weights = w.iter().rev().chain(w.iter()).copied().collect();
        (nodes, weights)
    }

    /// The factor of `x ↦ g(x / c)` written as `scale · g'(x)`.
    fn rescaled(&self, c: f64) -> (f64, Factor) {
        match *self {
            Factor::Gauss { power, width } => (
                c.powi(-(power as i32)),
                Factor::Gauss {
                    power,
                    width: width / (c * c),
                },
            ),
            Factor::Bump {
                power,
                support,
                smoothness,
            } => (
                1.0,
                Factor::Bump {
                    power,
                    support: support * c,
                    smoothness,
                },
            ),
        }
    }
}

fn split(pairs: Vec<(f64, f64)>) -> (Vec<f64>, Vec<f64>) {
    pairs.into_iter().unzip()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableTerm {
    pub coef: f64,
    /// One factor per coordinate `r_j`.
    pub radial: Vec<Factor>,
    pub time: Factor,
}

impl SeparableTerm {
    pub fn eval(&self, r: &[f64], t: f64) -> f64 {
        self.coef * self.radial.iter().zip(r).map(|(f, &x)| f.eval(x)).product::<f64>() * self.time.eval(t)
    }
}

/// Samples on a uniform `(r, t)` grid over `[0, r_max] × [−t_max, t_max]`,
/// bilinearly interpolated and zero outside. Only for `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedTerm {
    pub r_max: f64,
    pub t_max: f64,
    pub r_points: usize,
    pub t_points: usize,
    /// Row-major, `values[i * t_points + j]` at `(r_i, t_j)`.
    pub values: Vec<f64>,
}

impl TabulatedTerm {
    pub fn from_fn(r_max: f64, t_max: f64, r_points: usize, t_points: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(r_points * t_points);
        for i in 0..r_points {
            let r = r_max * i as f64 / (r_points - 1) as f64;
            for j in 0..t_points {
                let t = -t_max + 2.0 * t_max * j as f64 / (t_points - 1) as f64;
                values.push(f(r, t));
            }
        }
        Self {
            r_max,
            t_max,
            r_points,
            t_points,
            values,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_points < 2 || self.t_points < 2 {
            return Err(invalid("tabulated", "need at least 2 samples per axis"));
        }
        if self.values.len() != self.r_points * self.t_points {
            return Err(invalid(
                "tabulated",
                format!(
                    "expected {} samples, got {}",
                    self.r_points * self.t_points,
                    self.values.len()
                ),
            ));
        }
        if !(self.r_max > 0.0 && self.t_max > 0.0) {
            return Err(invalid("tabulated", "grid extents must be positive"));
        }
        Ok(())
    }

    pub fn r_step(&self) -> f64 {
        self.r_max / (self.r_points - 1) as f64
    }

    pub fn t_step(&self) -> f64 {
        2.0 * self.t_max / (self.t_points - 1) as f64
    }

    pub fn eval(&self, r: f64, t: f64) -> f64 {
        if r < 0.0 || r > self.r_max || t.abs() > self.t_max {
            return 0.0;
        }
        let fr = (r / self.r_step()).min((self.r_points - 1) as f64);
        let ft = ((t + self.t_max) / self.t_step()).min((self.t_points - 1) as f64);
        let i = (fr.floor() as usize).min(self.r_points - 2);
        let j = (ft.floor() as usize).min(self.t_points - 2);
        let (a, b) = (fr - i as f64, ft - j as f64);
        let v = |i: usize, j: usize| self.values[i * self.t_points + j];
        (1.0 - a) * (1.0 - b) * v(i, j)
            + a * (1.0 - b) * v(i + 1, j)
            + (1.0 - a) * b * v(i, j + 1)
            + a * b * v(i + 1, j + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Term {
    Separable(SeparableTerm),
    Tabulated(TabulatedTerm),
    /// `value` on the homogeneous ball `|z|⁴ + 4t² < radius⁴`.
    BallIndicator {
        value: f64,
        radius: f64,
    },
}

impl Term {
    pub fn eval(&self, r: &[f64], t: f64) -> f64 {
        match self {
            Term::Separable(s) => s.eval(r, t),
            Term::Tabulated(tab) => tab.eval(r[0], t),
            Term::BallIndicator { value, radius } => {
                let z2: f64 = r.iter().map(|x| x * x).sum();
                if z2 * z2 + 4.0 * t * t < radius.powi(4) {
                    *value
                } else {
                    0.0
                }
            }
        }
    }

    /// Bounding box `(r_extent per coordinate, t_extent)`.
    pub fn extents(&self, n: usize) -> (Vec<f64>, f64) {
        match self {
            Term::Separable(s) => (s.radial.iter().map(Factor::extent).collect(), s.time.extent()),
            Term::Tabulated(tab) => (vec![tab.r_max], tab.t_max),
            Term::BallIndicator { radius, .. } => (vec![*radius; n], 0.5 * radius * radius),
        }
    }
}

/// Profile `f_m` attached to one angular index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub m: Vec<i32>,
    pub terms: Vec<Term>,
}

impl Mode {
    pub fn eval(&self, r: &[f64], t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(r, t)).sum()
    }

    pub fn is_radial(&self) -> bool {
        self.m.iter().all(|&v| v == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyradialSpec {
    pub n: usize,
    pub modes: Vec<Mode>,
}

impl PolyradialSpec {
    pub fn zero(n: usize) -> Self {
        Self { n, modes: Vec::new() }
    }

    /// Single radial (`m = 0`) profile.
    pub fn radial(n: usize, terms: Vec<Term>) -> Self {
        Self {
            n,
            modes: vec![Mode { m: vec![0; n], terms }],
        }
    }

    /// `coef · Π_j e^{−b_j r_j²} · e^{−c t²}` with `b_j = radial_width`, `c = time_width`.
    pub fn gaussian(n: usize, coef: f64, radial_width: f64, time_width: f64) -> Self {
        Self::radial(
            n,
            vec![Term::Separable(SeparableTerm {
                coef,
                radial: vec![Factor::gauss(0, radial_width); n],
                time: Factor::gauss(0, time_width),
            })],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        for (i, mode) in self.modes.iter().enumerate() {
            if mode.m.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    found: mode.m.len(),
                });
            }
            if self.modes[..i].iter().any(|other| other.m == mode.m) {
                return Err(invalid("m", format!("angular index {:?} listed twice", mode.m)));
            }
            for term in &mode.terms {
                match term {
                    Term::Separable(s) => {
                        if s.radial.len() != self.n {
                            return Err(Error::DimensionMismatch {
                                expected: self.n,
                                found: s.radial.len(),
                            });
                        }
                        s.radial.iter().try_for_each(Factor::validate)?;
                        s.time.validate()?;
                        if !s.coef.is_finite() {
                            return Err(invalid("coef", "coefficient must be finite"));
                        }
                    }
                    Term::Tabulated(tab) => {
                        if self.n != 1 {
                            return Err(Error::Unsupported("tabulated profiles require n = 1".into()));
                        }
                        tab.validate()?;
                    }
                    Term::BallIndicator { radius, .. } => {
                        if !(*radius > 0.0) {
                            return Err(invalid("radius", "ball radius must be positive"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_radial(&self) -> bool {
        self.modes.iter().all(Mode::is_radial)
    }

    pub fn mode(&self, m: &[i32]) -> Option<&Mode> {
        self.modes.iter().find(|mode| mode.m == m)
    }

    /// `f(z, t)`.
    pub fn evaluate(&self, u: &GroupPoint) -> Result<Complex64> {
        if u.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: u.dim(),
            });
        }
        let r: Vec<f64> = u.z.iter().map(|c| c.norm()).collect();
        let theta: Vec<f64> = u.z.iter().map(|c| c.arg()).collect();
        Ok(self
            .modes
            .iter()
            .map(|mode| {
                let phase: f64 = mode.m.iter().zip(&theta).map(|(&m, th)| m as f64 * th).sum();
                Complex64::from_polar(mode.eval(&r, u.t), phase)
            })
            .sum())
    }

    /// `f + g`, merging terms that share an angular index.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut out = self.clone();
        for mode in &other.modes {
            match out.modes.iter_mut().find(|m| m.m == mode.m) {
                Some(existing) => existing.terms.extend(mode.terms.iter().cloned()),
                None => out.modes.push(mode.clone()),
            }
        }
        Ok(out)
    }

    /// `c · f`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for mode in &mut out.modes {
            for term in &mut mode.terms {
                match term {
                    Term::Separable(s) => s.coef *= c,
                    Term::Tabulated(tab) => tab.values.iter_mut().for_each(|v| *v *= c),
                    Term::BallIndicator { value, .. } => *value *= c,
                }
            }
        }
        out
    }

    /// `amplitude · f(z/ρ, t/ρ²)`. With `amplitude = ρ^{−Q}` this is the
    /// L¹-normalized dilate `f_ρ`.
    pub fn dilated(&self, rho: f64, amplitude: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(invalid("rho", format!("dilation factor must be positive, got {rho}")));
        }
        let mut out = self.clone();
        for mode in &mut out.modes {
            for term in &mut mode.terms {
                match term {
                    Term::Separable(s) => {
                        let mut coef = s.coef * amplitude;
                        for f in &mut s.radial {
                            let (c, g) = f.rescaled(rho);
                            coef *= c;
                            *f = g;
                        }
                        let (c, g) = s.time.rescaled(rho * rho);
                        s.coef = coef * c;
                        s.time = g;
                    }
                    Term::Tabulated(tab) => {
                        tab.r_max *= rho;
                        tab.t_max *= rho * rho;
                        tab.values.iter_mut().for_each(|v| *v *= amplitude);
                    }
                    Term::BallIndicator { value, radius } => {
                        *value *= amplitude;
                        *radius *= rho;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `f_ρ(z, t) = ρ^{−Q} f(z/ρ, t/ρ²)`.
    pub fn l1_dilate(&self, rho: f64) -> Result<Self> {
        let q = homogeneous_dimension(self.n) as i32;
        self.dilated(rho, rho.powi(-q))
    }

    /// Largest radial and time extents over all terms.
    pub fn support_box(&self) -> (f64, f64) {
        let mut r = 0.0f64;
        let mut t = 0.0f64;
        for mode in &self.modes {
            for term in &mode.terms {
                let (rs, ts) = term.extents(self.n);
                r = rs.into_iter().fold(r, f64::max);
                t = t.max(ts);
            }
        }
        (r, t)
    }

    /// `‖f‖₂² = Σ_m (2π)ⁿ ∫ |f_m|² Π r_j dr_j dt`.
    pub fn l2_norm_sqr(&self) -> Result<f64> {
        self.validate()?;
        let angular = (2.0 * PI).powi(self.n as i32);
        let mut total = 0.0;
        for mode in &self.modes {
            let all_separable = mode.terms.iter().all(|t| matches!(t, Term::Separable(_)));
            let integral = if all_separable {
                separable_gram(&mode.terms)
            } else if self.n == 1 {
                planar_integral(&mode.terms, |v| v * v)
            } else {
                return Err(Error::Unsupported(
                    "direct norms of non-separable profiles require n = 1".into(),
                ));
            };
            total += angular * integral;
        }
        if !total.is_finite() {
            return Err(Error::DivergentNorm);
        }
        Ok(total)
    }

    /// `‖f‖_{L¹}` for a single-mode function (the angular phase has unit modulus).
    pub fn l1_norm(&self) -> Result<f64> {
        self.validate()?;
        match self.modes.len() {
            0 => Ok(0.0),
            1 if self.n == 1 => Ok(2.0 * PI * planar_integral(&self.modes[0].terms, f64::abs)),
            1 => Err(Error::Unsupported("L¹ norms are implemented for n = 1".into())),
            _ => Err(Error::Unsupported("L¹ norm of a multi-mode function".into())),
        }
    }
}

/// `∫ (Σ_a T_a)² Π r_j dr_j dt` for separable terms, via one-dimensional inner products.
fn separable_gram(terms: &[Term]) -> f64 {
    let terms: Vec<&SeparableTerm> = terms
        .iter()
        .filter_map(|t| match t {
            Term::Separable(s) => Some(s),
            _ => None,
        })
        .collect();
    let mut total = 0.0;
    for (i, a) in terms.iter().enumerate() {
        for (j, b) in terms.iter().enumerate().skip(i) {
            let radial: f64 = a
                .radial
                .iter()
                .zip(&b.radial)
                .map(|(fa, fb)| factor_inner(fa, fb, true))
                .product();
            let time = factor_inner(&a.time, &b.time, false);
            let v = a.coef * b.coef * radial * time;
            total += if i == j { v } else { 2.0 * v };
        }
    }
    total
}

/// `∫ φ ψ r dr` over `r ≥ 0` when `radial`, else `∫ φ ψ dt` over `ℝ`.
pub(crate) fn factor_inner(a: &Factor, b: &Factor, radial: bool) -> f64 {
    let (pa, pb) = (a.shape_panels(), b.shape_panels());
    let ext = a.extent().min(b.extent());
    let extra = match (a, b) {
        (Factor::Bump { power, smoothness, .. }, _) | (_, Factor::Bump { power, smoothness, .. }) => {
            power + 2 * smoothness
        }
        _ => 0,
    };
    let panels = pa.max(pb).max(4) + extra as usize / 8;
    let (x, w) = composite_gauss_legendre(0.0, ext, panels, PANEL_ORDER);
    let half: f64 = x
        .iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let jac = if radial { x } else { 1.0 };
            w * jac * a.eval(x) * b.eval(x)
        })
        .sum();
    if radial {
        half
    } else {
        let (x, w) = composite_gauss_legendre(-ext, 0.0, panels, PANEL_ORDER);
        half + x.iter().zip(&w).map(|(&x, &w)| w * a.eval(x) * b.eval(x)).sum::<f64>()
    }
}

/// `∫∫ g(Σ terms)(r, t) r dr dt` for `n = 1` by tensor Gauss–Legendre over the support box.
fn planar_integral(terms: &[Term], g: impl Fn(f64) -> f64) -> f64 {
    let mut r_ext = 0.0f64;
    let mut t_ext = 0.0f64;
    let mut r_panels = 8usize;
    let mut t_panels = 8usize;
    for term in terms {
        let (rs, ts) = term.extents(1);
        r_ext = r_ext.max(rs[0]);
        t_ext = t_ext.max(ts);
        if let Term::Tabulated(tab) = term {
            r_panels = r_panels.max(tab.r_points - 1);
            t_panels = t_panels.max(tab.t_points - 1);
        }
        if let Term::BallIndicator { .. } = term {
            r_panels = r_panels.max(64);
            t_panels = t_panels.max(64);
        }
    }
    let (rx, rw) = composite_gauss_legendre(0.0, r_ext, r_panels, 8);
    let (tx, tw) = composite_gauss_legendre(-t_ext, t_ext, t_panels, 8);
    let mut total = 0.0;
    for (&r, &wr) in rx.iter().zip(&rw) {
        let mut inner = 0.0;
        for (&t, &wt) in tx.iter().zip(&tw) {
            let v: f64 = terms.iter().map(|term| term.eval(&[r], t)).sum();
            inner += wt * g(v);
        }
        total += wr * r * inner;
    }
    total
}
