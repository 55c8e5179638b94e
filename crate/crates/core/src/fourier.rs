//! Group Fourier transform of polyradial functions in the Laguerre basis.
//!
//! For a polyradial `f` the operator `𝓕(f)(λ)` is diagonal in the family
//! `W_α^m(λ)` with scalar coefficients
//!
//! ```text
//! R_f(λ, m, α) = (2π)ⁿ ∫ f_m(r, t) e^{iλt} Π_j ℓ_{α_j}^{|m_j|}(2|λ| r_j²) Π_j r_j dr_j dt,
//! ```
//!
//! so `‖𝓕(f)(λ)‖_HS² = Σ_{m,α} |R_f(λ, m, α)|²`. Tables of these coefficients
//! are built over a symmetric log-spaced `λ` grid whose weights integrate
//! against `|λ|ⁿ dλ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::bounded_vectors;
use crate::laguerre::{decay_cutoff, Recurrence};
use crate::profile::{Factor, PolyradialSpec, SeparableTerm, TabulatedTerm, Term, PANEL_ORDER};
use crate::quadrature::composite_gauss_legendre;

/// Symmetric log-spaced grid `{±λ_min·q^j}` spanning `[λ_min, λ_max]` on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub points_per_side: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e3,
            points_per_side: 96,
        }
    }
}

impl LambdaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.max > self.min && self.max.is_finite()) {
            return Err(invalid(
                "lambda_grid",
                format!("need 0 < min < max, got [{}, {}]", self.min, self.max),
            ));
        }
        if self.points_per_side < 2 {
            return Err(invalid("lambda_grid", "need at least 2 points per side"));
        }
        Ok(())
    }

    /// Nodes in increasing order with trapezoid-in-`ln|λ|` weights for `|λ|ⁿ dλ`.
    pub fn build(&self, n: usize) -> Result<SpectralGrid> {
        self.validate()?;
        let k = self.points_per_side;
        let h = (self.max / self.min).ln() / (k - 1) as f64;
        let side: Vec<(f64, f64)> = (0..k)
            .map(|j| {
                let lam = self.min * (h * j as f64).exp();
                let end = if j == 0 || j == k - 1 { 0.5 } else { 1.0 };
                (lam, end * h * lam.powi(n as i32 + 1))
            })
            .collect();
        let mut lambdas = Vec::with_capacity(2 * k);
        let mut weights = Vec::with_capacity(2 * k);
        for &(l, w) in side.iter().rev() {
            lambdas.push(-l);
            weights.push(w);
        }
        for &(l, w) in &side {
            lambdas.push(l);
            weights.push(w);
        }
        Ok(SpectralGrid { n, lambdas, weights })
    }
}

/// Concrete `λ` nodes and `|λ|ⁿ dλ` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    /// The grid seen by a function dilated by `ρ`: `λ ↦ λ/ρ²`, weights by `ρ^{−Q}`.
    pub fn dilated(&self, rho: f64) -> Self {
        let q = 2 * self.n as i32 + 2;
        Self {
            n: self.n,
            lambdas: self.lambdas.iter().map(|l| l / (rho * rho)).collect(),
            weights: self.weights.iter().map(|w| w * rho.powi(-q)).collect(),
        }
    }
}

/// Which `(m, α)` enter each row of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation {
    /// `|m_j| ≤ m_max`, `|α| ≤ alpha_max` on every row.
    Fixed { m_max: u32, alpha_max: u32 },
    /// `|α| ≤ max(alpha_min, (energy_max/|λ| − n)/2)`, capped at `alpha_cap`:
    /// keeps every coefficient with `(2|α| + n)|λ| ≤ energy_max`.
    Energy {
        m_max: u32,
        alpha_min: u32,
        energy_max: f64,
        alpha_cap: u32,
    },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Fixed {
            m_max: 0,
            alpha_max: 48,
        }
    }
}

impl Truncation {
    /// Truncation used for norm identities: resolves the small-`λ` region
    /// where many Laguerre modes carry mass.
    pub fn plancherel_default() -> Self {
        Truncation::Energy {
            m_max: 0,
            alpha_min: 48,
            energy_max: 40.0,
            alpha_cap: 40_000,
        }
    }

    pub fn m_max(&self) -> u32 {
        match *self {
            Truncation::Fixed { m_max, .. } | Truncation::Energy { m_max, .. } => m_max,
        }
    }

    pub fn alpha_limit(&self, n: usize, lambda: f64) -> u32 {
        match *self {
            Truncation::Fixed { alpha_max, .. } => alpha_max,
            Truncation::Energy {
                alpha_min,
                energy_max,
                alpha_cap,
                ..
            } => {
                let wanted = ((energy_max / lambda.abs() - n as f64) / 2.0).ceil();
                let wanted = if wanted.is_finite() && wanted > 0.0 {
                    wanted.min(alpha_cap as f64) as u32
                } else {
                    0
                };
                wanted.max(alpha_min).min(alpha_cap)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformRules {
    /// Gauss–Legendre nodes per composite panel.
    pub panel_order: usize,
    /// Largest radial extent a profile may have.
    pub radial_cutoff: f64,
    /// Largest time extent a profile may have.
    pub time_cutoff: f64,
    /// Composite panels per oscillation period of the kernel.
    pub panels_per_period: f64,
}

impl Default for TransformRules {
    fn default() -> Self {
        Self {
            panel_order: PANEL_ORDER,
            radial_cutoff: 1e4,
            time_cutoff: 1e8,
            panels_per_period: 1.0,
        }
    }
}

impl TransformRules {
    pub fn validate(&self) -> Result<()> {
        if self.panel_order < 2 {
            return Err(invalid("panel_order", "must be at least 2"));
        }
        if !(self.radial_cutoff > 0.0 && self.time_cutoff > 0.0) {
            return Err(invalid("cutoff", "cutoffs must be positive"));
        }
        if !(self.panels_per_period > 0.0) {
            return Err(invalid("panels_per_period", "must be positive"));
        }
        Ok(())
    }
}

/// Multi-indices with `|α| ≤ limit`, ordered by `|α|` then lexicographically.
pub fn graded_alphas(n: usize, limit: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return (0..=limit).map(|a| vec![a]).collect();
    }
    let mut all = bounded_vectors(n, limit);
    all.sort_by_key(|a| (a.iter().sum::<u32>(), a.clone()));
    all
}

/// Number of multi-indices with `|α| ≤ limit` in dimension `n`.
pub fn graded_count(n: usize, limit: u32) -> usize {
    // C(limit + n, n)
    let mut c = 1usize;
    for i in 1..=n {
        c = c * (limit as usize + i) / i;
    }
    c
}

/// Angular indices with `|m_j| ≤ m_max`, lexicographic.
pub fn angular_indices(n: usize, m_max: u32) -> Vec<Vec<i32>> {
    let m = m_max as i32;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-m..=m).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn radial_panels(rules: &TransformRules, phase: f64, shape: usize) -> usize {
    shape + 2 + (rules.panels_per_period * phase / (2.0 * PI)).ceil() as usize
}

/// `[∫₀^∞ φ(r) ℓ_k^δ(2|λ| r²) r dr]_{k ≤ limit}`.
pub fn radial_transform(
    factor: &Factor,
    delta: u32,
    lambda: f64,
    limit: u32,
    rules: &TransformRules,
) -> Result<Vec<f64>> {
    let ext = factor.extent();
    if ext > rules.radial_cutoff {
        return Err(Error::SupportExceedsCutoff {
            axis: "radial",
            extent: ext,
            cutoff: rules.radial_cutoff,
        });
    }
    let two_lam = 2.0 * lambda.abs();
    let r_eff = ext.min((decay_cutoff(limit, delta) / two_lam).sqrt());
    // ℓ_k^δ(2|λ|r²) oscillates like J_δ(2√E r) with E = (2k+δ+1)|λ|.
    let energy = (2.0 * limit as f64 + delta as f64 + 1.0) * lambda.abs();
    let phase = 2.0 * energy.sqrt() * r_eff;
    let extra = match factor {
        Factor::Bump { power, smoothness, .. } => (power + 2 * smoothness) as usize / 8,
        Factor::Gauss { .. } => 0,
    };
    let panels = radial_panels(rules, phase, factor.shape_panels() + extra);
    let (nodes, weights) = composite_gauss_legendre(0.0, r_eff, panels, rules.panel_order);
    let rec = Recurrence::new(delta, limit);
    let mut acc = vec![0.0; limit as usize + 1];
    let mut ell = vec![0.0; limit as usize + 1];
    for (&r, &w) in nodes.iter().zip(&weights) {
        let g = w * r * factor.eval(r);
        if g == 0.0 {
            continue;
        }
        rec.fill(two_lam * r * r, &mut ell);
        for (a, l) in acc.iter_mut().zip(&ell) {
            *a += g * l;
        }
    }
    Ok(acc)
}

/// `∫ ψ(t) e^{iλt} dt`.
pub fn time_transform(factor: &Factor, lambda: f64, rules: &TransformRules) -> Result<Complex64> {
    let ext = factor.extent();
    if ext > rules.time_cutoff {
        return Err(Error::SupportExceedsCutoff {
            axis: "time",
            extent: ext,
            cutoff: rules.time_cutoff,
        });
    }
    let extra = match factor {
        Factor::Bump { power, smoothness, .. } => (power + 2 * smoothness) as usize / 8,
        Factor::Gauss { .. } => 0,
    };
    let phase = lambda.abs() * 2.0 * ext;
    let panels = radial_panels(rules, phase, 2 * (factor.shape_panels() + extra));
    let (nodes, weights) = composite_gauss_legendre(-ext, ext, panels, rules.panel_order);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in nodes.iter().zip(&weights) {
        let v = w * factor.eval(t);
        if v != 0.0 {
            let (s, c) = (lambda * t).sin_cos();
            acc += Complex64::new(v * c, v * s);
        }
    }
    Ok(acc)
}

/// `[2π ∫∫ f(r,t) e^{iλt} ℓ_k^δ(2|λ|r²) r dr dt]_{k ≤ limit}` for an `n = 1` tabulated profile.
fn tabulated_transform(
    tab: &TabulatedTerm,
    delta: u32,
    lambda: f64,
    limit: u32,
    rules: &TransformRules,
) -> Result<Vec<Complex64>> {
    if tab.r_max > rules.radial_cutoff {
        return Err(Error::SupportExceedsCutoff {
            axis: "radial",
            extent: tab.r_max,
            cutoff: rules.radial_cutoff,
        });
    }
    if tab.t_max > rules.time_cutoff {
        return Err(Error::SupportExceedsCutoff {
            axis: "time",
            extent: tab.t_max,
            cutoff: rules.time_cutoff,
        });
    }
    let cells_r = tab.r_points - 1;
    let cells_t = tab.t_points - 1;
    let two_lam = 2.0 * lambda.abs();
    let energy = (2.0 * limit as f64 + delta as f64 + 1.0) * lambda.abs();
    let r_phase = 2.0 * energy.sqrt() * tab.r_max;
    let t_phase = lambda.abs() * 2.0 * tab.t_max;
    // Panels stay aligned with the sample cells so the interpolant is smooth on each.
    let refine = |phase: f64, cells: usize| {
        let want = radial_panels(rules, phase, 0);
        cells * want.div_ceil(cells).max(1)
    };
    let order = 6;
    let (rx, rw) = composite_gauss_legendre(0.0, tab.r_max, refine(r_phase, cells_r), order);
    let (tx, tw) = composite_gauss_legendre(-tab.t_max, tab.t_max, refine(t_phase, cells_t), order);
    let phases: Vec<Complex64> = tx
        .iter()
        .zip(&tw)
        .map(|(&t, &w)| Complex64::from_polar(w, lambda * t))
        .collect();
    let rec = Recurrence::new(delta, limit);
    let mut acc = vec![Complex64::new(0.0, 0.0); limit as usize + 1];
    let mut ell = vec![0.0; limit as usize + 1];
    for (&r, &w) in rx.iter().zip(&rw) {
        let ft: Complex64 = tx.iter().zip(&phases).map(|(&t, &ph)| ph * tab.eval(r, t)).sum();
        if ft == Complex64::new(0.0, 0.0) {
            continue;
        }
        rec.fill(two_lam * r * r, &mut ell);
        let g = ft * (w * r * 2.0 * PI);
        for (a, l) in acc.iter_mut().zip(&ell) {
            *a += g * *l;
        }
    }
    Ok(acc)
}

/// Per-`λ` memo of one-dimensional transforms shared between separable terms.
#[derive(Default)]
struct FactorCache {
    radial: Vec<(Factor, u32, Vec<f64>)>,
    time: Vec<(Factor, Complex64)>,
}

impl FactorCache {
    fn radial(&mut self, f: &Factor, delta: u32, lambda: f64, limit: u32, rules: &TransformRules) -> Result<usize> {
        if let Some(i) = self.radial.iter().position(|(g, d, _)| g == f && *d == delta) {
            return Ok(i);
        }
        let v = radial_transform(f, delta, lambda, limit, rules)?;
        self.radial.push((f.clone(), delta, v));
        Ok(self.radial.len() - 1)
    }

    fn time(&mut self, f: &Factor, lambda: f64, rules: &TransformRules) -> Result<Complex64> {
        if let Some((_, v)) = self.time.iter().find(|(g, _)| g == f) {
            return Ok(*v);
        }
        let v = time_transform(f, lambda, rules)?;
        self.time.push((f.clone(), v));
        Ok(v)
    }
}

/// Coefficients for one `λ`: blocks over `ms`, each over `graded_alphas(n, limit)`.
fn spectral_row(
    f: &PolyradialSpec,
    lambda: f64,
    ms: &[Vec<i32>],
    limit: u32,
    rules: &TransformRules,
) -> Result<Vec<Complex64>> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let n = f.n;
    let alphas = graded_alphas(n, limit);
    let block = alphas.len();
    let mut row = vec![Complex64::new(0.0, 0.0); block * ms.len()];
    let angular = (2.0 * PI).powi(n as i32);
    let mut cache = FactorCache::default();
    for (mi, m) in ms.iter().enumerate() {
        let Some(mode) = f.mode(m) else { continue };
        let out = &mut row[mi * block..(mi + 1) * block];
        for term in &mode.terms {
            match term {
                Term::Separable(SeparableTerm { coef, radial, time }) => {
                    let tau = cache.time(time, lambda, rules)?;
                    let mut slots = Vec::with_capacity(n);
                    for (j, factor) in radial.iter().enumerate() {
                        slots.push(cache.radial(factor, m[j].unsigned_abs(), lambda, limit, rules)?);
                    }
                    let scale = tau * (angular * coef);
                    for (o, alpha) in out.iter_mut().zip(&alphas) {
                        let prod: f64 = slots
                            .iter()
                            .zip(alpha)
                            .map(|(&s, &a)| cache.radial[s].2[a as usize])
                            .product();
                        *o += scale * prod;
                    }
                }
                Term::Tabulated(tab) => {
                    let v = tabulated_transform(tab, m[0].unsigned_abs(), lambda, limit, rules)?;
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x;
                    }
                }
                Term::BallIndicator { .. } => {
                    return Err(Error::Unsupported("spectral transform of a ball indicator term".into()))
                }
            }
        }
    }
    Ok(row)
}

/// One coefficient `R_f(λ, m, α)`.
pub fn spectral_coefficient(
    f: &PolyradialSpec,
    lambda: f64,
    m: &[i32],
    alpha: &[u32],
    rules: &TransformRules,
) -> Result<Complex64> {
    f.validate()?;
    rules.validate()?;
    if m.len() != f.n || alpha.len() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: m.len().max(alpha.len()),
        });
    }
    let limit: u32 = alpha.iter().sum();
    let row = spectral_row(f, lambda, &[m.to_vec()], limit, rules)?;
    let pos = graded_alphas(f.n, limit)
        .iter()
        .position(|a| a.as_slice() == alpha)
        .expect("alpha lies in its own graded set");
    Ok(row[pos])
}

/// Table of `R_f(λ, m, α)` over a `λ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRecord", into = "TableRecord")]
pub struct SpectralCoefficients {
    pub n: usize,
    pub lambdas: Vec<f64>,
    /// Quadrature weights for `|λ|ⁿ dλ`.
    pub weights: Vec<f64>,
    pub m_indices: Vec<Vec<i32>>,
    /// Row `i` holds every `α` with `|α| ≤ alpha_limits[i]`.
    pub alpha_limits: Vec<u32>,
    /// Row-major: `values[i][mi * block + ai]` with `block = graded_count(n, alpha_limits[i])`.
    pub values: Vec<Vec<Complex64>>,
    /// Estimated HS norm of the discarded coefficients `|α| > alpha_limits[i]`, per row.
    pub tail_estimates: Vec<f64>,
    /// Multiplier already applied to every coefficient (1 unless calibrated).
    pub scale: f64,
}

/// Serialized layout.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRecord {
    n: usize,
    lambda_grid: Vec<f64>,
    weights: Vec<f64>,
    index_set: IndexSet,
    alpha_limits: Vec<u32>,
    values: Vec<Vec<Complex64>>,
    tail_estimates: Vec<f64>,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexSet {
    m: Vec<Vec<i32>>,
    /// Graded multi-indices up to the largest row limit; row `i` uses a prefix.
    alpha: Vec<Vec<u32>>,
}

impl From<SpectralCoefficients> for TableRecord {
    fn from(s: SpectralCoefficients) -> Self {
        let top = s.alpha_limits.iter().copied().max().unwrap_or(0);
        TableRecord {
            n: s.n,
            index_set: IndexSet {
                m: s.m_indices.clone(),
                alpha: graded_alphas(s.n, top),
            },
            lambda_grid: s.lambdas,
            weights: s.weights,
            alpha_limits: s.alpha_limits,
            values: s.values,
            tail_estimates: s.tail_estimates,
            scale: s.scale,
        }
    }
}

impl TryFrom<TableRecord> for SpectralCoefficients {
    type Error = String;

    fn try_from(r: TableRecord) -> std::result::Result<Self, String> {
        let rows = r.lambda_grid.len();
        if r.weights.len() != rows
            || r.alpha_limits.len() != rows
            || r.values.len() != rows
            || r.tail_estimates.len() != rows
        {
            return Err("row counts of lambda_grid/weights/alpha_limits/values disagree".into());
        }
        if r.lambda_grid.contains(&0.0) {
            return Err("lambda = 0 is not a valid grid point".into());
        }
        for (i, (row, &lim)) in r.values.iter().zip(&r.alpha_limits).enumerate() {
            let want = graded_count(r.n, lim) * r.index_set.m.len();
            if row.len() != want {
                return Err(format!("row {i} has {} values, expected {want}", row.len()));
            }
        }
        Ok(SpectralCoefficients {
            n: r.n,
            lambdas: r.lambda_grid,
            weights: r.weights,
            m_indices: r.index_set.m,
            alpha_limits: r.alpha_limits,
            values: r.values,
            tail_estimates: r.tail_estimates,
            scale: r.scale,
        })
    }
}

/// One coefficient with its indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry<'a> {
    pub m: &'a [i32],
    pub alpha_abs: u32,
    pub value: Complex64,
}

impl SpectralCoefficients {
    pub fn rows(&self) -> usize {
        self.lambdas.len()
    }

    pub fn block_len(&self, row: usize) -> usize {
        graded_count(self.n, self.alpha_limits[row])
    }

    /// All coefficients on row `i`, with `|α|` attached.
    pub fn entries(&self, row: usize) -> impl Iterator<Item = Entry<'_>> + '_ {
        let block = self.block_len(row);
        let degrees: Vec<u32> = graded_alphas(self.n, self.alpha_limits[row])
            .iter()
            .map(|a| a.iter().sum())
            .collect();
        self.values[row].iter().enumerate().map(move |(k, &value)| Entry {
            m: &self.m_indices[k / block],
            alpha_abs: degrees[k % block],
            value,
        })
    }

    pub fn get(&self, row: usize, m: &[i32], alpha: &[u32]) -> Option<Complex64> {
        let mi = self.m_indices.iter().position(|x| x.as_slice() == m)?;
        let ai = graded_alphas(self.n, self.alpha_limits[row])
            .iter()
            .position(|a| a.as_slice() == alpha)?;
        Some(self.values[row][mi * self.block_len(row) + ai])
    }

    pub fn hs_norm_at(&self, row: usize) -> f64 {
        self.values[row].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖𝓕(f)(λ)‖_HS` over the truncated index set, at an exact grid point.
    pub fn hs_norm(&self, lambda: f64) -> Result<f64> {
        let row = self
            .lambdas
            .iter()
            .position(|&l| l == lambda)
            .ok_or_else(|| invalid("lambda", format!("{lambda} is not a grid point")))?;
        Ok(self.hs_norm_at(row))
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_tail_estimate(&self) -> f64 {
        self.tail_estimates.iter().copied().fold(0.0, f64::max)
    }

    /// `c · S`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for row in &mut out.values {
            row.iter_mut().for_each(|v| *v *= c);
        }
        out.tail_estimates.iter_mut().for_each(|t| *t *= c.norm());
        out
    }

    /// Entrywise sum of two tables on the same grid and index set.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lambdas != other.lambdas || self.alpha_limits != other.alpha_limits || self.m_indices != other.m_indices
        {
            return Err(invalid("table", "tables differ in grid or index set"));
        }
        let mut out = self.clone();
        for (row, o) in out.values.iter_mut().zip(&other.values) {
            row.iter_mut().zip(o).for_each(|(a, b)| *a += b);
        }
        for (t, o) in out.tail_estimates.iter_mut().zip(&other.tail_estimates) {
            *t += o;
        }
        Ok(out)
    }

    /// Table of `amplitude · f(z/ρ, t/ρ²)` obtained from this one by
    /// `R(λ) ↦ amplitude · ρ^Q · R(ρ²λ)` on the grid `λ/ρ²`.
    pub fn dilated(&self, rho: f64, amplitude: f64) -> Self {
        let q = 2 * self.n as i32 + 2;
        let factor = amplitude * rho.powi(q);
        let mut out = self.scaled(Complex64::new(factor, 0.0));
        out.lambdas.iter_mut().for_each(|l| *l /= rho * rho);
        out.weights.iter_mut().for_each(|w| *w *= rho.powi(-q));
        out
    }

    pub fn grid(&self) -> SpectralGrid {
        SpectralGrid {
            n: self.n,
            lambdas: self.lambdas.clone(),
            weights: self.weights.clone(),
        }
    }

    /// Contribution of `0 < |λ| < min|λ_grid|` to `∫ q(λ) |λ|ⁿ dλ`, assuming
    /// `|λ|ⁿ q(λ)` is flat there (true for the full Plancherel and inversion
    /// integrands, whose `λ → 0` limits are finite).
    fn inner_tail<T>(&self, per_row: impl Fn(usize) -> T) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
    {
        let mut total = T::default();
        for positive in [false, true] {
            let best = self
                .lambdas
                .iter()
                .enumerate()
                .filter(|(_, &l)| (l > 0.0) == positive)
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
            if let Some((i, &l)) = best {
                total = total + per_row(i) * l.abs().powi(self.n as i32 + 1);
            }
        }
        total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid("table", e.to_string()))
    }
}

/// HS norm of the discarded coefficients `|α| > limit`, extrapolated from the
/// decay of the last shells.
///
/// Shell norms of smooth inputs behave like `P(s)·q^s`, whose ratios approach
/// `q` from above; the largest recent ratio and a factor 2 keep the estimate
/// on the safe side of the true tail.
fn row_tail_estimate(n: usize, row: &[Complex64], n_m: usize, limit: u32) -> f64 {
    if limit < 3 {
        return f64::INFINITY;
    }
    let alphas = graded_alphas(n, limit);
    let block = alphas.len();
    let mut shells = vec![0.0f64; limit as usize + 1];
    for mi in 0..n_m {
        for (a, v) in alphas.iter().zip(&row[mi * block..(mi + 1) * block]) {
            shells[a.iter().sum::<u32>() as usize] += v.norm_sqr();
        }
    }
    let shells: Vec<f64> = shells.into_iter().map(f64::sqrt).collect();
    let a = limit as usize;
    let last = shells[a];
    if last == 0.0 {
        return 0.0;
    }
    let q = (a - 2..=a).map(|s| shells[s] / shells[s - 1]).fold(0.0f64, |m, r| {
        if r.is_finite() {
            m.max(r)
        } else {
            f64::INFINITY
        }
    });
    if q < 0.999 {
        2.0 * last * q / (1.0 - q * q).sqrt()
    } else {
        // No visible decay: the last shell repeated over as many shells again.
        2.0 * last * (a as f64 + 1.0).sqrt()
    }
}

/// Coefficient table of `f` on a prepared grid.
pub fn spectral_table_on(
    f: &PolyradialSpec,
    grid: &SpectralGrid,
    truncation: &Truncation,
    rules: &TransformRules,
) -> Result<SpectralCoefficients> {
    let limits: Vec<u32> = grid.lambdas.iter().map(|&l| truncation.alpha_limit(f.n, l)).collect();
    spectral_table_with_limits(f, grid, truncation.m_max(), &limits, rules)
}

/// Coefficient table with an explicit `|α|` limit per row, e.g. to reproduce
/// the index sets of another table.
pub fn spectral_table_with_limits(
    f: &PolyradialSpec,
    grid: &SpectralGrid,
    m_max: u32,
    limits: &[u32],
    rules: &TransformRules,
) -> Result<SpectralCoefficients> {
    f.validate()?;
    rules.validate()?;
    if grid.n != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: grid.n,
        });
    }
    if limits.len() != grid.lambdas.len() {
        return Err(invalid("limits", "one alpha limit per grid point"));
    }
    let n = f.n;
    let ms = angular_indices(n, m_max);
    let values: Vec<Vec<Complex64>> = grid
        .lambdas
        .par_iter()
        .zip(limits.par_iter())
        .map(|(&l, &lim)| spectral_row(f, l, &ms, lim, rules))
        .collect::<Result<_>>()?;
    let tail_estimates = values
        .iter()
        .zip(limits)
        .map(|(row, &lim)| row_tail_estimate(n, row, ms.len(), lim))
        .collect();
    Ok(SpectralCoefficients {
        n,
        lambdas: grid.lambdas.clone(),
        weights: grid.weights.clone(),
        m_indices: ms,
        alpha_limits: limits.to_vec(),
        values,
        tail_estimates,
        scale: 1.0,
    })
}

/// Coefficient table of `f` on a log-spaced grid.
pub fn spectral_table(
    f: &PolyradialSpec,
    grid: &LambdaGrid,
    truncation: &Truncation,
    rules: &TransformRules,
) -> Result<SpectralCoefficients> {
    spectral_table_on(f, &grid.build(f.n)?, truncation, rules)
}

/// `2^{n−1} / π^{n+1}`.
pub fn plancherel_constant(n: usize) -> f64 {
    2f64.powi(n as i32 - 1) / PI.powi(n as i32 + 1)
}

/// `4ⁿ / (2π)^{n+1}`.
pub fn inversion_constant(n: usize) -> f64 {
    4f64.powi(n as i32) / (2.0 * PI).powi(n as i32 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    /// `‖f‖₂²` by direct quadrature.
    pub lhs: f64,
    /// `2^{n−1}/π^{n+1} ∫ ‖𝓕(f)(λ)‖²_HS |λ|ⁿ dλ`, including the `|λ| < λ_min` tail.
    pub rhs: f64,
    /// `rhs / lhs`, or 1 when both vanish.
    pub ratio: f64,
    /// Part of `rhs` contributed by the extrapolated inner tail.
    pub inner_tail: f64,
}

pub fn plancherel_check(f: &PolyradialSpec, table: &SpectralCoefficients) -> Result<PlancherelReport> {
    if f.n != table.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: table.n,
        });
    }
    let lhs = f.l2_norm_sqr()?;
    let c = plancherel_constant(table.n);
    let hs2 = |i: usize| table.hs_norm_at(i).powi(2);
    let grid: f64 = (0..table.rows()).map(|i| table.weights[i] * hs2(i)).sum();
    let tail = table.inner_tail(hs2);
    let rhs = c * (grid + tail);
    let ratio = if lhs == 0.0 && rhs == 0.0 { 1.0 } else { rhs / lhs };
    Ok(PlancherelReport {
        lhs,
        rhs,
        ratio,
        inner_tail: c * tail,
    })
}

/// `f(0, 0)` recovered as `4ⁿ/(2π)^{n+1} ∫ Σ_α R(λ, 0, α) |λ|ⁿ dλ`.
///
/// At the origin the trace of `Π_λ*(0)𝓕(f)(λ)` reduces to the diagonal
/// `m = 0` coefficients, so only radial tables are accepted.
pub fn invert_at_origin(table: &SpectralCoefficients) -> Result<Complex64> {
    if table.rows() == 0 {
        return Err(Error::EmptyTable);
    }
    let zero = vec![0i32; table.n];
    for i in 0..table.rows() {
        for e in table.entries(i) {
            if e.m != zero.as_slice() && e.value != Complex64::new(0.0, 0.0) {
                return Err(Error::Unsupported(
                    "inversion away from the radial (m = 0) sector".into(),
                ));
            }
        }
    }
    let trace = |i: usize| -> Complex64 {
        table
            .entries(i)
            .filter(|e| e.m == zero.as_slice())
            .map(|e| e.value)
            .sum()
    };
    let grid: Complex64 = (0..table.rows()).map(|i| trace(i) * table.weights[i]).sum();
    let tail = table.inner_tail(trace);
    Ok((grid + tail) * inversion_constant(table.n))
}

/// Outcome of measuring the transform's normalization on the reference Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Plancherel ratio `rhs/lhs` before calibration.
    pub kappa: f64,
    /// Inversion ratio `recovered f(0,0) / f(0,0)` before calibration.
    pub inversion_ratio: f64,
}

impl Calibration {
    pub fn identity() -> Self {
        Self {
            kappa: 1.0,
            inversion_ratio: 1.0,
        }
    }

    /// Coefficient multiplier that makes the Plancherel ratio exactly one on the reference.
    pub fn coefficient_scale(&self) -> f64 {
        self.kappa.powf(-0.5)
    }

    pub fn apply(&self, table: &SpectralCoefficients) -> SpectralCoefficients {
        let c = self.coefficient_scale();
        let mut out = table.scaled(Complex64::new(c, 0.0));
        out.scale *= c;
        out
    }
}

/// Measure `κ` on `e^{−|z|²−t²}`.
pub fn calibrate(n: usize, grid: &LambdaGrid, truncation: &Truncation, rules: &TransformRules) -> Result<Calibration> {
    let f = PolyradialSpec::gaussian(n, 1.0, 1.0, 1.0);
    let table = spectral_table(&f, grid, truncation, rules)?;
    let report = plancherel_check(&f, &table)?;
    let recovered = invert_at_origin(&table)?;
    Ok(Calibration {
        kappa: report.ratio,
        inversion_ratio: recovered.re,
    })
}
