//! The weighted spectral integral
//!
//! ```text
//! LHS(f) = ∫ Σ_{m,α} |R_f(λ, m, α)|^p ((2|α| + n)|λ|)^{−σ} |λ|ⁿ dλ,
//! ```
//!
//! its split `S₁ + S₂` at `|λ| = γ`, and sweeps of `LHS` over dilated atoms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{build_atom, dilate_atom, moment_order, validate_atom, AtomParams, AtomSpec};
use crate::error::{invalid, Error, Result};
use crate::fourier::{
    spectral_table, spectral_table_with_limits, LambdaGrid, SpectralCoefficients, TransformRules, Truncation,
};
use crate::group::homogeneous_dimension;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaleyParams {
    pub p: f64,
    pub n: usize,
    pub sigma: f64,
    /// Allows `σ` outside the admissible window; such runs are labelled as probes.
    #[serde(default)]
    pub probe: bool,
}

impl PaleyParams {
    pub fn new(p: f64, n: usize, sigma: f64) -> Self {
        Self {
            p,
            n,
            sigma,
            probe: false,
        }
    }

    pub fn q(&self) -> f64 {
        homogeneous_dimension(self.n) as f64
    }

    pub fn j(&self) -> u32 {
        moment_order(self.n, self.p)
    }

    pub fn in_range(&self) -> bool {
        sigma_range(self.p, self.n).is_ok_and(|(lo, hi)| self.sigma >= lo && self.sigma < hi)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = sigma_range(self.p, self.n)?;
        if !self.sigma.is_finite() {
            return Err(invalid("sigma", "must be finite"));
        }
        if !self.probe && !(self.sigma >= lo && self.sigma < hi) {
            return Err(Error::SigmaOutOfRange {
                sigma: self.sigma,
                min: lo,
                max: hi,
            });
        }
        Ok(())
    }
}

/// Admissible window `[Q(2−p)/2, Q/2 + p(J+1)/2)`.
pub fn sigma_range(p: f64, n: usize) -> Result<(f64, f64)> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid("p", format!("need 0 < p ≤ 1, got {p}")));
    }
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    let q = homogeneous_dimension(n) as f64;
    let j = moment_order(n, p) as f64;
    Ok((q * (2.0 - p) / 2.0, q / 2.0 + p * (j + 1.0) / 2.0))
}

/// How the `(2|α| + n)` weight meets the Hilbert–Schmidt norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightReading {
    /// Every coefficient carries its own weight.
    #[default]
    PerCoefficient,
    /// `‖𝓕(f)(λ)‖_HS^p` weighted once with `α` at the row's truncation limit.
    HsAtAlphaMax,
}

/// Per-row contributions `w_i · Σ (…)`; their sum is the grid integral.
fn row_terms(table: &SpectralCoefficients, params: &PaleyParams, reading: WeightReading) -> Vec<f64> {
    let n = table.n as f64;
    let (p, sigma) = (params.p, params.sigma);
    (0..table.rows())
        .map(|i| {
            let lam = table.lambdas[i].abs();
            let inner = match reading {
                WeightReading::PerCoefficient => table
                    .entries(i)
                    .map(|e| {
                        let v = e.value.norm();
                        if v == 0.0 {
                            0.0
                        } else {
                            v.powf(p) * ((2.0 * e.alpha_abs as f64 + n) * lam).powf(-sigma)
                        }
                    })
                    .sum::<f64>(),
                WeightReading::HsAtAlphaMax => {
                    let hs = table.hs_norm_at(i);
                    let a = table.alpha_limits[i] as f64;
                    if hs == 0.0 {
                        0.0
                    } else {
                        hs.powf(p) * ((2.0 * a + n) * lam).powf(-sigma)
                    }
                }
            };
            table.weights[i] * inner
        })
        .collect()
}

fn check_table(table: &SpectralCoefficients, params: &PaleyParams) -> Result<()> {
    params.validate()?;
    if table.rows() == 0 {
        return Err(Error::EmptyTable);
    }
    if table.n != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: table.n,
        });
    }
    Ok(())
}

/// `LHS` over the table's grid, per-coefficient reading.
pub fn paley_lhs(table: &SpectralCoefficients, params: &PaleyParams) -> Result<f64> {
    paley_lhs_with(table, params, WeightReading::PerCoefficient)
}

pub fn paley_lhs_with(table: &SpectralCoefficients, params: &PaleyParams, reading: WeightReading) -> Result<f64> {
    check_table(table, params)?;
    Ok(row_terms(table, params, reading).iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// `0 < |λ| ≤ γ`
    pub s1: f64,
    /// `|λ| > γ`
    pub s2: f64,
    /// `γ` lies outside the span of grid magnitudes, so one part is empty.
    pub gamma_outside_grid: bool,
}

impl Split {
    pub fn total(&self) -> f64 {
        self.s1 + self.s2
    }
}

pub fn split_s1_s2(table: &SpectralCoefficients, params: &PaleyParams, gamma: f64) -> Result<Split> {
    split_with(table, params, gamma, WeightReading::PerCoefficient)
}

pub fn split_with(
    table: &SpectralCoefficients,
    params: &PaleyParams,
    gamma: f64,
    reading: WeightReading,
) -> Result<Split> {
    check_table(table, params)?;
    if !(gamma > 0.0) {
        return Err(invalid("gamma", format!("must be positive, got {gamma}")));
    }
    let terms = row_terms(table, params, reading);
    let (mut s1, mut s2) = (0.0, 0.0);
    for (t, l) in terms.iter().zip(&table.lambdas) {
        if l.abs() <= gamma {
            s1 += t;
        } else {
            s2 += t;
        }
    }
    let lo = table.lambdas.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let hi = table.lambdas.iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok(Split {
        s1,
        s2,
        gamma_outside_grid: gamma < lo || gamma >= hi,
    })
}

fn gamma_denominator(params: &PaleyParams) -> f64 {
    params.p * (params.j() as f64 + 1.0) / 2.0 + params.q() / 2.0 - params.sigma
}

fn gamma_numerator(params: &PaleyParams) -> f64 {
    params.q() * (1.0 - params.p) - params.p * (params.j() as f64 + 1.0)
}

/// `γ = R^{(Q(1−p) − p(J+1)) / (p(J+1)/2 + Q/2 − σ)}`.
///
/// Close to the top of the `σ` window the exponent is large and `γ` can
/// overflow or underflow; [`gamma_star_ln`] stays finite there.
pub fn gamma_star(params: &PaleyParams, radius: f64) -> Result<f64> {
    gamma_star_ln(params, radius).map(f64::exp)
}

/// `ln γ*`.
pub fn gamma_star_ln(params: &PaleyParams, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(invalid("R", format!("must be positive, got {radius}")));
    }
    let den = gamma_denominator(params);
    if !(den > 0.0) {
        let (lo, hi) = sigma_range(params.p, params.n)?;
        return Err(Error::SigmaOutOfRange {
            sigma: params.sigma,
            min: lo,
            max: hi,
        });
    }
    Ok(gamma_numerator(params) / den * radius.ln())
}

/// Bounds on `log γ` for `0 < R < 1`:
/// `(Q(2−p)/2)/(Q(2−p)/4 − σ)·log R ≤ log γ ≤ (Q(1−p) − p(J+1))/(p(J+1)/2 + Q/2 − σ)·log R`.
pub fn gamma_window(params: &PaleyParams, radius: f64) -> (f64, f64) {
    let q = params.q();
    let p = params.p;
    let ln_r = radius.ln();
    let lower = (q * (2.0 - p) / 2.0) / (q * (2.0 - p) / 4.0 - params.sigma) * ln_r;
    let upper = gamma_numerator(params) / gamma_denominator(params) * ln_r;
    (lower, upper)
}

pub fn in_gamma_window(params: &PaleyParams, radius: f64, gamma: f64) -> bool {
    in_gamma_window_ln(params, radius, gamma.ln())
}

/// [`in_gamma_window`] for `ln γ`.
pub fn in_gamma_window_ln(params: &PaleyParams, radius: f64, ln_gamma: f64) -> bool {
    let (lo, hi) = gamma_window(params, radius);
    let g = ln_gamma;
    let slack = 1e-12 * (lo.abs() + hi.abs()).max(1.0);
    lo - slack <= g && g <= hi + slack
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponents {
    /// `Q(p−1) + p(J+1)`
    pub s1_r: f64,
    /// `p(J+1)/2 + Q/2 − σ`
    pub s1_gamma: f64,
    /// `−Q(2−p)/2`
    pub s2_r: f64,
    /// `Q(2−p)/4 − σ`
    pub s2_gamma: f64,
}

pub fn predicted_exponents(params: &PaleyParams) -> PredictedExponents {
    let q = params.q();
    let p = params.p;
    let j1 = params.j() as f64 + 1.0;
    PredictedExponents {
        s1_r: q * (p - 1.0) + p * j1,
        s1_gamma: p * j1 / 2.0 + q / 2.0 - params.sigma,
        s2_r: -q * (2.0 - p) / 2.0,
        s2_gamma: q * (2.0 - p) / 4.0 - params.sigma,
    }
}

/// Least-squares slope of `ln y` against `ln x` over points with `y > 0`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaRule {
    /// `γ = gamma_star(R)`.
    Star,
    Fixed {
        value: f64,
    },
}

/// Atom construction knobs for a sweep; `n` and `p` come from the Paley parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomOptions {
    /// Defaults to `J`.
    #[serde(default)]
    pub s: Option<i64>,
    #[serde(default)]
    pub basis_size: Option<usize>,
    #[serde(default)]
    pub smoothness: Option<u32>,
    #[serde(default)]
    pub seed: u64,
}

impl AtomOptions {
    pub fn params(&self, params: &PaleyParams, radius: f64) -> AtomParams {
        let mut a = AtomParams::new(params.n, params.p, self.s.unwrap_or(params.j() as i64), radius);
        a.basis_size = self.basis_size;
        if let Some(k) = self.smoothness {
            a.smoothness = k;
        }
        a.seed = self.seed;
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub params: PaleyParams,
    pub radii: Vec<f64>,
    pub atom: AtomOptions,
    pub grid: LambdaGrid,
    pub truncation: Truncation,
    pub rules: TransformRules,
    pub gamma: GammaRule,
    /// Largest `max LHS / min LHS` still called bounded.
    pub bound_factor: f64,
    /// Smallest end-segment log-log slope counted as divergence.
    pub divergence_slope: f64,
    /// Radii re-evaluated by a direct transform of the dilated atom.
    pub cross_checks: usize,
}

impl SweepConfig {
    pub fn new(params: PaleyParams, radii: Vec<f64>) -> Self {
        Self {
            params,
            radii,
            atom: AtomOptions::default(),
            grid: LambdaGrid::default(),
            truncation: Truncation::Energy {
                m_max: 0,
                alpha_min: 48,
                energy_max: 40.0,
                alpha_cap: 40_000,
            },
            rules: TransformRules::default(),
            gamma: GammaRule::Star,
            bound_factor: 10.0,
            divergence_slope: 0.05,
            cross_checks: 2,
        }
    }
}

/// `count` radii log-spaced over `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (count - 1) as f64).exp())
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub gamma: f64,
    pub s1: f64,
    pub s2: f64,
    pub lhs: f64,
    /// LHS under [`WeightReading::HsAtAlphaMax`].
    pub lhs_alternate: f64,
    /// Membership of `γ` in the admissible window, checked for `R < 1`.
    pub gamma_in_window: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    #[serde(rename = "R")]
    pub radius: f64,
    pub fast: f64,
    pub direct: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Slopes {
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub lhs: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub small_r: bool,
    pub large_r: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaleySweepReport {
    pub params: PaleyParams,
    pub sigma_range: (f64, f64),
    pub predicted: PredictedExponents,
    pub rows: Vec<SweepRow>,
    pub slopes: Slopes,
    pub max_min_ratio: f64,
    pub divergence: Divergence,
    pub bounded: bool,
    pub cross_checks: Vec<CrossCheck>,
    /// Largest moment residual of the base atom.
    pub atom_moment_residual: f64,
    /// Set for runs outside the admissible window.
    pub label: Option<String>,
}

pub const PROBE_LABEL: &str = "non-theorem probe";

impl PaleySweepReport {
    /// Header plus one line per radius; fixed formatting, so equal inputs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,sigma,n,R,gamma,S1,S2,LHS,bounded\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{}\n",
                self.params.p, self.params.sigma, self.params.n, r.radius, r.gamma, r.s1, r.s2, r.lhs, self.bounded
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Growth toward an end of the sorted sweep: three strictly monotone points
/// whose log-log slope exceeds `min_slope` in magnitude.
fn diverges(radii: &[f64], values: &[f64], min_slope: f64) -> Divergence {
    let k = values.len();
    if k < 3 {
        return Divergence {
            small_r: false,
            large_r: false,
        };
    }
    let seg = |a: usize, b: usize| (values[b] / values[a]).ln() / (radii[b] / radii[a]).ln();
    let large = values[k - 3] < values[k - 2] && values[k - 2] < values[k - 1] && seg(k - 3, k - 1) > min_slope;
    let small = values[0] > values[1] && values[1] > values[2] && seg(0, 2) < -min_slope;
    Divergence {
        small_r: small,
        large_r: large,
    }
}

fn row_for(
    base: &SpectralCoefficients,
    params: &PaleyParams,
    config: &SweepConfig,
    radius: f64,
    amplitude: f64,
) -> Result<SweepRow> {
    let table = base.dilated(radius, amplitude);
    let (gamma, ln_gamma) = match config.gamma {
        GammaRule::Fixed { value } => (value, value.ln()),
        GammaRule::Star => {
            let ln_g = match gamma_star_ln(params, radius) {
                Ok(g) => g,
                Err(_) if params.probe => 0.0,
                Err(e) => return Err(e),
            };
            // Past the float range every finite grid splits as it would at the extreme float.
            (ln_g.exp().clamp(f64::MIN_POSITIVE, f64::MAX), ln_g)
        }
    };
    let split = split_s1_s2(&table, params, gamma)?;
    let lhs = paley_lhs(&table, params)?;
    let lhs_alternate = paley_lhs_with(&table, params, WeightReading::HsAtAlphaMax)?;
    let gamma_in_window = (radius < 1.0 && params.in_range()).then(|| in_gamma_window_ln(params, radius, ln_gamma));
    Ok(SweepRow {
        radius,
        gamma,
        s1: split.s1,
        s2: split.s2,
        lhs,
        lhs_alternate,
        gamma_in_window,
    })
}

/// Evaluate `LHS` along the family `a_R = dilate_atom(a₁, R)`.
///
/// The base atom's table is computed once; each `a_R` uses the exact
/// covariance `R_{a_R}(λ) = R^{Q(1−1/p)} R_{a₁}(R²λ)` on the grid `λ/R²`, and a
/// few radii are recomputed from scratch as a cross-check.
pub fn sweep(config: &SweepConfig) -> Result<PaleySweepReport> {
    let params = config.params;
    params.validate()?;
    if config.radii.is_empty() || config.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(invalid("radii", "need at least one positive radius"));
    }
    if let GammaRule::Fixed { value } = config.gamma {
        if !(value > 0.0) {
            return Err(invalid("gamma", "fixed gamma must be positive"));
        }
    }
    let base_atom = build_atom(&config.atom.params(&params, 1.0))?;
    let base = spectral_table(&base_atom.profile, &config.grid, &config.truncation, &config.rules)?;
    let q = params.q();
    let amp = |r: f64| r.powf(-q / params.p);

    let mut radii = config.radii.clone();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let rows: Vec<SweepRow> = radii
        .par_iter()
        .map(|&r| row_for(&base, &params, config, r, amp(r)))
        .collect::<Result<_>>()?;

    let picks = cross_check_radii(&radii, config.cross_checks);
    let cross_checks = picks
        .par_iter()
        .map(|&r| cross_check(&base_atom, &base, &params, config, r))
        .collect::<Result<Vec<_>>>()?;

    let lhs: Vec<f64> = rows.iter().map(|r| r.lhs).collect();
    let slopes = Slopes {
        s1: log_log_slope(&radii, &rows.iter().map(|r| r.s1).collect::<Vec<_>>()),
        s2: log_log_slope(&radii, &rows.iter().map(|r| r.s2).collect::<Vec<_>>()),
        lhs: log_log_slope(&radii, &lhs),
    };
    let hi = lhs.iter().copied().fold(f64::MIN, f64::max);
    let lo = lhs.iter().copied().fold(f64::MAX, f64::min);
    let max_min_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let divergence = diverges(&radii, &lhs, config.divergence_slope);
    let bounded = max_min_ratio <= config.bound_factor && !divergence.small_r && !divergence.large_r;
    Ok(PaleySweepReport {
        params,
        sigma_range: sigma_range(params.p, params.n)?,
        predicted: predicted_exponents(&params),
        rows,
        slopes,
        max_min_ratio,
        divergence,
        bounded,
        cross_checks,
        atom_moment_residual: validate_atom(&base_atom).max_moment_residual,
        label: (!params.in_range()).then(|| PROBE_LABEL.to_string()),
    })
}

/// The two extreme radii first, then evenly spaced interior ones.
fn cross_check_radii(radii: &[f64], count: usize) -> Vec<f64> {
    let count = count.min(radii.len());
    match count {
        0 => Vec::new(),
        1 => vec![radii[radii.len() - 1]],
        _ => (0..count).map(|i| radii[i * (radii.len() - 1) / (count - 1)]).collect(),
    }
}

fn cross_check(
    base_atom: &AtomSpec,
    base: &SpectralCoefficients,
    params: &PaleyParams,
    config: &SweepConfig,
    radius: f64,
) -> Result<CrossCheck> {
    let fast_table = base.dilated(radius, radius.powf(-params.q() / params.p));
    let fast = paley_lhs(&fast_table, params)?;
    let atom = dilate_atom(base_atom, radius)?;
    let direct_table = spectral_table_with_limits(
        &atom.profile,
        &fast_table.grid(),
        config.truncation.m_max(),
        &fast_table.alpha_limits,
        &config.rules,
    )?;
    let direct = paley_lhs(&direct_table, params)?;
    Ok(CrossCheck {
        radius,
        fast,
        direct,
        rel_diff: (fast - direct).abs() / fast.abs().max(f64::MIN_POSITIVE),
    })
}
