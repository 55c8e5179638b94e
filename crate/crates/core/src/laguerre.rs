//! Associated Laguerre polynomials `L_k^δ` and the normalized Laguerre
//! functions
//!
//! ```text
//! ℓ_k^δ(x) = (k! / Γ(k+δ+1))^{1/2} · e^{−x/2} · x^{δ/2} · L_k^δ(x),
//! ```
//!
//! which form an orthonormal basis of `L²((0, ∞), dx)` for each fixed type `δ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Degree `k` and type `δ` of a Laguerre function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LaguerreOrder {
    pub degree: u32,
    pub kind: u32,
}

impl LaguerreOrder {
    pub fn new(degree: i64, kind: i64) -> Result<Self> {
        if degree < 0 {
            return Err(invalid(
                "k",
                format!("Laguerre degree must be nonnegative, got {degree}"),
            ));
        }
        if kind < 0 {
            return Err(invalid(
                "delta",
                format!("Laguerre type must be nonnegative, got {kind}"),
            ));
        }
        Ok(Self {
            degree: degree as u32,
            kind: kind as u32,
        })
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(
            "x",
            format!("argument must be finite and nonnegative, got {x}"),
        ));
    }
    Ok(())
}

/// `L_k^δ(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+δ−x) L_k − (k+δ) L_{k−1}`.
pub fn laguerre_poly(k: i64, delta: i64, x: f64) -> Result<f64> {
    let order = LaguerreOrder::new(k, delta)?;
    check_x(x)?;
    Ok(laguerre_poly_unchecked(order.degree, order.kind, x))
}

pub(crate) fn laguerre_poly_unchecked(k: u32, delta: u32, x: f64) -> f64 {
    let d = delta as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + d - x;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + d - x) * cur - (jf + d) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Natural log of the normalization `(k! / Γ(k+δ+1))^{1/2}`.
fn log_norm(k: u32, delta: u32) -> f64 {
    0.5 * (libm::lgamma(k as f64 + 1.0) - libm::lgamma((k + delta) as f64 + 1.0))
}

/// `ℓ_k^δ(x)`, assembled in the log domain so that large `k + δ` cannot overflow
/// the factorials. When the bare polynomial itself overflows, the normalized
/// recurrence takes over.
pub fn laguerre_fn(k: i64, delta: i64, x: f64) -> Result<f64> {
    let order = LaguerreOrder::new(k, delta)?;
    check_x(x)?;
    let (k, delta) = (order.degree, order.kind);
    let poly = laguerre_poly_unchecked(k, delta, x);
    if !poly.is_finite() {
        return Ok(laguerre_fn_all(k, delta, x)[k as usize]);
    }
    if poly == 0.0 || (x == 0.0 && delta > 0) {
        return Ok(0.0);
    }
    let log_prefactor = if delta == 0 { 0.0 } else { 0.5 * delta as f64 * x.ln() };
    let log_mag = log_norm(k, delta) - 0.5 * x + log_prefactor + poly.abs().ln();
    Ok(poly.signum() * log_mag.exp())
}

/// `[ℓ_0^δ(x), …, ℓ_{k_max}^δ(x)]` by the normalized recurrence
///
/// ```text
/// √((k+1)(k+1+δ)) ℓ_{k+1} = (2k+1+δ−x) ℓ_k − √(k(k+δ)) ℓ_{k−1},
/// ```
///
/// with a running log-scale so that the seed `e^{−x/2} x^{δ/2} / √δ!` never underflows.
pub fn laguerre_fn_all(k_max: u32, delta: u32, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max as usize + 1];
    laguerre_fn_fill(delta, x, &mut out);
    out
}

/// Fills `out[k] = ℓ_k^δ(x)` for `k < out.len()`.
pub fn laguerre_fn_fill(delta: u32, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    Recurrence::new(delta, out.len() as u32 - 1).fill(x, out);
}

/// Precomputed coefficients of the normalized recurrence for one type `δ`,
/// reusable across many arguments `x`.
#[derive(Debug, Clone)]
pub struct Recurrence {
    delta: u32,
    /// `2k + 1 + δ`
    diag: Vec<f64>,
    /// `√(k(k+δ))`
    lower: Vec<f64>,
    /// `1 / √((k+1)(k+1+δ))`
    inv_upper: Vec<f64>,
    log_norm0: f64,
}

impl Recurrence {
    pub fn new(delta: u32, k_max: u32) -> Self {
        let d = delta as f64;
        let ks = 0..k_max as usize;
        Self {
            delta,
            diag: ks.clone().map(|k| 2.0 * k as f64 + 1.0 + d).collect(),
            lower: ks.clone().map(|k| (k as f64 * (k as f64 + d)).sqrt()).collect(),
            inv_upper: ks
                .map(|k| 1.0 / ((k as f64 + 1.0) * (k as f64 + 1.0 + d)).sqrt())
                .collect(),
            log_norm0: -0.5 * libm::lgamma(d + 1.0),
        }
    }

    pub fn k_max(&self) -> u32 {
        self.diag.len() as u32
    }

    /// Writes `ℓ_k^δ(x)` for `k < out.len()`; `out` may not exceed `k_max + 1`.
    pub fn fill(&self, x: f64, out: &mut [f64]) {
        assert!(out.len() <= self.diag.len() + 1, "recurrence prepared for fewer orders");
        if out.is_empty() {
            return;
        }
        if x == 0.0 && self.delta > 0 {
            out.fill(0.0);
            return;
        }
        let d = self.delta as f64;
        let log_seed = -0.5 * x + if self.delta == 0 { 0.0 } else { 0.5 * d * x.ln() } + self.log_norm0;

        const RESCALE: f64 = 1e200;
        let mut log_scale = log_seed;
        // While e^{log_scale} is a normal float a plain product is exact enough.
        let mut factor = log_scale.exp();
        let mut prev = 0.0;
        let mut cur = 1.0;
        let emit = |cur: f64, factor: f64, log_scale: f64| {
            if factor >= f64::MIN_POSITIVE {
                cur * factor
            } else {
                scaled(cur, log_scale)
            }
        };
        out[0] = emit(cur, factor, log_scale);
        for k in 0..out.len() - 1 {
            let next = ((self.diag[k] - x) * cur - self.lower[k] * prev) * self.inv_upper[k];
            prev = cur;
            cur = next;
            if cur.abs() > RESCALE {
                prev /= RESCALE;
                cur /= RESCALE;
                log_scale += RESCALE.ln();
                factor = log_scale.exp();
            }
            out[k + 1] = emit(cur, factor, log_scale);
        }
    }
}

fn scaled(value: f64, log_scale: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    let log_mag = value.abs().ln() + log_scale;
    if log_mag < -745.0 {
        0.0
    } else {
        value.signum() * log_mag.exp()
    }
}

/// Beyond this argument `|ℓ_k^δ| < 1e−12`; used to truncate `(0, ∞)` integrals.
pub fn decay_cutoff(k: u32, delta: u32) -> f64 {
    8.0 * (k as f64 + delta as f64 + 10.0)
}
