//! Closed forms for the anisotropic Gaussian `f(z, t) = e^{−b|z|² − c t²}`.
//!
//! With `∫₀^∞ e^{−sx} L_k(x) dx = (s−1)^k / s^{k+1}`, every radial integral is
//! `½ (b−|λ|)^k / (b+|λ|)^{k+1}` and the time integral is `√(π/c) e^{−λ²/4c}`.

use std::f64::consts::PI;

/// `R_f(λ, 0, α)` for the Gaussian with radial width `b` and time width `c`.
pub fn gaussian_coefficient(b: f64, c: f64, lambda: f64, alpha: &[u32]) -> f64 {
    let l = lambda.abs();
    let n = alpha.len() as i32;
    let time = (PI / c).sqrt() * (-lambda * lambda / (4.0 * c)).exp();
    let radial: f64 = alpha
        .iter()
        .map(|&k| 0.5 * ((b - l) / (b + l)).powi(k as i32) / (b + l))
        .product();
    (2.0 * PI).powi(n) * time * radial
}

/// `‖𝓕(f)(λ)‖²_HS` summed over all `α` (the Gaussian lives in `m = 0`).
pub fn gaussian_hs_sqr(n: usize, b: f64, c: f64, lambda: f64) -> f64 {
    let l = lambda.abs();
    (2.0 * PI).powi(2 * n as i32) * (PI / c) * (-lambda * lambda / (2.0 * c)).exp() / (16.0 * b * l).powi(n as i32)
}

/// `Σ_α R_f(λ, 0, α)`, which does not depend on the radial width.
pub fn gaussian_trace(n: usize, c: f64, lambda: f64) -> f64 {
    let l = lambda.abs();
    (2.0 * PI).powi(n as i32) * (PI / c).sqrt() * (-lambda * lambda / (4.0 * c)).exp() / (4.0 * l).powi(n as i32)
}

/// `‖f‖₂² = (π/2b)ⁿ · √(π/2c)`.
pub fn gaussian_l2_sqr(n: usize, b: f64, c: f64) -> f64 {
    (PI / (2.0 * b)).powi(n as i32) * (PI / (2.0 * c)).sqrt()
}

/// `‖f‖_{L¹} = (π/b)ⁿ · √(π/c)`.
pub fn gaussian_l1(n: usize, b: f64, c: f64) -> f64 {
    (PI / b).powi(n as i32) * (PI / c).sqrt()
}
