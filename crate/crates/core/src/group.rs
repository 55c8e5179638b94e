//! Heisenberg group arithmetic and homogeneous geometry.
//!
//! Points are `(z, t)` with `z ∈ ℂⁿ`, `t ∈ ℝ`, multiplied by
//! `(z, t)·(z', t') = (z + z', t + t' + 2 Im(z·z̄'))`. The anisotropic dilations
//! `(z, t) ↦ (Rz, R²t)` are automorphisms with Jacobian `R^Q`, `Q = 2n + 2`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;

/// Homogeneous dimension `2n + 2` of ℍⁿ.
pub fn homogeneous_dimension(n: usize) -> usize {
    2 * n + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl GroupPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![Complex64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Squared Euclidean norm of the `z` component.
    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// `Σ_k z_k · conj(w_k)`.
fn hermitian_dot(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn multiply(u: &GroupPoint, v: &GroupPoint) -> Result<GroupPoint> {
    u.check_same_dim(v)?;
    let z = u.z.iter().zip(&v.z).map(|(a, b)| a + b).collect();
    let t = u.t + v.t + 2.0 * hermitian_dot(&u.z, &v.z).im;
    Ok(GroupPoint { z, t })
}

pub fn inverse(u: &GroupPoint) -> GroupPoint {
    GroupPoint {
        z: u.z.iter().map(|c| -c).collect(),
        t: -u.t,
    }
}

pub fn dilate(u: &GroupPoint, r: f64) -> Result<GroupPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("R", format!("dilation factor must be positive, got {r}")));
    }
    Ok(GroupPoint {
        z: u.z.iter().map(|c| c * r).collect(),
        t: r * r * u.t,
    })
}

/// `(|z|⁴ + 4t²)^{1/4}`.
pub fn homogeneous_norm(u: &GroupPoint) -> f64 {
    let z2 = u.z_norm_sqr();
    (z2 * z2 + 4.0 * u.t * u.t).sqrt().sqrt()
}

/// Membership in `B(center, radius) = {v : |center⁻¹·v| < radius}`, the ball of
/// the left-invariant distance.
pub fn ball_contains(center: &GroupPoint, radius: f64, v: &GroupPoint) -> Result<bool> {
    let w = multiply(&inverse(center), v)?;
    Ok(homogeneous_norm(&w) < radius)
}

fn unit_ball_cache() -> &'static Mutex<HashMap<usize, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Volume of the unit homogeneous ball in ℍⁿ.
///
/// Writing `U = |z|²`, the ball is `U² + 4t² < 1`; the `t`-section has length
/// `√(1 − U²)` and the sphere `|z|² = U` carries measure `πⁿ U^{n−1} / Γ(n)`.
/// With `U = sin φ` the remaining integrand is smooth on `[0, π/2]`.
fn unit_ball_volume_uncached(n: usize) -> f64 {
    let rule = gauss_legendre(96, 0.0, FRAC_PI_2);
    let integral: f64 = rule
        .iter()
        .map(|(phi, w)| w * phi.sin().powi(n as i32 - 1) * phi.cos().powi(2))
        .sum();
    PI.powi(n as i32) / libm::tgamma(n as f64) * integral
}

pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    let mut cache = unit_ball_cache().lock().expect("ball volume cache poisoned");
    Ok(*cache.entry(n).or_insert_with(|| unit_ball_volume_uncached(n)))
}

/// `|B(u, R)| = C_Q R^Q`.
pub fn ball_volume(n: usize, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("R", format!("radius must be positive, got {r}")));
    }
    Ok(unit_ball_volume(n)? * r.powi(homogeneous_dimension(n) as i32))
}

/// Exponent triple of a monomial `z^{j1} z̄^{j2} t^{j0}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub j1: Vec<u32>,
    pub j2: Vec<u32>,
    pub j0: u32,
}

impl MultiIndex {
    pub fn new(j1: Vec<u32>, j2: Vec<u32>, j0: u32) -> Self {
        Self { j1, j2, j0 }
    }

    pub fn dim(&self) -> usize {
        self.j1.len()
    }

    /// `|j1| + |j2| + 2 j0`.
    pub fn homogeneous_degree(&self) -> u32 {
        self.j1.iter().sum::<u32>() + self.j2.iter().sum::<u32>() + 2 * self.j0
    }

    /// Monomials with `j1 = j2` are the only ones a polyradial, angle-free
    /// function can pair with nontrivially.
    pub fn is_angle_free(&self) -> bool {
        self.j1 == self.j2
    }
}

/// All length-`n` vectors with entries summing to at most `bound`, in lexicographic order.
pub(crate) fn bounded_vectors(n: usize, bound: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, remaining: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=budget {
            prefix.push(v);
            rec(prefix, remaining - 1, budget - v, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, bound, &mut out);
    out
}

/// Every multi-index of homogeneous degree at most `s`, ordered
/// lexicographically in `(j0, j1, j2)`.
pub fn enumerate_monomials(n: usize, s: i64) -> Result<Vec<MultiIndex>> {
    if s < 0 {
        return Err(invalid("s", format!("degree bound must be nonnegative, got {s}")));
    }
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    let s = s as u32;
    let mut out = Vec::new();
    for j0 in 0..=s / 2 {
        let rest = s - 2 * j0;
        for j1 in bounded_vectors(n, rest) {
            let left = rest - j1.iter().sum::<u32>();
            for j2 in bounded_vectors(n, left) {
                out.push(MultiIndex { j1: j1.clone(), j2, j0 });
            }
        }
    }
    Ok(out)
}

/// `z^{j1} · z̄^{j2} · t^{j0}`.
pub fn evaluate_monomial(index: &MultiIndex, u: &GroupPoint) -> Result<Complex64> {
    if index.dim() != u.dim() || index.j2.len() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: index.dim(),
            found: u.dim(),
        });
    }
    let mut acc = Complex64::new(u.t.powi(index.j0 as i32), 0.0);
    for ((zk, &a), &b) in u.z.iter().zip(&index.j1).zip(&index.j2) {
        acc *= zk.powu(a) * zk.conj().powu(b);
    }
    Ok(acc)
}
