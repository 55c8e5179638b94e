//! Gauss–Legendre rules and their mapped/composite variants.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Where a rule lives once mapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `[0, cutoff]`
    Radial,
    /// `[−cutoff, cutoff]`, built from a rule on `[0, cutoff]` and its mirror image.
    Time,
    /// `[−cutoff, cutoff]` as a single Gauss–Legendre panel.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: DomainKind,
    /// Polynomials up to this degree are integrated exactly (per half for `Time`).
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Legendre nodes and weights on `[−1, 1]`, by Newton iteration on `P_order`.
pub fn gauss_legendre_reference(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(node, weight)` pairs for an `order`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre_reference(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (mid + half * xi, half * wi))
        .collect()
}

/// Composite rule: `panels` equal sub-intervals of `[a, b]`, each with an
/// `order`-point Gauss–Legendre rule.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre_reference(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (&xi, &wi) in x.iter().zip(&w) {
            nodes.push(mid + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Gauss–Legendre rule of the given order mapped onto the domain implied by `kind`.
pub fn build_rule(kind: DomainKind, order: usize, cutoff: f64) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(invalid(
            "order",
            format!("quadrature order must be at least 2, got {order}"),
        ));
    }
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(invalid("cutoff", format!("cutoff must be positive, got {cutoff}")));
    }
    let pairs: Vec<(f64, f64)> = match kind {
        DomainKind::Radial => gauss_legendre(order, 0.0, cutoff),
        DomainKind::Spectral => gauss_legendre(order, -cutoff, cutoff),
        DomainKind::Time => {
            let half = gauss_legendre(order, 0.0, cutoff);
            half.iter()
                .rev()
                .map(|&(x, w)| (-x, w))
                .chain(half.iter().copied())
                .collect()
        }
    };
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        kind,
        exact_degree: 2 * order - 1,
    })
}
