//! Centered `(p, ∞, s)`-atoms built from a separable polynomial-bump basis.
//!
//! Basis functions are
//!
//! ```text
//! φ_{i,k}(z, t) = Π_j (r_j/r₀)^{2i_j} (1 − (r_j/r₀)²)^K · (t/t₀)^k (1 − (t/t₀)²)^K,
//! ```
//!
//! supported in the box `r_j ≤ r₀`, `|t| ≤ t₀` with `n²r₀⁴ = 4t₀² = R⁴/2`, which
//! sits inside the homogeneous ball `B(0, R)`. Every moment against such a
//! function factorizes into Beta integrals, so the moment matrix is exact and
//! an atom is any null vector of it, rescaled to the size condition.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{ball_volume, bounded_vectors, enumerate_monomials, homogeneous_dimension, MultiIndex};
use crate::profile::{Factor, PolyradialSpec, SeparableTerm, TabulatedTerm, Term};
use crate::quadrature::composite_gauss_legendre;

/// `J = ⌊Q(1/p − 1)⌋`, the lowest admissible moment order.
pub fn moment_order(n: usize, p: f64) -> u32 {
    let q = homogeneous_dimension(n) as f64;
    // Nudge so that exact rationals such as p = 2/3 floor correctly.
    (q * (1.0 / p - 1.0) + 1e-9).floor().max(0.0) as u32
}

fn beta(a: f64, b: f64) -> f64 {
    (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFunction {
    /// `2i_j` for each coordinate.
    pub radial_powers: Vec<u32>,
    pub time_power: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpBasis {
    pub smoothness: u32,
    pub r0: f64,
    pub t0: f64,
    pub functions: Vec<BasisFunction>,
}

/// Homogeneous norm of the far corner of the box `|z_j| ≤ r_j`, `|t| ≤ t`.
fn box_reach(rs: &[f64], t: f64) -> f64 {
    let z2: f64 = rs.iter().map(|r| r * r).sum();
    (z2 * z2 + 4.0 * t * t).powf(0.25)
}

/// Shrinks `(r0, t0)` by a few ulps when rounding pushes the box corner past `radius`.
fn fit_box(n: usize, mut r0: f64, mut t0: f64, radius: f64) -> (f64, f64) {
    let shrink = 1.0 - f64::EPSILON;
    while box_reach(&vec![r0; n], t0) > radius {
        r0 *= shrink;
        t0 *= shrink;
    }
    (r0, t0)
}

impl BumpBasis {
    /// The first `size` functions in order of total degree `|i| + k`.
    pub fn new(n: usize, radius: f64, smoothness: u32, size: usize) -> Self {
        let (r0, t0) = fit_box(
            n,
            (radius.powi(4) / (2.0 * (n * n) as f64)).powf(0.25),
            (radius.powi(4) / 8.0).sqrt(),
            radius,
        );
        let mut functions = Vec::with_capacity(size);
        let mut degree = 0u32;
        while functions.len() < size {
            for k in (0..=degree).rev() {
                let rest = degree - k;
                let mut radial: Vec<Vec<u32>> = bounded_vectors(n, rest)
                    .into_iter()
                    .filter(|v| v.iter().sum::<u32>() == rest)
                    .collect();
                radial.sort();
                for i in radial {
                    if functions.len() == size {
                        break;
                    }
                    functions.push(BasisFunction {
                        radial_powers: i.iter().map(|x| 2 * x).collect(),
                        time_power: k,
                    });
                }
            }
            degree += 1;
        }
        Self {
            smoothness,
            r0,
            t0,
            functions,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    fn term(&self, b: &BasisFunction, coef: f64) -> Term {
        Term::Separable(SeparableTerm {
            coef,
            radial: b
                .radial_powers
                .iter()
                .map(|&pw| Factor::bump(pw, self.r0, self.smoothness))
                .collect(),
            time: Factor::bump(b.time_power, self.t0, self.smoothness),
        })
    }

    pub fn profile(&self, n: usize, coefficients: &[f64]) -> PolyradialSpec {
        PolyradialSpec::radial(
            n,
            self.functions
                .iter()
                .zip(coefficients)
                .map(|(b, &c)| self.term(b, c))
                .collect(),
        )
    }

    /// `∫ Π|z_j|^{2a_j} t^{j0} φ_b dV`, exactly.
    fn moment(&self, b: &BasisFunction, a: &[u32], j0: u32) -> f64 {
        let k = self.smoothness as f64 + 1.0;
        let radial: f64 = b
            .radial_powers
            .iter()
            .zip(a)
            .map(|(&pw, &aj)| {
                let e = aj as f64 + pw as f64 / 2.0 + 1.0;
                2.0 * PI * self.r0.powf(2.0 * aj as f64 + 2.0) * 0.5 * beta(e, k)
            })
            .product();
        let total = j0 + b.time_power;
        if total % 2 == 1 {
            return 0.0;
        }
        let time = self.t0.powi(j0 as i32 + 1) * beta((total as f64 + 1.0) / 2.0, k);
        radial * time
    }
}

/// Angle-free moment constraints `(a, j0)` with `2|a| + 2j0 ≤ s`.
pub fn radial_constraints(n: usize, s: u32) -> Vec<(Vec<u32>, u32)> {
    let mut out = Vec::new();
    for j0 in 0..=s / 2 {
        let mut radial = bounded_vectors(n, s / 2 - j0);
        radial.sort();
        for a in radial {
            out.push((a, j0));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomParams {
    pub n: usize,
    pub p: f64,
    pub s: i64,
    pub radius: f64,
    /// Defaults to one more than the number of moment constraints.
    #[serde(default)]
    pub basis_size: Option<usize>,
    #[serde(default = "default_smoothness")]
    pub smoothness: u32,
    /// Picks the direction when the null space has dimension above one.
    #[serde(default)]
    pub seed: u64,
}

fn default_smoothness() -> u32 {
    8
}

impl AtomParams {
    pub fn new(n: usize, p: f64, s: i64, radius: f64) -> Self {
        Self {
            n,
            p,
            s,
            radius,
            basis_size: None,
            smoothness: default_smoothness(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "dimension must be at least 1"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid("p", format!("need 0 < p ≤ 1, got {}", self.p)));
        }
        let j = moment_order(self.n, self.p);
        if self.s < j as i64 {
            return Err(invalid("s", format!("need s ≥ J = {j}, got {}", self.s)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {}", self.radius)));
        }
        if self.smoothness == 0 {
            return Err(invalid("smoothness", "bump smoothness must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomRecord", into = "AtomRecord")]
pub struct AtomSpec {
    pub n: usize,
    pub p: f64,
    pub s: u32,
    pub radius: f64,
    pub basis: BumpBasis,
    pub coefficients: Vec<f64>,
    pub seed: u64,
    /// Rank of the moment matrix; below the constraint count means some
    /// constraints were redundant for this basis.
    pub moment_rank: usize,
    pub profile: PolyradialSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    n: usize,
    p: f64,
    s: u32,
    #[serde(rename = "R")]
    radius: f64,
    basis: BumpBasis,
    coefficients: Vec<f64>,
    seed: u64,
    moment_rank: usize,
}

impl From<AtomSpec> for AtomRecord {
    fn from(a: AtomSpec) -> Self {
        AtomRecord {
            n: a.n,
            p: a.p,
            s: a.s,
            radius: a.radius,
            basis: a.basis,
            coefficients: a.coefficients,
            seed: a.seed,
            moment_rank: a.moment_rank,
        }
    }
}

impl TryFrom<AtomRecord> for AtomSpec {
    type Error = String;

    fn try_from(r: AtomRecord) -> std::result::Result<Self, String> {
        if r.coefficients.len() != r.basis.len() {
            return Err(format!(
                "{} coefficients for {} basis functions",
                r.coefficients.len(),
                r.basis.len()
            ));
        }
        if r.basis.functions.iter().any(|b| b.radial_powers.len() != r.n) {
            return Err("basis function dimension differs from n".into());
        }
        let profile = r.basis.profile(r.n, &r.coefficients);
        Ok(AtomSpec {
            n: r.n,
            p: r.p,
            s: r.s,
            radius: r.radius,
            basis: r.basis,
            coefficients: r.coefficients,
            seed: r.seed,
            moment_rank: r.moment_rank,
            profile,
        })
    }
}

impl AtomSpec {
    /// `|B(0, R)|^{−1/p}`.
    pub fn sup_bound(&self) -> f64 {
        ball_volume(self.n, self.radius)
            .expect("radius validated at construction")
            .powf(-1.0 / self.p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("atom serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid("atom", e.to_string()))
    }
}

/// Assemble the moment matrix, pick a null vector, and normalize.
pub fn build_atom(params: &AtomParams) -> Result<AtomSpec> {
    params.validate()?;
    let n = params.n;
    let s = params.s as u32;
    let constraints = radial_constraints(n, s);
    let size = params.basis_size.unwrap_or(constraints.len() + 1);
    if size <= constraints.len() {
        return Err(Error::Infeasible(format!(
            "basis of {size} functions cannot satisfy {} moment constraints",
            constraints.len()
        )));
    }
    let basis = BumpBasis::new(n, params.radius, params.smoothness, size);

    // Square, zero-padded so that the SVD exposes the full right null space.
    let mut m = DMatrix::<f64>::zeros(size, size);
    for (row, (a, j0)) in constraints.iter().enumerate() {
        for (col, b) in basis.functions.iter().enumerate() {
            m[(row, col)] = basis.moment(b, a, *j0);
        }
        let scale = m.row(row).amax();
        if scale > 0.0 {
            m.row_mut(row).scale_mut(1.0 / scale);
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.max();
    let tol = 1e-11 * top.max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..size).filter(|&i| svd.singular_values[i] <= tol).collect();
    let rank = size - null.len();
    if null.is_empty() {
        return Err(Error::Infeasible("moment matrix has trivial null space".into()));
    }

    let mut c = vec![0.0; size];
    if null.len() == 1 {
        c.copy_from_slice(v_t.row(null[0]).transpose().as_slice());
    } else {
        let mut rng = StdRng::seed_from_u64(params.seed);
        for &i in &null {
            let w: f64 = rng.gen_range(-1.0..1.0);
            for (cj, v) in c.iter_mut().zip(v_t.row(i).iter()) {
                *cj += w * v;
            }
        }
    }
    let lead = c
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if lead == 0.0 {
        return Err(Error::Infeasible("null vector vanished".into()));
    }
    c.iter_mut().for_each(|v| *v /= lead);

    let profile = basis.profile(n, &c);
    let sup = sup_norm(&profile, basis.r0, basis.t0);
    let target = ball_volume(n, params.radius)?.powf(-1.0 / params.p);
    c.iter_mut().for_each(|v| *v *= target / sup);
    let profile = basis.profile(n, &c);
    Ok(AtomSpec {
        n,
        p: params.p,
        s,
        radius: params.radius,
        basis,
        coefficients: c,
        seed: params.seed,
        moment_rank: rank,
        profile,
    })
}

/// `a_ρ(u) = ρ^{−Q/p} a(u/ρ)`, an atom on `B(0, ρR)`.
pub fn dilate_atom(a: &AtomSpec, rho: f64) -> Result<AtomSpec> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", format!("dilation factor must be positive, got {rho}")));
    }
    if rho == 1.0 {
        return Ok(a.clone());
    }
    let q = homogeneous_dimension(a.n) as f64;
    let amp = rho.powf(-q / a.p);
    let mut basis = a.basis.clone();
    (basis.r0, basis.t0) = fit_box(a.n, basis.r0 * rho, basis.t0 * rho * rho, a.radius * rho);
    let coefficients: Vec<f64> = a.coefficients.iter().map(|c| c * amp).collect();
    let profile = basis.profile(a.n, &coefficients);
    Ok(AtomSpec {
        radius: a.radius * rho,
        basis,
        coefficients,
        profile,
        ..a.clone()
    })
}

/// `max |f|` over the box `[0, r_max]ⁿ × [−t_max, t_max]`: grid search, then
/// compass search from the best few cells.
pub fn sup_norm(f: &PolyradialSpec, r_max: f64, t_max: f64) -> f64 {
    let n = f.n;
    let dims = n + 1;
    let per_axis: usize = match n {
        1 => 161,
        2 => 41,
        _ => 15,
    };
    let lo: Vec<f64> = std::iter::repeat_n(0.0, n).chain([-t_max]).collect();
    let hi: Vec<f64> = std::iter::repeat_n(r_max, n).chain([t_max]).collect();
    let value = |x: &[f64]| -> f64 { f.modes.iter().map(|m| m.eval(&x[..n], x[n]).abs()).sum::<f64>() };
    let step: Vec<f64> = (0..dims).map(|d| (hi[d] - lo[d]) / (per_axis - 1) as f64).collect();

    let total = per_axis.pow(dims as u32);
    let mut samples: Vec<(f64, Vec<f64>)> = (0..total)
        .map(|mut idx| {
            let x: Vec<f64> = (0..dims)
                .map(|d| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    lo[d] + step[d] * i as f64
                })
                .collect();
            (value(&x), x)
        })
        .collect();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = samples.first().map_or(0.0, |s| s.0);
    for (v0, x0) in samples.into_iter().take(4) {
        let mut x = x0;
        let mut v = v0;
        let mut h = step.clone();
        while h.iter().zip(&hi).any(|(s, top)| *s > 1e-14 * top.abs().max(1.0)) {
            let mut moved = false;
            for d in 0..dims {
                for dir in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[d] = (y[d] + dir * h[d]).clamp(lo[d], hi[d]);
                    let w = value(&y);
                    if w > v {
                        v = w;
                        x = y;
                        moved = true;
                    }
                }
            }
            if !moved {
                h.iter_mut().for_each(|s| *s *= 0.5);
            }
        }
        best = best.max(v);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    /// `max_P |∫ a P dV|` over all monomials of homogeneous degree `≤ s`.
    pub max_moment_residual: f64,
    pub moments_checked: usize,
    pub sup_norm: f64,
    pub sup_bound: f64,
    /// `sup_norm / sup_bound − 1`; positive means the size condition fails.
    pub sup_defect: f64,
    /// Relative distance by which the support box leaves `B(0, R)`.
    pub support_defect: f64,
    /// The zero function is not an atom.
    pub degenerate: bool,
}

impl AtomReport {
    pub fn is_valid(&self, moment_tol: f64, sup_tol: f64) -> bool {
        !self.degenerate
            && self.max_moment_residual < moment_tol
            && self.sup_defect <= sup_tol
            && self.support_defect == 0.0
    }
}

/// Check size, support and every moment of `a` directly from its profile.
pub fn validate_atom(a: &AtomSpec) -> AtomReport {
    let f = &a.profile;
    let monomials = enumerate_monomials(a.n, a.s as i64).unwrap_or_default();
    let mut max_res = 0.0f64;
    for mono in &monomials {
        max_res = max_res.max(profile_moment(f, mono).norm());
    }
    let (r_box, t_box) = support_box(f);
    let sup = if f.modes.iter().all(|m| m.terms.is_empty()) {
        0.0
    } else {
        sup_norm(f, r_box.max(f64::MIN_POSITIVE), t_box.max(f64::MIN_POSITIVE))
    };
    let bound = a.sup_bound();
    let reach = f
        .modes
        .iter()
        .flat_map(|m| m.terms.iter())
        .map(|term| {
            let (rs, ts) = term.extents(a.n);
            box_reach(&rs, ts)
        })
        .fold(0.0f64, f64::max);
    AtomReport {
        max_moment_residual: max_res,
        moments_checked: monomials.len(),
        sup_norm: sup,
        sup_bound: bound,
        sup_defect: sup / bound - 1.0,
        support_defect: ((reach - a.radius) / a.radius).max(0.0),
        degenerate: sup == 0.0,
    }
}

fn support_box(f: &PolyradialSpec) -> (f64, f64) {
    let mut r = 0.0f64;
    let mut t = 0.0f64;
    for mode in &f.modes {
        for term in &mode.terms {
            let (rs, ts) = term.extents(f.n);
            match term {
                // The ball's box is not tight: |z| ≤ R and |t| ≤ R²/2 simultaneously.
                Term::BallIndicator { radius, .. } => {
                    r = r.max(*radius);
                    t = t.max(0.5 * radius * radius);
                }
                _ => {
                    r = rs.into_iter().fold(r, f64::max);
                    t = t.max(ts);
                }
            }
        }
    }
    (r, t)
}

/// `∫ f · z^{j1} z̄^{j2} t^{j0} dV`.
pub fn profile_moment(f: &PolyradialSpec, mono: &MultiIndex) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for mode in &f.modes {
        // Trapezoid in θ is exact for these trigonometric polynomials.
        let mut angular = Complex64::new(1.0, 0.0);
        for j in 0..f.n {
            let freq = mode.m[j] as i64 + mono.j1[j] as i64 - mono.j2[j] as i64;
            let nodes = 2 * freq.unsigned_abs() as usize + 8;
            let sum: Complex64 = (0..nodes)
                .map(|k| Complex64::from_polar(1.0, freq as f64 * 2.0 * PI * k as f64 / nodes as f64))
                .sum();
            angular *= sum * (2.0 * PI / nodes as f64);
        }
        if angular.norm() < 1e-14 {
            continue;
        }
        let degrees: Vec<u32> = mono.j1.iter().zip(&mono.j2).map(|(a, b)| a + b).collect();
        let radial_time: f64 = mode
            .terms
            .iter()
            .map(|term| term_moment(term, &degrees, mono.j0, f.n))
            .sum();
        total += angular * radial_time;
    }
    total
}

/// `∫ term · Π r_j^{d_j} t^{j0} Π r_j dr_j dt`.
fn term_moment(term: &Term, degrees: &[u32], j0: u32, n: usize) -> f64 {
    match term {
        Term::Separable(s) => {
            let radial: f64 = s
                .radial
                .iter()
                .zip(degrees)
                .map(|(factor, &d)| {
                    let (x, w) = factor.half_line_nodes(d + 1);
                    x.iter()
                        .zip(&w)
                        .map(|(&r, &w)| w * r.powi(d as i32 + 1) * factor.eval(r))
                        .sum::<f64>()
                })
                .product();
            let (x, w) = s.time.full_line_nodes(j0);
            let time: f64 = x
                .iter()
                .zip(&w)
                .map(|(&t, &w)| w * t.powi(j0 as i32) * s.time.eval(t))
                .sum();
            s.coef * radial * time
        }
        Term::BallIndicator { value, radius } => {
            if j0 % 2 == 1 {
                return 0.0;
            }
            ball_moment(n, degrees, j0, *radius) * value
        }
        Term::Tabulated(tab) => tabulated_moment(tab, degrees[0], j0),
    }
}

/// `∫_{|z|⁴+4t²<R⁴} Π r_j^{d_j} t^{j0} Π r_j dr_j dt` for even `j0`, by the
/// Dirichlet integral over the radial simplex and a Beta integral in `|z|²`.
fn ball_moment(n: usize, degrees: &[u32], j0: u32, radius: f64) -> f64 {
    let e: Vec<f64> = degrees.iter().map(|&d| d as f64 / 2.0 + 1.0).collect();
    let big_e: f64 = e.iter().sum();
    let dirichlet =
        0.5f64.powi(n as i32) * (e.iter().map(|&x| libm::lgamma(x)).sum::<f64>() - libm::lgamma(big_e)).exp();
    let b = (j0 as f64 + 1.0) / 2.0;
    // ∫_{|t| < √(R⁴−v²)/2} t^{j0} dt = 2 (R⁴−v²)^{b} / (2^{j0+1} (j0+1))
    let time = 2.0 / (2f64.powi(j0 as i32 + 1) * (j0 as f64 + 1.0));
    let v_integral = radius.powf(2.0 * big_e + 4.0 * b) * 0.5 * beta(big_e / 2.0, b + 1.0);
    dirichlet * time * v_integral
}

fn tabulated_moment(tab: &TabulatedTerm, d: u32, j0: u32) -> f64 {
    let (rx, rw) = composite_gauss_legendre(0.0, tab.r_max, tab.r_points - 1, 4);
    let (tx, tw) = composite_gauss_legendre(-tab.t_max, tab.t_max, tab.t_points - 1, 4);
    let mut total = 0.0;
    for (&r, &wr) in rx.iter().zip(&rw) {
        let inner: f64 = tx
            .iter()
            .zip(&tw)
            .map(|(&t, &wt)| wt * t.powi(j0 as i32) * tab.eval(r, t))
            .sum();
        total += wr * r.powi(d as i32 + 1) * inner;
    }
    total
}

/// Finite combination `Σ β_k a_k` of atoms sharing `n` and `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicSum {
    pub atoms: Vec<AtomSpec>,
    pub betas: Vec<f64>,
}

impl AtomicSum {
    pub fn new(atoms: Vec<AtomSpec>, betas: Vec<f64>) -> Result<Self> {
        if atoms.len() != betas.len() {
            return Err(invalid("betas", "one coefficient per atom"));
        }
        if let Some(first) = atoms.first() {
            if atoms.iter().any(|a| a.n != first.n || a.p != first.p) {
                return Err(invalid("atoms", "atoms must share n and p"));
            }
        }
        Ok(Self { atoms, betas })
    }

    /// `(Σ |β_k|^p)^{1/p}`.
    pub fn quasi_norm(&self) -> f64 {
        let p = self.atoms.first().map_or(1.0, |a| a.p);
        self.betas.iter().map(|b| b.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn profile(&self) -> Result<PolyradialSpec> {
        let n = self.atoms.first().map_or(1, |a| a.n);
        self.atoms
            .iter()
            .zip(&self.betas)
            .try_fold(PolyradialSpec::zero(n), |acc, (a, &b)| acc.add(&a.profile.scaled(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn admissible_order() {
        assert_eq!(moment_order(1, 1.0), 0);
        assert_eq!(moment_order(1, 0.75), 1);
        assert_eq!(moment_order(1, 0.5), 4);
        assert_eq!(moment_order(1, 2.0 / 3.0), 2);
        assert_eq!(moment_order(2, 0.5), 6);
    }

    #[test]
    fn constraint_counts() {
        assert_eq!(radial_constraints(1, 0).len(), 1);
        assert_eq!(radial_constraints(1, 1).len(), 1);
        assert_eq!(radial_constraints(1, 4).len(), 6);
        assert_eq!(radial_constraints(2, 2).len(), 4);
    }

    #[test]
    fn basis_box_lies_in_the_ball() {
        for n in 1..=3 {
            let b = BumpBasis::new(n, 1.7, 6, 5);
            let z2 = n as f64 * b.r0 * b.r0;
            assert_relative_eq!(z2 * z2 + 4.0 * b.t0 * b.t0, 1.7f64.powi(4), max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_moments_match_quadrature() {
        let basis = BumpBasis::new(1, 1.3, 5, 6);
        for b in &basis.functions {
            let single = PolyradialSpec::radial(1, vec![basis.term(b, 1.0)]);
            for (a, j0) in radial_constraints(1, 4) {
                let mono = MultiIndex::new(a.clone(), a.clone(), j0);
                let q = profile_moment(&single, &mono);
                let exact = basis.moment(b, &a, j0);
                assert!(
                    (q.re - exact).abs() <= 1e-13 * exact.abs().max(1e-3),
                    "{b:?} {a:?} {j0}"
                );
            }
        }
    }

    #[test]
    fn ball_moment_reproduces_volume() {
        for n in 1..=3 {
            let v = ball_moment(n, &vec![0; n], 0, 1.4) * (2.0 * PI).powi(n as i32);
            assert_relative_eq!(v, ball_volume(n, 1.4).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn s_zero_atom_is_odd_in_time() {
        let a = build_atom(&AtomParams::new(1, 1.0, 0, 1.0)).unwrap();
        assert_eq!(a.basis.functions[1].time_power, 1);
        assert!(a.coefficients[0].abs() < 1e-12);
        let r = validate_atom(&a);
        assert!(r.max_moment_residual < 1e-10, "{r:?}");
        assert_relative_eq!(r.sup_norm, 4.0 / (PI * PI), max_relative = 1e-10);
    }

    #[test]
    fn undersized_basis_is_infeasible() {
        let mut p = AtomParams::new(1, 0.5, 4, 1.0);
        p.basis_size = Some(6);
        assert!(matches!(build_atom(&p), Err(Error::Infeasible(_))));
        assert!(build_atom(&AtomParams::new(1, 0.5, 3, 1.0)).is_err());
    }

    #[test]
    fn seed_selects_direction_in_larger_null_space() {
        let mut p = AtomParams::new(1, 1.0, 0, 1.0);
        p.basis_size = Some(4);
        let a = build_atom(&p).unwrap();
        let b = build_atom(&p).unwrap();
        assert_eq!(a, b);
        p.seed = 9;
        let c = build_atom(&p).unwrap();
        assert_ne!(a.coefficients, c.coefficients);
        assert!(validate_atom(&c).is_valid(1e-10, 1e-9));
    }

    #[test]
    fn quasi_norm_bookkeeping() {
        let a = build_atom(&AtomParams::new(1, 0.5, 4, 1.0)).unwrap();
        let sum = AtomicSum::new(vec![a.clone(), a], vec![3.0, -4.0]).unwrap();
        assert_relative_eq!(sum.quasi_norm(), (3f64.sqrt() + 2.0).powi(2), max_relative = 1e-14);
    }
}
