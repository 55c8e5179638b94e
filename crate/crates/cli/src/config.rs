//! The JSON run configuration. Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use heisenpaley::fourier::{LambdaGrid, TransformRules, Truncation};
use heisenpaley::paley::{sigma_range, GammaRule};
use heisenpaley::profile::PolyradialSpec;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub sigma: Option<SigmaSpec>,
    /// Moment order of the atoms; defaults to the smallest admissible one.
    #[serde(default)]
    pub s: Option<i64>,
    /// Support radius for `atom`.
    #[serde(rename = "R", default = "default_radius")]
    pub radius: f64,
    /// Radii swept by `paley`.
    #[serde(rename = "R_list", default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub quadrature: TransformRules,
    #[serde(default)]
    pub truncation: Option<Truncation>,
    #[serde(default)]
    pub lambda_grid: LambdaGrid,
    #[serde(default)]
    pub basis_size: Option<usize>,
    #[serde(default)]
    pub smoothness: Option<u32>,
    #[serde(default)]
    pub gamma: Option<GammaRule>,
    #[serde(default)]
    pub bound_factor: Option<f64>,
    #[serde(default)]
    pub cross_checks: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub probe: bool,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_n() -> usize {
    1
}

fn default_p() -> f64 {
    1.0
}

fn default_radius() -> f64 {
    1.0
}

fn default_radii() -> Vec<f64> {
    heisenpaley::paley::log_spaced(1e-2, 1e2, 9)
}

/// Either one `σ` or `{"auto_range": k}`: `k` values at the midpoints of `k`
/// equal cells of the admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "serde_json::Value")]
pub enum SigmaSpec {
    Value(f64),
    Auto(AutoRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoRange {
    pub auto_range: usize,
}

impl TryFrom<serde_json::Value> for SigmaSpec {
    type Error = String;

    fn try_from(v: serde_json::Value) -> Result<Self, String> {
        if let Some(s) = v.as_f64() {
            return Ok(SigmaSpec::Value(s));
        }
        serde_json::from_value(v)
            .map(SigmaSpec::Auto)
            .map_err(|e| format!("`sigma` must be a number or {{\"auto_range\": k}}: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    /// `coef · e^{−b|z|² − c t²}`.
    Gaussian {
        #[serde(default = "unit")]
        coef: f64,
        b: f64,
        c: f64,
    },
    Profile {
        profile: PolyradialSpec,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// `|rhs/lhs − 1|` after calibration.
    pub plancherel: f64,
    /// Relative error of the recovered `f(0, 0)`.
    pub inversion: f64,
    /// Largest moment residual of an atom.
    pub moment: f64,
    /// `‖a‖_∞ / |B|^{−1/p} − 1`.
    pub sup: f64,
    /// Relative error against the Gaussian closed form, above an absolute floor of `oracle_floor`.
    pub oracle: f64,
    pub oracle_floor: f64,
    /// Fast-path vs direct recomputation in sweeps.
    pub cross_check: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            plancherel: 1e-4,
            inversion: 1e-3,
            moment: 1e-10,
            sup: 1e-9,
            oracle: 1e-6,
            oracle_floor: 1e-8,
            cross_check: 1e-6,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let bad = |key: &str, why: String| Err(Failure::Config(format!("config key `{key}`: {why}")));
        if self.n == 0 {
            return bad("n", "must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad("p", format!("need 0 < p ≤ 1, got {}", self.p));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("R", format!("must be positive, got {}", self.radius));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("R_list", "need at least one positive radius".into());
        }
        if let Some(SigmaSpec::Auto(AutoRange { auto_range: 0 })) = self.sigma {
            return bad("sigma", "auto_range needs at least one sample".into());
        }
        if let Err(e) = self.lambda_grid.validate() {
            return bad("lambda_grid", e.to_string());
        }
        if let Err(e) = self.quadrature.validate() {
            return bad("quadrature", e.to_string());
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.plancherel", t.plancherel),
            ("tolerances.inversion", t.inversion),
            ("tolerances.moment", t.moment),
            ("tolerances.sup", t.sup),
            ("tolerances.oracle", t.oracle),
            ("tolerances.oracle_floor", t.oracle_floor),
            ("tolerances.cross_check", t.cross_check),
        ] {
            if !(v >= 0.0) {
                return bad(key, format!("must be nonnegative, got {v}"));
            }
        }
        if let Some(b) = self.bound_factor {
            if !(b >= 1.0) {
                return bad("bound_factor", format!("must be at least 1, got {b}"));
            }
        }
        if let Some(FunctionSpec::Profile { profile }) = &self.function {
            if profile.n != self.n {
                return bad("function.profile.n", format!("is {} but n is {}", profile.n, self.n));
            }
            if let Err(e) = profile.validate() {
                return bad("function.profile", e.to_string());
            }
        }
        if let Some(FunctionSpec::Gaussian { b, c, .. }) = &self.function {
            if !(*b > 0.0 && *c > 0.0) {
                return bad("function", "Gaussian widths b and c must be positive".into());
            }
        }
        Ok(())
    }

    pub fn function(&self) -> Result<PolyradialSpec, Failure> {
        match &self.function {
            None => Err(Failure::Config(
                "config key `function` is required for this command".into(),
            )),
            Some(FunctionSpec::Zero) => Ok(PolyradialSpec::zero(self.n)),
            Some(FunctionSpec::Gaussian { coef, b, c }) => Ok(PolyradialSpec::gaussian(self.n, *coef, *b, *c)),
            Some(FunctionSpec::Profile { profile }) => Ok(profile.clone()),
        }
    }

    /// The `σ` values to sweep.
    pub fn sigmas(&self) -> Result<Vec<f64>, Failure> {
        match self.sigma {
            None => Err(Failure::Config("config key `sigma` is required for `paley`".into())),
            Some(SigmaSpec::Value(s)) => Ok(vec![s]),
            Some(SigmaSpec::Auto(AutoRange { auto_range: k })) => {
                let (lo, hi) = sigma_range(self.p, self.n).map_err(|e| Failure::Config(e.to_string()))?;
                Ok((0..k).map(|i| lo + (i as f64 + 0.5) * (hi - lo) / k as f64).collect())
            }
        }
    }
}
