use std::fmt::Write as _;
use std::path::Path;

use heisenpaley::atoms::{build_atom, moment_order, validate_atom, AtomParams};
use heisenpaley::fourier::{
    calibrate, graded_alphas, invert_at_origin, plancherel_check, spectral_table, Calibration, PlancherelReport,
    SpectralCoefficients, Truncation,
};
use heisenpaley::group::GroupPoint;
use heisenpaley::oracle::gaussian_coefficient;
use heisenpaley::paley::{sweep, AtomOptions, PaleyParams, PaleySweepReport, SweepConfig};
use serde::Serialize;

use crate::config::{FunctionSpec, RunConfig};
use crate::Failure;

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub oracle: bool,
    pub tol: Option<f64>,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serialization cannot fail")
}

pub fn transform(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let f = cfg.function()?;
    let truncation = cfg.truncation.unwrap_or_default();
    let table = spectral_table(&f, &cfg.lambda_grid, &truncation, &cfg.quadrature)?;
    write(ctx.out, "table.json", &table.to_json())?;
    println!(
        "truncation tail estimate (max over rows): {:e}",
        table.max_tail_estimate()
    );
    if ctx.oracle {
        let Some(FunctionSpec::Gaussian { coef, b, c }) = cfg.function else {
            return Err(Failure::Config("--oracle needs `function.kind` = \"gaussian\"".into()));
        };
        let tol = ctx.tol.unwrap_or(cfg.tolerances.oracle);
        let cmp = oracle_comparison(&table, coef, b, c, cfg.tolerances.oracle_floor);
        println!("oracle max-abs-diff: {:e}", cmp.max_abs_diff);
        println!("oracle max-rel-diff above {:e}: {:e}", cmp.floor, cmp.max_rel_diff);
        if cmp.max_rel_diff > tol {
            return Err(Failure::Numerical(format!(
                "oracle relative difference {:e} exceeds {tol:e}",
                cmp.max_rel_diff
            )));
        }
    }
    Ok(())
}

struct OracleComparison {
    max_abs_diff: f64,
    max_rel_diff: f64,
    floor: f64,
}

/// Entries whose exact value is at most `floor` are compared absolutely against `floor`.
fn oracle_comparison(table: &SpectralCoefficients, coef: f64, b: f64, c: f64, floor: f64) -> OracleComparison {
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    for i in 0..table.rows() {
        let lambda = table.lambdas[i];
        let alphas = graded_alphas(table.n, table.alpha_limits[i]);
        for (mi, m) in table.m_indices.iter().enumerate() {
            let radial = m.iter().all(|&k| k == 0);
            for (ai, alpha) in alphas.iter().enumerate() {
                let value = table.values[i][mi * alphas.len() + ai];
                let exact = if radial {
                    coef * gaussian_coefficient(b, c, lambda, alpha) * table.scale
                } else {
                    0.0
                };
                let diff = (value - exact).norm();
                max_abs = max_abs.max(diff);
                if exact.abs() > floor {
                    max_rel = max_rel.max(diff / exact.abs());
                } else if diff > floor {
                    max_rel = max_rel.max(diff / floor);
                }
            }
        }
    }
    OracleComparison {
        max_abs_diff: max_abs,
        max_rel_diff: max_rel,
        floor,
    }
}

#[derive(Serialize)]
struct CheckReport {
    calibration: Calibration,
    plancherel: PlancherelReport,
    plancherel_defect: f64,
    f_origin: f64,
    recovered_origin: [f64; 2],
    /// Relative when `f(0, 0) ≠ 0`, absolute otherwise.
    inversion_defect: f64,
    max_tail_estimate: f64,
    plancherel_tolerance: f64,
    inversion_tolerance: f64,
    passed: bool,
}

pub fn check(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let f = cfg.function()?;
    let truncation = cfg.truncation.unwrap_or_else(Truncation::plancherel_default);
    let calibration = calibrate(cfg.n, &cfg.lambda_grid, &truncation, &cfg.quadrature)?;
    let table = calibration.apply(&spectral_table(&f, &cfg.lambda_grid, &truncation, &cfg.quadrature)?);
    let plancherel = plancherel_check(&f, &table)?;
    let recovered = invert_at_origin(&table)?;
    let f0 = f.evaluate(&GroupPoint::identity(cfg.n))?.re;
    let err = (recovered.re - f0).hypot(recovered.im);
    let inversion_defect = if f0 == 0.0 { err } else { err / f0.abs() };
    let plancherel_defect = (plancherel.ratio - 1.0).abs();
    let plancherel_tolerance = ctx.tol.unwrap_or(cfg.tolerances.plancherel);
    let inversion_tolerance = ctx.tol.unwrap_or(cfg.tolerances.inversion);
    let passed = plancherel_defect < plancherel_tolerance && inversion_defect < inversion_tolerance
        || plancherel_defect == 0.0 && inversion_defect == 0.0;
    let report = CheckReport {
        calibration,
        plancherel,
        plancherel_defect,
        f_origin: f0,
        recovered_origin: [recovered.re, recovered.im],
        inversion_defect,
        max_tail_estimate: table.max_tail_estimate(),
        plancherel_tolerance,
        inversion_tolerance,
        passed,
    };
    write(ctx.out, "check.json", &to_json(&report))?;
    println!("calibration kappa: {}", calibration.kappa);
    println!("plancherel ratio: {}  defect {:e}", plancherel.ratio, plancherel_defect);
    println!(
        "inversion f(0,0) = {f0}, recovered {}  defect {:e}",
        recovered.re, inversion_defect
    );
    if passed {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "plancherel defect {plancherel_defect:e} (tol {plancherel_tolerance:e}), inversion defect {inversion_defect:e} (tol {inversion_tolerance:e})"
        )))
    }
}

pub fn atom(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let params = AtomParams {
        n: cfg.n,
        p: cfg.p,
        s: cfg.s.unwrap_or(moment_order(cfg.n, cfg.p) as i64),
        radius: cfg.radius,
        basis_size: cfg.basis_size,
        smoothness: cfg.smoothness.unwrap_or(AtomParams::new(1, 1.0, 0, 1.0).smoothness),
        seed: cfg.seed,
    };
    params.validate()?;
    let a = build_atom(&params)?;
    let report = validate_atom(&a);
    write(ctx.out, "atom.json", &a.to_json())?;
    write(ctx.out, "atom_report.json", &to_json(&report))?;
    let moment_tol = ctx.tol.unwrap_or(cfg.tolerances.moment);
    println!(
        "moments checked: {}  max residual {:e}",
        report.moments_checked, report.max_moment_residual
    );
    println!(
        "sup norm {:e}  bound {:e}  defect {:e}",
        report.sup_norm, report.sup_bound, report.sup_defect
    );
    if report.is_valid(moment_tol, cfg.tolerances.sup) {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "atom fails validation (moment tol {moment_tol:e}, sup tol {:e})",
            cfg.tolerances.sup
        )))
    }
}

pub fn paley(ctx: &Context) -> Result<(), Failure> {
    let cfg = ctx.cfg;
    let sigmas = cfg.sigmas()?;
    let many = sigmas.len() > 1;
    let tol = ctx.tol.unwrap_or(cfg.tolerances.cross_check);
    let mut failures = Vec::new();
    for (i, &sigma) in sigmas.iter().enumerate() {
        let mut params = PaleyParams::new(cfg.p, cfg.n, sigma);
        params.probe = cfg.probe;
        let sc = sweep_config(cfg, params);
        let report = sweep(&sc)?;
        let suffix = if many { format!("_{i}") } else { String::new() };
        emit_paley(ctx.out, &suffix, &report)?;
        if cfg.probe {
            continue;
        }
        let bad_checks: Vec<_> = report.cross_checks.iter().filter(|c| !(c.rel_diff <= tol)).collect();
        if !bad_checks.is_empty() {
            failures.push(format!(
                "sigma {sigma}: fast and direct transforms differ by {:e} (tol {tol:e})",
                bad_checks.iter().map(|c| c.rel_diff).fold(0.0, f64::max)
            ));
        } else if !report.bounded {
            failures.push(format!(
                "sigma {sigma}: LHS not bounded over the radii (max/min {:e})",
                report.max_min_ratio
            ));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(failures.join("; ")))
    }
}

fn sweep_config(cfg: &RunConfig, params: PaleyParams) -> SweepConfig {
    let mut sc = SweepConfig::new(params, cfg.radii.clone());
    sc.atom = AtomOptions {
        s: cfg.s,
        basis_size: cfg.basis_size,
        smoothness: cfg.smoothness,
        seed: cfg.seed,
    };
    sc.grid = cfg.lambda_grid;
    if let Some(t) = cfg.truncation {
        sc.truncation = t;
    }
    sc.rules = cfg.quadrature;
    if let Some(g) = cfg.gamma {
        sc.gamma = g;
    }
    if let Some(b) = cfg.bound_factor {
        sc.bound_factor = b;
    }
    if let Some(k) = cfg.cross_checks {
        sc.cross_checks = k;
    }
    sc
}

fn emit_paley(out: &Path, suffix: &str, report: &PaleySweepReport) -> Result<(), Failure> {
    write(out, &format!("paley{suffix}.csv"), &report.to_csv())?;
    write(out, &format!("paley{suffix}.json"), &report.to_json())?;
    let rows = &report.rows;
    write(
        out,
        &format!("log_s1{suffix}.dat"),
        &log_columns(rows.iter().map(|r| (r.radius, r.s1))),
    )?;
    write(
        out,
        &format!("log_s2{suffix}.dat"),
        &log_columns(rows.iter().map(|r| (r.radius, r.s2))),
    )?;
    let mut lhs = String::new();
    for r in rows {
        writeln!(lhs, "{:e} {:e}", r.radius, r.lhs).expect("writing to a String cannot fail");
    }
    write(out, &format!("lhs{suffix}.dat"), &lhs)?;
    let p = &report.params;
    match &report.label {
        Some(label) => println!("p = {}, n = {}, sigma = {}: {label}", p.p, p.n, p.sigma),
        None => println!("p = {}, n = {}, sigma = {}", p.p, p.n, p.sigma),
    }
    println!(
        "bounded: {}  max/min LHS {:e}  LHS slope {}",
        report.bounded,
        report.max_min_ratio,
        report.slopes.lhs.map_or("n/a".into(), |s| format!("{s:.6}"))
    );
    Ok(())
}

/// `log₁₀ x, log₁₀ y` pairs; points with `y ≤ 0` have no logarithm and are skipped.
fn log_columns(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (x, y) in points.filter(|&(_, y)| y > 0.0) {
        writeln!(s, "{:e} {:e}", x.log10(), y.log10()).expect("writing to a String cannot fail");
    }
    s
}
