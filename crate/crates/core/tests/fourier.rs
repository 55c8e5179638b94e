use heisenpaley::fourier::{
    calibrate, invert_at_origin, plancherel_check, spectral_coefficient, spectral_table, LambdaGrid,
    SpectralCoefficients, TransformRules, Truncation,
};
use heisenpaley::oracle;
use heisenpaley::profile::{Factor, Mode, PolyradialSpec, SeparableTerm, TabulatedTerm, Term};
use num_complex::Complex64;

fn close(got: f64, want: f64, rel: f64, floor: f64) -> bool {
    (got - want).abs() <= rel * want.abs() + floor
}

fn small_grid() -> LambdaGrid {
    LambdaGrid {
        min: 1e-2,
        max: 1e2,
        points_per_side: 24,
    }
}

fn gauss_poly(coef: f64, rp: u32, b: f64, tp: u32, c: f64) -> Term {
    Term::Separable(SeparableTerm {
        coef,
        radial: vec![Factor::gauss(rp, b)],
        time: Factor::gauss(tp, c),
    })
}

#[test]
fn gaussian_table_matches_generating_function_oracle() {
    let rules = TransformRules::default();
    for (b, c) in [(1.0, 1.0), (0.6, 2.5)] {
        let f = PolyradialSpec::gaussian(1, 1.0, b, c);
        let table = spectral_table(&f, &small_grid(), &Truncation::default(), &rules).unwrap();
        let scale = table.max_abs();
        for i in 0..table.rows() {
            let lam = table.lambdas[i];
            for k in 0..=48u32 {
                let got = table.get(i, &[0], &[k]).unwrap();
                let want = oracle::gaussian_coefficient(b, c, lam, &[k]);
                assert!(
                    close(got.re, want, 1e-6, 1e-10 * scale) && got.im.abs() <= 1e-10 * scale,
                    "b={b} c={c} λ={lam} α={k}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn gaussian_in_two_dimensions_matches_oracle() {
    let f = PolyradialSpec::gaussian(2, 1.0, 0.8, 1.0);
    let rules = TransformRules::default();
    for lam in [-3.0, 0.05, 0.7] {
        for alpha in [[0u32, 0], [1, 0], [2, 3], [5, 1]] {
            let got = spectral_coefficient(&f, lam, &[0, 0], &alpha, &rules).unwrap();
            let want = oracle::gaussian_coefficient(0.8, 1.0, lam, &alpha);
            assert!(close(got.re, want, 1e-8, 1e-13), "λ={lam} α={alpha:?}: {got} vs {want}");
        }
    }
}

#[test]
fn coefficient_vanishes_at_lambda_one_beyond_order_zero() {
    let f = PolyradialSpec::gaussian(1, 1.0, 1.0, 1.0);
    let rules = TransformRules::default();
    for k in 1..6 {
        let v = spectral_coefficient(&f, 1.0, &[0], &[k], &rules).unwrap();
        assert!(v.norm() < 1e-12, "α={k}: {v}");
    }
}

#[test]
fn zero_function_gives_zero_table() {
    let table = spectral_table(
        &PolyradialSpec::zero(1),
        &small_grid(),
        &Truncation::default(),
        &TransformRules::default(),
    )
    .unwrap();
    assert_eq!(table.max_abs(), 0.0);
    assert_eq!(invert_at_origin(&table).unwrap(), Complex64::new(0.0, 0.0));
    let report = plancherel_check(&PolyradialSpec::zero(1), &table).unwrap();
    assert_eq!((report.lhs, report.rhs, report.ratio), (0.0, 0.0, 1.0));
}

#[test]
fn table_is_linear() {
    let trunc = Truncation::Fixed {
        m_max: 1,
        alpha_max: 12,
    };
    let rules = TransformRules::default();
    let f = PolyradialSpec::radial(1, vec![gauss_poly(1.0, 2, 1.0, 1, 0.5)]);
    let g = PolyradialSpec {
        n: 1,
        modes: vec![Mode {
            m: vec![1],
            terms: vec![gauss_poly(-2.0, 1, 0.7, 0, 1.5)],
        }],
    };
    let tf = spectral_table(&f, &small_grid(), &trunc, &rules).unwrap();
    let tg = spectral_table(&g, &small_grid(), &trunc, &rules).unwrap();
    let tfg = spectral_table(&f.add(&g).unwrap(), &small_grid(), &trunc, &rules).unwrap();
    let sum = tf.add(&tg).unwrap();
    let scale = sum.max_abs();
    for (a, b) in tfg.values.iter().flatten().zip(sum.values.iter().flatten()) {
        assert!((a - b).norm() <= 1e-13 * scale);
    }
}

#[test]
fn dilation_moves_the_spectrum() {
    let f = PolyradialSpec::radial(
        1,
        vec![gauss_poly(1.0, 2, 1.0, 2, 1.0), gauss_poly(0.5, 0, 2.0, 0, 0.7)],
    );
    let rules = TransformRules::default();
    for rho in [0.5, 2.0, 4.0] {
        let g = f.l1_dilate(rho).unwrap();
        for lam in [-2.0, 0.03, 0.4, 5.0] {
            for k in [0u32, 1, 7, 20] {
                let a = spectral_coefficient(&g, lam, &[0], &[k], &rules).unwrap();
                let b = spectral_coefficient(&f, rho * rho * lam, &[0], &[k], &rules).unwrap();
                assert!(
                    (a - b).norm() <= 1e-6 * b.norm().max(1e-6),
                    "ρ={rho} λ={lam} α={k}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn plancherel_and_inversion_on_the_gaussian() {
    let grid = LambdaGrid::default();
    let trunc = Truncation::plancherel_default();
    let rules = TransformRules::default();
    let cal = calibrate(1, &grid, &trunc, &rules).unwrap();
    assert!((cal.kappa - 1.0).abs() < 1e-4, "κ = {}", cal.kappa);
    assert!(
        (cal.inversion_ratio - 1.0).abs() < 1e-3,
        "inversion = {}",
        cal.inversion_ratio
    );
}

#[test]
fn plancherel_ratio_is_function_independent() {
    let grid = LambdaGrid::default();
    let trunc = Truncation::plancherel_default();
    let rules = TransformRules::default();
    let cases = [
        PolyradialSpec::radial(1, vec![gauss_poly(1.0, 2, 1.0, 0, 1.0)]),
        PolyradialSpec::radial(1, vec![gauss_poly(1.0, 0, 0.5, 2, 2.0)]),
        PolyradialSpec::radial(
            1,
            vec![gauss_poly(1.0, 0, 1.0, 0, 1.0), gauss_poly(-0.3, 4, 1.0, 1, 1.0)],
        ),
        PolyradialSpec::radial(1, vec![gauss_poly(2.0, 2, 3.0, 3, 0.4)]),
        PolyradialSpec::radial(1, vec![gauss_poly(1.0, 6, 1.5, 0, 0.8)]),
    ];
    let ratios: Vec<f64> = cases
        .iter()
        .map(|f| {
            let t = spectral_table(f, &grid, &trunc, &rules).unwrap();
            plancherel_check(f, &t).unwrap().ratio
        })
        .collect();
    let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
    let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi / lo < 1.0 + 1e-4, "{ratios:?}");
    assert!(ratios.iter().all(|r| (r - 1.0).abs() < 1e-4), "{ratios:?}");
}

#[test]
fn angular_modes_enter_plancherel() {
    let f = PolyradialSpec {
        n: 1,
        modes: vec![
            Mode {
                m: vec![0],
                terms: vec![gauss_poly(1.0, 0, 1.0, 0, 1.0)],
            },
            Mode {
                m: vec![-2],
                terms: vec![gauss_poly(0.7, 2, 1.2, 1, 1.0)],
            },
        ],
    };
    let trunc = Truncation::Energy {
        m_max: 2,
        alpha_min: 48,
        energy_max: 40.0,
        alpha_cap: 40_000,
    };
    let t = spectral_table(&f, &LambdaGrid::default(), &trunc, &TransformRules::default()).unwrap();
    let r = plancherel_check(&f, &t).unwrap();
    assert!((r.ratio - 1.0).abs() < 1e-4, "{r:?}");
}

#[test]
fn tail_estimate_bounds_the_gain_from_doubling_alpha() {
    let f = PolyradialSpec::radial(
        1,
        vec![gauss_poly(1.0, 2, 1.0, 1, 1.0), gauss_poly(0.4, 0, 0.3, 0, 2.0)],
    );
    let rules = TransformRules::default();
    let t1 = spectral_table(
        &f,
        &small_grid(),
        &Truncation::Fixed {
            m_max: 0,
            alpha_max: 24,
        },
        &rules,
    )
    .unwrap();
    let t2 = spectral_table(
        &f,
        &small_grid(),
        &Truncation::Fixed {
            m_max: 0,
            alpha_max: 48,
        },
        &rules,
    )
    .unwrap();
    for i in 0..t1.rows() {
        let gain = (t2.hs_norm_at(i).powi(2) - t1.hs_norm_at(i).powi(2)).max(0.0).sqrt();
        assert!(
            gain <= t1.tail_estimates[i] * 1.05 + 1e-14,
            "λ={}: gain {gain} > estimate {}",
            t1.lambdas[i],
            t1.tail_estimates[i]
        );
        assert!(t2.hs_norm_at(i) >= t1.hs_norm_at(i) * (1.0 - 1e-12));
    }
}

#[test]
fn coefficients_stay_below_the_l1_norm() {
    let f = PolyradialSpec::radial(1, vec![gauss_poly(1.0, 2, 1.0, 1, 1.0)]);
    let t = spectral_table(&f, &small_grid(), &Truncation::default(), &TransformRules::default()).unwrap();
    assert!(t.max_abs() <= f.l1_norm().unwrap() * (1.0 + 1e-6));
    let g = PolyradialSpec::gaussian(1, 1.0, 1.0, 1.0);
    let tg = spectral_table(&g, &small_grid(), &Truncation::default(), &TransformRules::default()).unwrap();
    assert!(tg.max_abs() <= oracle::gaussian_l1(1, 1.0, 1.0));
}

#[test]
fn tabulated_profile_matches_its_separable_source() {
    let sep = PolyradialSpec::radial(
        1,
        vec![Term::Separable(SeparableTerm {
            coef: 1.0,
            radial: vec![Factor::bump(0, 2.0, 4)],
            time: Factor::bump(0, 1.5, 4),
        })],
    );
    let tab = TabulatedTerm::from_fn(2.0, 1.5, 401, 401, |r, t| sep.modes[0].eval(&[r], t));
    let tab = PolyradialSpec::radial(1, vec![Term::Tabulated(tab)]);
    let rules = TransformRules::default();
    for lam in [0.1, 1.0, -4.0] {
        for k in [0u32, 3] {
            let a = spectral_coefficient(&sep, lam, &[0], &[k], &rules).unwrap();
            let b = spectral_coefficient(&tab, lam, &[0], &[k], &rules).unwrap();
            assert!((a - b).norm() <= 1e-4 * a.norm().max(1e-3), "λ={lam} α={k}: {a} vs {b}");
        }
    }
}

#[test]
fn json_round_trip_is_lossless() {
    let f = PolyradialSpec::radial(1, vec![gauss_poly(1.0, 1, 0.9, 1, 1.1)]);
    let t = spectral_table(
        &f,
        &small_grid(),
        &Truncation::plancherel_default(),
        &TransformRules::default(),
    )
    .unwrap();
    let back = SpectralCoefficients::from_json(&t.to_json()).unwrap();
    assert_eq!(back, t);
    let bad = t.to_json().replacen("\"n\":1", "\"n\":1,\"extra\":0", 1);
    assert!(SpectralCoefficients::from_json(&bad).is_err());
}
