use std::f64::consts::PI;

use heisenpaley::atoms::{
    build_atom, dilate_atom, moment_order, profile_moment, validate_atom, AtomParams, AtomSpec, AtomicSum,
};
use heisenpaley::fourier::{spectral_coefficient, TransformRules};
use heisenpaley::group::{ball_volume, enumerate_monomials, homogeneous_dimension, MultiIndex};
use heisenpaley::profile::Term;
use heisenpaley::Error;
use proptest::prelude::*;

const CASES: [(f64, i64); 3] = [(1.0, 0), (0.75, 1), (0.5, 4)];

#[test]
fn reference_atoms_are_valid() {
    for (p, s) in CASES {
        for radius in [0.3, 1.0, 2.5] {
            let a = build_atom(&AtomParams::new(1, p, s, radius)).unwrap();
            let r = validate_atom(&a);
            assert!(r.max_moment_residual < 1e-10, "p={p} R={radius}: {r:?}");
            assert!(r.sup_defect.abs() < 1e-9, "p={p} R={radius}: {r:?}");
            assert_eq!(r.support_defect, 0.0);
            assert_eq!(r.moments_checked, enumerate_monomials(1, s).unwrap().len());
        }
    }
}

#[test]
fn unit_atom_for_p_one_has_height_four_over_pi_squared() {
    let a = build_atom(&AtomParams::new(1, 1.0, 0, 1.0)).unwrap();
    assert!((validate_atom(&a).sup_norm - 4.0 / (PI * PI)).abs() < 1e-10);
    assert!(profile_moment(&a.profile, &MultiIndex::new(vec![0], vec![0], 0)).norm() < 1e-10);
}

#[test]
fn constant_perturbation_is_detected() {
    for (p, s) in CASES {
        let a = build_atom(&AtomParams::new(1, p, s, 1.3)).unwrap();
        let mut bad = a.clone();
        bad.profile.modes[0].terms.push(Term::BallIndicator {
            value: 1e-3,
            radius: a.radius,
        });
        let r = validate_atom(&bad);
        let want = 1e-3 * ball_volume(1, a.radius).unwrap();
        assert!(r.max_moment_residual >= want * (1.0 - 1e-9), "{r:?} vs {want}");
        assert!(!r.is_valid(1e-10, 1e-9));
        let zeroth = profile_moment(&bad.profile, &MultiIndex::new(vec![0], vec![0], 0));
        assert!((zeroth.re - want).abs() < 1e-10);
    }
}

#[test]
fn dilation_keeps_atoms_valid() {
    for (p, s) in CASES {
        let a = build_atom(&AtomParams::new(1, p, s, 1.0)).unwrap();
        for rho in [0.05, 0.5, 4.0, 30.0] {
            let b = dilate_atom(&a, rho).unwrap();
            let r = validate_atom(&b);
            let q = homogeneous_dimension(1) as f64;
            // Moments of degree d scale by ρ^{Q+d−Q/p}; compare against the largest such factor.
            let scale = (0..=s).map(|d| rho.powf(q + d as f64 - q / p)).fold(1.0f64, f64::max);
            assert!(r.max_moment_residual < 1e-10 * scale.max(1.0), "p={p} ρ={rho}: {r:?}");
            assert!(r.sup_defect.abs() < 1e-9, "p={p} ρ={rho}: {r:?}");
            assert_eq!(r.support_defect, 0.0);
            assert!((b.sup_bound() - ball_volume(1, rho).unwrap().powf(-1.0 / p)).abs() <= 1e-12 * b.sup_bound());
        }
    }
}

#[test]
fn dilated_spectrum_is_covariant() {
    let rules = TransformRules::default();
    for (p, s) in CASES {
        let a = build_atom(&AtomParams::new(1, p, s, 1.0)).unwrap();
        let q = homogeneous_dimension(1) as f64;
        for rho in [0.25, 3.0] {
            let b = dilate_atom(&a, rho).unwrap();
            let factor = rho.powf(q * (1.0 - 1.0 / p));
            for lam in [-7.0, -0.2, 0.01, 0.6, 15.0] {
                let vals: Vec<_> = [0u32, 1, 4, 13]
                    .iter()
                    .map(|&k| {
                        let x = spectral_coefficient(&b.profile, lam, &[0], &[k], &rules).unwrap();
                        let y = spectral_coefficient(&a.profile, rho * rho * lam, &[0], &[k], &rules).unwrap() * factor;
                        (x, y)
                    })
                    .collect();
                let scale = vals.iter().map(|(_, y)| y.norm()).fold(0.0, f64::max);
                for (k, (x, y)) in vals.iter().enumerate() {
                    assert!((x - y).norm() <= 1e-6 * scale, "p={p} ρ={rho} λ={lam} #{k}: {x} vs {y}");
                }
            }
        }
    }
}

#[test]
fn json_round_trip_rebuilds_profile() {
    let a = build_atom(&AtomParams::new(1, 0.75, 1, 2.0)).unwrap();
    let back = AtomSpec::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    assert!(a.to_json().contains("\"R\":2.0"));
    let bad = a.to_json().replacen("\"seed\"", "\"bogus\":1,\"seed\"", 1);
    assert!(AtomSpec::from_json(&bad).is_err());
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(
        build_atom(&AtomParams::new(1, 1.5, 0, 1.0)),
        Err(Error::InvalidParameter { .. })
    ));
    assert!(build_atom(&AtomParams::new(1, 0.5, 2, 1.0)).is_err());
    assert!(build_atom(&AtomParams::new(1, 1.0, 0, -1.0)).is_err());
    assert!(dilate_atom(&build_atom(&AtomParams::new(1, 1.0, 0, 1.0)).unwrap(), 0.0).is_err());
    assert!(AtomicSum::new(vec![], vec![1.0]).is_err());
}

#[test]
fn two_dimensional_atom() {
    let a = build_atom(&AtomParams::new(2, 0.8, moment_order(2, 0.8) as i64, 1.0)).unwrap();
    let r = validate_atom(&a);
    assert!(r.is_valid(1e-10, 1e-9), "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_admissible_atom_validates(p in 0.4..=1.0f64, extra in 0i64..2, radius in 0.2..5.0f64, seed in 0u64..1000) {
        let j = moment_order(1, p) as i64;
        let mut params = AtomParams::new(1, p, j + extra, radius);
        params.seed = seed;
        let a = build_atom(&params).unwrap();
        let r = validate_atom(&a);
        let vol = ball_volume(1, radius).unwrap();
        // Moments are checked relative to ‖a‖_∞ · |B| · R^d.
        let scale = a.sup_bound() * vol * radius.powi((j + extra) as i32).max(1.0);
        prop_assert!(r.max_moment_residual < 1e-10 * scale.max(1.0), "{:?}", r);
        prop_assert!(r.sup_defect.abs() < 1e-9, "{:?}", r);
        prop_assert_eq!(r.support_defect, 0.0);
    }
}
