use gauss_quad::GaussLaguerre;
use heisenpaley::laguerre::{decay_cutoff, laguerre_fn, laguerre_fn_all, laguerre_poly, Recurrence};
use proptest::prelude::*;

fn ln_binom(a: f64, b: f64) -> f64 {
    libm::lgamma(a + 1.0) - libm::lgamma(b + 1.0) - libm::lgamma(a - b + 1.0)
}

/// Explicit sum `L_k^δ(x) = Σ_i (−1)^i C(k+δ, k−i) x^i / i!`.
fn series(k: u32, delta: u32, x: f64) -> f64 {
    (0..=k)
        .map(|i| {
            let mag = ln_binom((k + delta) as f64, (k - i) as f64) - libm::lgamma(i as f64 + 1.0);
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * mag.exp() * x.powi(i as i32)
        })
        .sum()
}

#[test]
fn recurrence_matches_series() {
    for delta in 0..=6u32 {
        for k in 0..=15u32 {
            for x in [0.0, 0.03, 0.5, 1.0, 2.7, 6.0, 11.0, 19.5] {
                let got = laguerre_poly(k as i64, delta as i64, x).unwrap();
                let want = series(k, delta, x);
                let scale: f64 = (0..=k)
                    .map(|i| {
                        (ln_binom((k + delta) as f64, (k - i) as f64) - libm::lgamma(i as f64 + 1.0)).exp()
                            * x.powi(i as i32)
                    })
                    .sum();
                assert!(
                    (got - want).abs() <= 1e-10 * scale,
                    "k={k} δ={delta} x={x}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn orthonormal_under_gauss_laguerre() {
    // ∫ ℓ_j ℓ_k dx with weight x^δ e^{−x} divided back out.
    for delta in 0..=4u32 {
        let rule = GaussLaguerre::new(16, delta as f64).unwrap();
        let rec = Recurrence::new(delta, 12);
        let mut gram = [[0.0f64; 13]; 13];
        let mut buf = [0.0; 13];
        for (x, w) in rule.nodes().zip(rule.weights()) {
            rec.fill(*x, &mut buf);
            let back = x.exp() * x.powi(-(delta as i32));
            for j in 0..13 {
                for k in 0..13 {
                    gram[j][k] += w * back * buf[j] * buf[k];
                }
            }
        }
        for (j, row) in gram.iter().enumerate() {
            for (k, g) in row.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8, "δ={delta} ({j},{k}): {g}");
            }
        }
    }
}

#[test]
fn large_orders_stay_finite() {
    let v = laguerre_fn_all(20_000, 30, 5e4);
    assert!(v.iter().all(|x| x.is_finite()));
    assert!(v.iter().any(|x| *x != 0.0));
    assert!(laguerre_fn(3000, 200, 1e-3).unwrap().is_finite());
}

#[test]
fn decays_past_the_cutoff() {
    for (k, delta) in [(0u32, 0u32), (10, 2), (200, 5)] {
        let x = decay_cutoff(k, delta);
        assert!(laguerre_fn(k as i64, delta as i64, x).unwrap().abs() < 1e-10);
    }
}

#[test]
fn negative_inputs_are_rejected() {
    assert!(laguerre_poly(-1, 0, 1.0).is_err());
    assert!(laguerre_fn(1, -2, 1.0).is_err());
    assert!(laguerre_fn(1, 0, -0.5).is_err());
}

proptest! {
    #[test]
    fn vector_and_scalar_evaluations_agree(delta in 0u32..8, x in 0.0..200.0f64) {
        let all = laguerre_fn_all(60, delta, x);
        for k in [0u32, 1, 7, 33, 60] {
            let one = laguerre_fn(k as i64, delta as i64, x).unwrap();
            prop_assert!((all[k as usize] - one).abs() <= 1e-9 * (1.0 + one.abs()));
        }
    }

    #[test]
    fn bounded_by_one(delta in 0u32..10, k in 0u32..300, x in 0.0..2000.0f64) {
        // |ℓ_k^δ(x)| ≤ 1 for every δ ≥ 0.
        let v = laguerre_fn(k as i64, delta as i64, x).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-9);
    }
}
