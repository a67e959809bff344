use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use mckv::stationary::*;
use mckv::MomentPair;

fn series_i(n: u32, z: f64) -> f64 {
    let mut term = (z / 2.0).powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for j in 1..400 {
        term *= (z / 2.0).powi(2) / (j as f64 * (j + n) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    TAU * sum
}

/// Plain trapezoid rule on a fine grid, independent of the library's quadrature.
fn trap(f: impl Fn(f64) -> f64) -> f64 {
    let m = 8192;
    let h = TAU / m as f64;
    (0..m).map(|j| f(j as f64 * h)).sum::<f64>() * h
}

#[test]
fn partition_function_and_density() {
    assert!((partition_z(1.0, MomentPair::new(0.0, 0.0)).unwrap() - series_i(0, 1.0)).abs() < 1e-10);
    let m = MomentPair::new(0.3, 0.2);
    let z = partition_z(0.5, m).unwrap();
    let direct = trap(|x| ((-(2.0 * x).cos() + 0.3 * x.cos() + 0.2 * x.sin()) / 0.5).exp());
    assert!((z / direct - 1.0).abs() < 1e-10);

    let d = density(0.2, MomentPair::new(0.0, 0.8), 4096).unwrap();
    assert!((d.samples.integral() - 1.0).abs() < 1e-10);
    let d = density(1.0, MomentPair::new(0.0, 0.0), 1024).unwrap();
    for &x in &[0.3, 1.1, 2.0] {
        assert!((d.eval(x) - d.eval(-x)).abs() < 1e-14);
        assert!((d.eval(x) - d.eval(x + PI)).abs() < 1e-13);
    }
    assert!(d.eval(FRAC_PI_2) > d.eval(FRAC_PI_2 + 0.1));
    assert!(d.eval(FRAC_PI_2) > d.eval(FRAC_PI_2 - 0.1));
}

#[test]
fn map_g_axis_invariance() {
    for sigma in [0.3, 1.0, 5.0] {
        let g = map_g(sigma, MomentPair::new(0.0, 0.0)).unwrap();
        assert!(g.m1.abs() < 1e-14 && g.m2.abs() < 1e-14);
        let g = map_g(sigma, MomentPair::new(0.4, 0.0)).unwrap();
        assert!(g.m2.abs() < 1e-14);
        let g = map_g(sigma, MomentPair::new(0.0, -0.7)).unwrap();
        assert!(g.m1.abs() < 1e-14);
        assert!((map_gbar(sigma, -0.7).unwrap() - g.m2).abs() < 1e-12);
        let g = map_g(sigma, MomentPair::new(0.9, -0.9)).unwrap();
        assert!(g.m1.abs() <= 1.0 && g.m2.abs() <= 1.0);
    }
}

#[test]
fn moment_sequences_against_bessel_series() {
    for sigma in [0.3, 0.7, 1.0, 2.0] {
        let z = 1.0 / sigma;
        assert!((moment_seq_s(sigma, 0).unwrap() / series_i(0, z) - 1.0).abs() < 1e-11);
        let s2 = 0.5 * (series_i(0, z) + series_i(1, z));
        assert!((moment_seq_s(sigma, 2).unwrap() / s2 - 1.0).abs() < 1e-9);
        assert!(moment_seq_s(sigma, 1).unwrap().abs() < 1e-12 * s2);
        assert!(moment_seq_s(sigma, 3).unwrap().abs() < 1e-12 * s2);
    }
    let s: Vec<f64> = (0..5).map(|k| moment_seq_s(0.7, k).unwrap()).collect();
    assert!(s[4] < s[2] && s[2] < s[0]);
}

#[test]
fn zeta_prime_identity_and_sign() {
    for i in 0..10 {
        let sigma = 0.3 + 0.15 * i as f64;
        let z = 1.0 / sigma;
        let s0 = series_i(0, z);
        let s2 = 0.5 * (series_i(0, z) + series_i(1, z));
        let oracle = (s2 - sigma * s0) / sigma;
        let got = zeta_prime_at_zero(sigma).unwrap();
        assert!((got / oracle - 1.0).abs() < 1e-8, "sigma={sigma}");
        let via_fc = 0.5 * s0 * mckv::bessel::f_c(sigma).unwrap();
        assert!((got / via_fc - 1.0).abs() < 1e-8);
    }
    assert!(zeta_prime_at_zero(0.75).unwrap() > 0.0);
    assert!(zeta_prime_at_zero(0.79).unwrap() < 0.0);
}

#[test]
fn zeta_series_against_quadrature() {
    let want = zeta(0.6, 0.5).unwrap();
    assert!((zeta_series(0.6, 0.5, 1e-12).unwrap() - want).abs() < 1e-9 * want.abs().max(1.0));
    for m in [0.1, 0.4, 0.9] {
        let a = zeta_series(0.8, m, 1e-14).unwrap();
        let b = zeta_series(0.8, -m, 1e-14).unwrap();
        assert!((a + b).abs() < 1e-13 * a.abs());
    }
    assert_eq!(zeta_series(0.6, 0.0, 1e-12).unwrap(), 0.0);
}

#[test]
fn zeta_at_one_is_negative() {
    for sigma in [0.3, 0.6, 1.0] {
        assert!(zeta(sigma, 1.0).unwrap() < 0.0);
        let scale = moment_seq_s(sigma, 0).unwrap();
        assert!(zeta(sigma, 0.0).unwrap().abs() < 1e-14 * scale);
        assert!(xi(sigma, 0.0).unwrap().abs() < 1e-14 * scale);
    }
}

#[test]
fn upsilon_is_decreasing() {
    for sigma in [0.3, 0.6, 1.0] {
        let u: Vec<f64> = (0..=12).map(|k| upsilon(sigma, k).unwrap()).collect();
        for w in u[..9].windows(2) {
            assert!(w[1] < w[0], "sigma={sigma}: {u:?}");
        }
        let s0 = moment_seq_s(sigma, 0).unwrap();
        let s2 = moment_seq_s(sigma, 2).unwrap();
        assert!((u[0] - (s2 / s0 - sigma)).abs() < 1e-12);
    }
    assert!((upsilon(0.6, 12).unwrap() + 0.6).abs() < 0.1);
}

#[test]
fn phase_transition_counts() {
    for (sigma, count) in [(0.05, 3), (0.6, 3), (0.75, 3), (0.78, 1), (0.9, 1), (1.5, 1)] {
        let r = find_fixed_points(sigma, 1e-8).unwrap();
        assert_eq!(r.count, count, "sigma={sigma}");
        for m in &r.solutions {
            assert!(m.m1.abs() <= 1e-8);
            // each solution is a fixed point of the map, checked independently
            let g = map_g(sigma, *m).unwrap();
            assert!(g.distance(m) < 1e-7);
        }
        if count == 3 {
            let m_star = r.m_star.unwrap();
            assert!(m_star > 0.0 && m_star < 1.0);
            assert!((map_gbar(sigma, m_star).unwrap() - m_star).abs() < 1e-8);
        }
    }
}

#[test]
fn quadrant_exclusion_signs() {
    assert!(quadrant_exclusion(0.6, 0.5, 0.0).unwrap().abs() < 1e-12);
    assert!(quadrant_exclusion(0.6, 0.5, FRAC_PI_2).unwrap().abs() < 1e-12);
    assert!(quadrant_exclusion(0.6, 1.0, FRAC_PI_4).unwrap() > 0.0);
    assert!(quadrant_exclusion(0.6, 1.0, 3.0 * FRAC_PI_4).unwrap() < 0.0);
}

#[test]
fn xi_has_no_nontrivial_zero() {
    let r = xi_uniqueness_check(0.5).unwrap();
    assert!(r.linear_coefficient < 0.0);
    for sigma in [0.8, 2.0] {
        assert!(xi_uniqueness_check(sigma).unwrap().holds);
    }
    assert!(xi_uniqueness_check(0.4).is_err());
}

#[test]
fn laplace_leading_order() {
    for sigma in [0.05, 0.02] {
        assert!(s0_leading_order_error(sigma).unwrap() <= 3.0 * sigma);
    }
    for m in [0.0, 0.5, 1.0] {
        for c in h_expansions(0.02, m).unwrap() {
            assert!(c.error_over_sigma <= 0.2, "{} m={m}: {}", c.integrand, c.error_over_sigma);
        }
    }
}
