use std::f64::consts::{PI, TAU};

use mckv::fourier::*;
use mckv::SpectralField;
use proptest::prelude::*;

fn field(order: usize, seed: u64) -> SpectralField {
    // cheap deterministic coefficients with decay
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let coeffs = (0..2 * order + 1)
        .map(|i| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let k = (i as f64 - order as f64).abs();
            u / (1.0 + k * k)
        })
        .collect();
    SpectralField::from_coeffs(order, coeffs).unwrap()
}

#[test]
fn parseval() {
    for seed in 0..5 {
        let f = field(12, seed);
        let g = to_grid(&f, 64).unwrap();
        let sq: f64 = g.values().iter().map(|v| v * v).sum::<f64>() * g.spacing();
        let sum: f64 = f.coeffs().iter().map(|c| c * c).sum();
        assert!((sq - sum).abs() <= 1e-12 * sum, "{sq} {sum}");
        assert!((f.l2_norm_sq() - sum).abs() <= 1e-14 * sum);
    }
}

#[test]
fn derivative_commutes_with_heat_flow() {
    let f = field(10, 3);
    for t in [0.0, 0.01, 0.5] {
        let a = derivative(&heat_semigroup(&f, t).unwrap());
        let b = heat_semigroup(&derivative(&f), t).unwrap();
        assert!(a.l2_distance(&b) <= 1e-15 * a.l2_norm());
    }
}

#[test]
fn heat_semigroup_eigen_action() {
    let e3 = SpectralField::basis(5, 3);
    let out = heat_semigroup(&e3, 0.1).unwrap();
    assert!((out.get(3) - (-0.9f64).exp()).abs() < 1e-15);
    let e0 = SpectralField::basis(5, 0);
    assert_eq!(heat_semigroup(&e0, 7.0).unwrap().coeffs(), e0.coeffs());
    assert!(heat_semigroup(&e0, -1.0).is_err());
}

#[test]
fn heat_kernel_has_unit_mass() {
    for t in [1e-3, 0.05, 0.3, 1.0, 10.0] {
        let tol = 1e-12;
        let g = periodic_heat_kernel(t, tol).unwrap();
        assert!((g.integral() - 1.0).abs() <= 1e-10, "t={t}: {}", g.integral());
        assert!(g.min() >= 0.0);
    }
    assert!(periodic_heat_kernel(0.0, 1e-12).is_err());
}

#[test]
fn heat_semigroup_equals_kernel_convolution() {
    // direct quadrature of int G(x - y) sin(2y) dy against the spectral flow
    let t = 0.05;
    let m = 1024;
    let kernel = |x: f64| {
        let mut s = 0.0;
        for n in -4..=4 {
            s += heat_kernel_line(t, x + TAU * n as f64);
        }
        s
    };
    let h = TAU / m as f64;
    let f = SpectralField::from_trig(4, 0.0, &[], &[0.0, 1.0]);
    let flowed = heat_semigroup(&f, t).unwrap();
    for &x in &[0.0, 0.4, 1.3, 2.9, 5.5] {
        let direct: f64 = (0..m).map(|j| {
            let y = j as f64 * h;
            kernel(x - y) * (2.0 * y).sin()
        }).sum::<f64>() * h;
        assert!((direct - flowed.eval(x)).abs() < 1e-10, "{direct} {}", flowed.eval(x));
        assert!((direct - (-4.0 * t).exp() * (2.0 * x).sin()).abs() < 1e-10);
    }
    // and through the library's own spectral convolution
    let gk = to_spectral(&periodic_heat_kernel(t, 1e-14).unwrap(), 4).unwrap();
    let c = convolve(&gk, &f);
    assert!(c.l2_distance(&flowed) < 1e-10);
}

#[test]
fn heat_kernel_semigroup_property() {
    let (s, t) = (0.1, 0.2);
    let order = 48;
    let gs = to_spectral(&periodic_heat_kernel(s, 1e-14).unwrap(), order).unwrap();
    let gt = to_spectral(&periodic_heat_kernel(t, 1e-14).unwrap(), order).unwrap();
    let composed = to_grid(&convolve(&gs, &gt), 256).unwrap();
    let direct = periodic_heat_kernel_on(s + t, 1e-14, 256).unwrap();
    assert!(composed.max_abs_diff(&direct) < 1e-10);
}

#[test]
fn kernel_derivative_l1_bound() {
    // on the line ||G_t'||_1 = 1 / sqrt(pi t); wrapping can only lower it
    for t in [1e-3, 1e-2, 0.1, 0.5, 1.0] {
        let d = periodic_heat_kernel_derivative_on(t, 1e-14, 8192).unwrap();
        let scaled = d.l1_norm() * t.sqrt();
        assert!(scaled <= 2.0);
        assert!(scaled <= 1.0 / PI.sqrt() + 1e-6, "t={t}: {scaled}");
        if t <= 1e-2 {
            // the kink of |G'| at 0 limits the trapezoid rule to O(h^2)
            assert!((scaled - 1.0 / PI.sqrt()).abs() < 1e-4, "t={t}: {scaled}");
        }
    }
}

#[test]
fn operator_p_constant_mode() {
    let t = 0.7;
    for k in 1..=4i64 {
        let z = vec![SpectralField::basis(6, k); 37];
        let p = operator_p(&z, t).unwrap();
        let kf = k as f64;
        let expected = kf * (1.0 - (-t * kf * kf).exp()) / (kf * kf);
        // d/dx sin(kx) = k cos(kx), i.e. e_k -> k e_{-k}
        assert!((p.get(-k) - expected).abs() < 1e-14);
        let rest: f64 = p.modes().filter(|&(j, _)| j != -k).map(|(_, c)| c.abs()).sum();
        assert_eq!(rest, 0.0);
    }
    let zero = vec![SpectralField::zeros(4); 3];
    assert_eq!(operator_p(&zero, 1.0).unwrap().l2_norm(), 0.0);
    assert!(operator_p(&[], 1.0).is_err());
}

#[test]
fn operator_p_norm_bound() {
    // sup_k k e^{-s k^2} = 1 / sqrt(2 e s)
    let c2 = 1.0 / (2.0 * std::f64::consts::E).sqrt();
    for seed in 0..6 {
        let n = 20;
        let t = 0.3 + 0.1 * seed as f64;
        let h = t / n as f64;
        let z: Vec<SpectralField> = (0..n).map(|j| field(16, seed * 100 + j)).collect();
        let p = operator_p(&z, t).unwrap();
        let bound: f64 = z
            .iter()
            .enumerate()
            .map(|(j, zj)| {
                let a = t - j as f64 * h;
                let b = t - (j + 1) as f64 * h;
                2.0 * (a.sqrt() - b.max(0.0).sqrt()) * zj.l2_norm()
            })
            .sum();
        assert!(p.l2_norm() <= c2 * bound, "{} > {}", p.l2_norm(), c2 * bound);
    }
}

#[test]
fn convolution_of_uniform_with_cosine_vanishes() {
    let rho = SpectralField::uniform_density(4);
    let f = SpectralField::from_trig(4, 0.0, &[-1.0], &[]);
    assert!(convolve(&f, &rho).l2_norm() < 1e-16);
    // rho = (1 + cos y) / 2 pi gives -cos(x) / 2
    let rho = SpectralField::from_trig(4, 1.0 / TAU, &[1.0 / TAU], &[]);
    let c = convolve(&f, &rho);
    for &x in &[0.0, 1.0, 2.5] {
        assert!((c.eval(x) + 0.5 * x.cos()).abs() < 1e-14);
    }
    let g = to_grid(&rho, 16).unwrap();
    assert!((g.integral() - 1.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn convolution_is_commutative_and_bilinear(a in 0u64..1000, b in 0u64..1000, s in -3.0f64..3.0) {
        let f = field(8, a);
        let g = field(8, b);
        let fg = convolve(&f, &g);
        let gf = convolve(&g, &f);
        prop_assert!(fg.l2_distance(&gf) <= 1e-14 * (1.0 + fg.l2_norm()));
        let lhs = convolve(&f.scaled(s), &g);
        prop_assert!(lhs.l2_distance(&fg.scaled(s)) <= 1e-13 * (1.0 + fg.l2_norm()));
        let mut sum = f.clone();
        sum.axpy(1.0, &g);
        let mut split = convolve(&f, &g);
        split.axpy(1.0, &convolve(&g, &g));
        prop_assert!(convolve(&sum, &g).l2_distance(&split) <= 1e-13 * (1.0 + split.l2_norm()));
    }

    #[test]
    fn round_trip_is_exact_for_band_limited(seed in 0u64..1000) {
        let f = field(7, seed);
        let back = to_spectral(&to_grid(&f, 32).unwrap(), 7).unwrap();
        prop_assert!(back.l2_distance(&f) < 1e-13);
    }
}
