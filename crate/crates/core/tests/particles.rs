use std::f64::consts::{FRAC_PI_2, TAU};

use mckv::particles::*;
use mckv::pde::{self, InitSpec, PdeConfig};
use mckv::SpectralField;

fn zero() -> TrigPoly {
    TrigPoly { cos: vec![], sin: vec![] }
}

fn minus_cos() -> TrigPoly {
    TrigPoly { cos: vec![-1.0], sin: vec![] }
}

fn random_positions(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_add(0x9e3779b97f4a7c15);
    (0..n)
        .map(|_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 * TAU
        })
        .collect()
}

#[test]
fn coincident_particles_feel_no_interaction() {
    let mut ens = ParticleEnsemble::from_positions(vec![1.3; 5], 0).unwrap();
    let d = ens.drift(&zero(), &minus_cos());
    assert!(d.iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn two_particle_drift() {
    let mut ens = ParticleEnsemble::from_positions(vec![0.0, FRAC_PI_2], 0).unwrap();
    let fast = ens.drift(&zero(), &minus_cos());
    let slow = ens.drift_pairwise(&zero(), &minus_cos());
    // (1/2)(F'(0) + F'(pi/2)) with F' = sin
    assert!((slow[0] - 0.5).abs() < 1e-15);
    assert!((slow[1] + 0.5).abs() < 1e-15);
    for (a, b) in fast.iter().zip(&slow) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn fast_drift_matches_pairwise() {
    let v = TrigPoly::from_field(&pde::default_v(4));
    let general = TrigPoly { cos: vec![-1.0, 0.3, 0.0], sin: vec![0.2, 0.0, -0.4] };
    for f in [minus_cos(), general] {
        for seed in 0..3 {
            let mut ens = ParticleEnsemble::from_positions(random_positions(100, seed), 1).unwrap();
            let fast = ens.drift(&v, &f);
            let slow = ens.drift_pairwise(&v, &f);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "{err}");
        }
    }
}

#[test]
fn deterministic_fixed_configurations() {
    let cfg = ParticleConfig { sigma: 0.0, v: zero(), ..ParticleConfig::new(0.0) };
    let mut ens = ParticleEnsemble::from_positions(vec![2.0; 4], 3).unwrap();
    for _ in 0..100 {
        ens.em_step(&cfg);
    }
    assert!(ens.positions().iter().all(|&x| x == 2.0));

    let cfg = ParticleConfig { sigma: 0.0, f: zero(), ..ParticleConfig::new(0.0) };
    let mut ens = ParticleEnsemble::from_positions(vec![FRAC_PI_2], 3).unwrap();
    for _ in 0..100 {
        ens.em_step(&cfg);
    }
    assert!((ens.positions()[0] - FRAC_PI_2).abs() < 1e-14);
}

#[test]
fn positions_stay_on_the_torus() {
    let mut ens = ParticleEnsemble::from_positions(vec![-7.0, 13.0, TAU, 0.0], 2).unwrap();
    assert!(ens.positions().iter().all(|&x| (0.0..TAU).contains(&x)));
    let cfg = ParticleConfig::new(2.0);
    for _ in 0..1000 {
        ens.em_step(&cfg);
        assert!(ens.positions().iter().all(|&x| (0.0..TAU).contains(&x)));
        let m = ens.moments();
        assert!(m.m1.abs() <= 1.0 && m.m2.abs() <= 1.0);
    }
}

#[test]
fn permutation_invariance() {
    let x = random_positions(50, 7);
    let perm: Vec<usize> = (0..50).map(|i| (i * 17 + 3) % 50).collect();
    let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
    let mut a = ParticleEnsemble::from_positions(x, 11).unwrap();
    let mut b = ParticleEnsemble::with_streams(xp, 11, Some(&perm)).unwrap();
    let cfg = ParticleConfig::new(0.7);
    for _ in 0..200 {
        a.em_step(&cfg);
        b.em_step(&cfg);
    }
    for (j, &i) in perm.iter().enumerate() {
        assert!((b.positions()[j] - a.positions()[i]).abs() < 1e-12);
    }
    let (ma, mb) = (a.moments(), b.moments());
    assert!((ma.m1 - mb.m1).abs() < 1e-14 && (ma.m2 - mb.m2).abs() < 1e-14);
}

#[test]
fn reproducible_per_seed() {
    let run = |seed| {
        let mut ens = ParticleEnsemble::sample(&InitSpec::Uniform, 200, 0.9, seed).unwrap();
        simulate(&mut ens, &ParticleConfig::new(0.9), 0.1, 10).unwrap().last().unwrap().m2_emp
    };
    assert_eq!(run(4), run(4));
    assert_ne!(run(4), run(5));
}

#[test]
fn single_particle_weak_error() {
    // N independent particles in V = cos 2x against the linear Fokker-Planck solve
    let (sigma, t, x0) = (1.0, 0.5, 1.0);
    let n = 100_000;
    let mut cfg = ParticleConfig::new(sigma);
    cfg.f = zero();
    let mut ens = ParticleEnsemble::sample(&InitSpec::Bump(x0), n, sigma, 21).unwrap();
    simulate(&mut ens, &cfg, t, 1000).unwrap();
    let cos: Vec<f64> = ens.positions().iter().map(|x| x.cos()).collect();
    let mean = cos.iter().sum::<f64>() / n as f64;
    let var = cos.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);

    let order = 48;
    let pcfg = PdeConfig {
        f: SpectralField::zeros(order),
        v: pde::default_v(order),
        t_final: t,
        ..PdeConfig::new(sigma).with_order(order)
    };
    let rho0 = InitSpec::Bump(x0).to_field(sigma, order).unwrap();
    let traj = pde::evolve(&rho0, &pcfg).unwrap();
    let want = traj.final_state.rho.cos_moment();
    assert!((mean - want).abs() <= 3.0 * (var / n as f64).sqrt(), "{mean} vs {want}");
}

#[test]
fn follows_the_pde_from_a_concentrated_start() {
    let (sigma, t) = (0.6, 2.0);
    let n = 100_000;
    let mut ens = ParticleEnsemble::sample(&InitSpec::Bump(FRAC_PI_2), n, sigma, 8).unwrap();
    let samples = simulate(&mut ens, &ParticleConfig::new(sigma), t, 1000).unwrap();
    let pcfg = PdeConfig { t_final: t, ..PdeConfig::new(sigma) };
    let rho0 = InitSpec::Bump(FRAC_PI_2).to_field(sigma, pcfg.order).unwrap();
    let traj = pde::evolve(&rho0, &pcfg).unwrap();
    let want = traj.final_state.rho.sin_moment();
    let got = samples.last().unwrap().m2_emp;
    assert!((got - want).abs() <= 0.02, "{got} vs {want}");
}

#[test]
fn histogram_is_a_density() {
    let ens = ParticleEnsemble::sample(&InitSpec::Uniform, 10_000, 0.9, 1).unwrap();
    let h = ens.histogram(64);
    assert_eq!(h.len(), 64);
    let integral: f64 = h.iter().sum::<f64>() * TAU / 64.0;
    assert!((integral - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_input() {
    assert!(ParticleEnsemble::from_positions(vec![], 0).is_err());
    assert!(ParticleEnsemble::from_positions(vec![f64::NAN], 0).is_err());
    assert!(ParticleEnsemble::with_streams(vec![0.0, 1.0], 0, Some(&[0])).is_err());
    let cfg = ParticleConfig { dt: 0.0, ..ParticleConfig::new(0.9) };
    assert!(cfg.validate().is_err());
}
