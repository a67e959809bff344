//! Acceptance criteria 1-9, run one after another so that the timings are
//! not distorted by other tests. Prints one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::time::{Duration, Instant};

use mckv::bessel::{self, bessel_i_scaled};
use mckv::particles::{self, ParticleConfig, ParticleEnsemble, TrigPoly};
use mckv::pde::{self, default_f, default_v, InitSpec, PdeConfig};
use mckv::spde::{self, CovarianceSpec, NoiseStream, SpdeConfig};
use mckv::stationary::{self, density, MomentPair};
use mckv::SpectralField;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn err(e: mckv::Error) -> String {
    e.to_string()
}

fn pde_cfg(sigma: f64, order: usize, t_final: f64) -> PdeConfig {
    let c = PdeConfig::new(sigma).with_order(order);
    PdeConfig { v: default_v(order), f: default_f(order), t_final, sample_interval: t_final.min(1.0), ..c }
}

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

fn criterion_1() -> Outcome {
    let mut out = Vec::new();
    let mut e = Vec::new();
    let (code, dt) = timed(|| mckv::cli::run(["mckv", "sigma-c", "--format", "csv"], &mut out, &mut e));
    ensure(code == 0, String::from_utf8_lossy(&e))?;
    let text = String::from_utf8(out).unwrap();
    let row = text.lines().nth(1).ok_or("no output row")?;
    let sigma_c: f64 = row.split(',').next().unwrap().parse().map_err(|_| "unparsable sigma_c")?;
    ensure((sigma_c - 0.7709).abs() <= 5e-4, format!("sigma_c = {sigma_c}"))?;
    ensure(dt < Duration::from_secs(1), format!("took {dt:?}"))?;
    Ok(format!("sigma_c = {sigma_c:.6}, {dt:.2?}"))
}

fn criterion_2() -> Outcome {
    let cases = [(0.05, 3), (0.6, 3), (0.75, 3), (0.78, 1), (0.9, 1), (1.5, 1)];
    let (reports, dt) = timed(|| cases.iter().map(|&(s, _)| stationary::find_fixed_points(s, 1e-10)).collect::<Vec<_>>());
    let mut worst_m1: f64 = 0.0;
    for ((sigma, count), r) in cases.iter().zip(reports) {
        let r = r.map_err(err)?;
        ensure(r.count == *count, format!("sigma={sigma}: count {} != {count}", r.count))?;
        for m in &r.solutions {
            worst_m1 = worst_m1.max(m.m1.abs());
        }
    }
    ensure(worst_m1 <= 1e-8, format!("|m1| = {worst_m1:e}"))?;
    ensure(dt < Duration::from_secs(10), format!("took {dt:?}"))?;
    Ok(format!("counts 3,3,3,1,1,1, max |m1| = {worst_m1:.1e}, {dt:.2?}"))
}

fn criterion_3() -> Outcome {
    let mut worst_zp: f64 = 0.0;
    for i in 0..10 {
        let sigma = 0.3 + 0.15 * i as f64;
        let z = 1.0 / sigma;
        let (s0, s2) = (series_i(0, z), 0.5 * (series_i(0, z) + series_i(1, z)));
        let oracle = (s2 - sigma * s0) / sigma;
        let got = stationary::zeta_prime_at_zero(sigma).map_err(err)?;
        let via_fc = 0.5 * bessel::bessel_i(0, z).map_err(err)? * bessel::f_c(sigma).map_err(err)?;
        worst_zp = worst_zp.max((got / oracle - 1.0).abs()).max((got / via_fc - 1.0).abs());
    }
    ensure(worst_zp <= 1e-8, format!("zeta'(0) relative error {worst_zp:e}"))?;

    let mut worst_odd: f64 = 0.0;
    for sigma in [0.3, 0.6, 1.0, 2.0] {
        for k in [1, 3, 5, 7] {
            worst_odd = worst_odd.max(stationary::moment_seq_s(sigma, k).map_err(err)?.abs());
        }
    }
    ensure(worst_odd <= 1e-12, format!("odd moments {worst_odd:e}"))?;

    for sigma in [0.3, 0.6, 1.0] {
        let u = (0..=8).map(|k| stationary::upsilon(sigma, k)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        ensure(u.windows(2).all(|w| w[1] < w[0]), format!("upsilon not decreasing at sigma={sigma}"))?;
    }

    let mut worst_series: f64 = 0.0;
    for (sigma, m) in [(0.6, 0.5), (0.6, 0.9), (0.8, 0.3), (1.0, 0.7)] {
        let quad = stationary::zeta(sigma, m).map_err(err)?;
        let series = stationary::zeta_series(sigma, m, 1e-12).map_err(err)?;
        worst_series = worst_series.max((series / quad - 1.0).abs());
    }
    ensure(worst_series <= 1e-8, format!("zeta series relative error {worst_series:e}"))?;
    Ok(format!("zeta'(0) {worst_zp:.1e}, odd s {worst_odd:.1e}, zeta series {worst_series:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut worst_s0: f64 = 0.0;
    for sigma in [0.05, 0.02] {
        let e = stationary::s0_leading_order_error(sigma).map_err(err)?;
        ensure(e <= 3.0 * sigma, format!("s0 at sigma={sigma}: {e}"))?;
        // s0 = 2 pi I0(1/sigma), with the exponential factored out
        let i0 = bessel_i_scaled(0, 1.0 / sigma);
        let ratio = i0.mantissa * (i0.log_scale - 1.0 / sigma).exp() / (2.0 * (PI * sigma / 2.0).sqrt());
        ensure(((ratio - 1.0).abs() - e).abs() < 1e-10, format!("s0 oracle disagrees at sigma={sigma}"))?;
        worst_s0 = worst_s0.max(e / sigma);
    }
    let mut worst_h: f64 = 0.0;
    for m in [0.0, 0.25, 0.5, 0.75, 1.0] {
        for c in stationary::h_expansions(0.02, m).map_err(err)? {
            worst_h = worst_h.max(c.error_over_sigma);
        }
    }
    ensure(worst_h <= 0.2, format!("expansion error/sigma {worst_h}"))?;
    Ok(format!("s0 error/sigma {worst_s0:.3}, expansions error/sigma {worst_h:.3}"))
}

fn criterion_5() -> Outcome {
    let order = pde::DEFAULT_ORDER;
    let mut worst_res: f64 = 0.0;
    for sigma in [0.05, 0.6, 0.75, 0.78, 0.9, 1.5] {
        let r = stationary::find_fixed_points(sigma, 1e-10).map_err(err)?;
        for m in &r.solutions {
            let rho = density(sigma, *m, 64).map_err(err)?.to_spectral(order).map_err(err)?;
            let res = pde::rhs(&rho, &pde_cfg(sigma, order, 1.0)).map_err(err)?.l2_norm();
            worst_res = worst_res.max(res);
        }
    }
    ensure(worst_res <= 1e-6, format!("stationarity residual {worst_res:e}"))?;

    let rho = InitSpec::Bump(1.0).to_field(0.6, order).map_err(err)?;
    let (traj, dt_mass) = timed(|| pde::evolve(&rho, &pde_cfg(0.6, order, 10.0)));
    let drift = traj.map_err(err)?.mass_drift;
    ensure(drift <= 1e-12, format!("mass drift {drift:e}"))?;
    ensure(dt_mass < Duration::from_secs(30), format!("T=10 run took {dt_mass:?}"))?;

    let sigma = 0.9;
    let mut rho = SpectralField::uniform_density(order);
    rho.set(-1, 0.1 * PI.sqrt());
    let (traj, dt_conv) = timed(|| pde::evolve(&rho, &pde_cfg(sigma, order, 50.0)));
    let traj = traj.map_err(err)?;
    let target = density(sigma, MomentPair::new(0.0, 0.0), 64).map_err(err)?.to_spectral(order).map_err(err)?;
    let e = traj.final_state.rho.l2_distance(&target);
    ensure(e <= 1e-4, format!("terminal L2 error {e:e}"))?;
    ensure(dt_conv < Duration::from_secs(30), format!("T=50 run took {dt_conv:?}"))?;
    Ok(format!(
        "residual {worst_res:.1e}, mass drift {drift:.1e} ({dt_mass:.1?}), L2 error {e:.1e} ({dt_conv:.1?})"
    ))
}

fn criterion_6() -> Outcome {
    let order = 32;
    let pcfg = PdeConfig { sample_interval: 1e-3, ..pde_cfg(0.6, order, 0.5) };
    let u0 = InitSpec::Bump(1.0).to_field(0.6, order).map_err(err)?;
    let traj = spde::evolve(&u0, &SpdeConfig::new(pcfg.clone(), CovarianceSpec::zero(order), 3)).map_err(err)?;
    let mut integ = pde::Integrator::new(&pcfg).map_err(err)?;
    let mut state = pde::PdeState { rho: u0, t: 0.0 };
    for _ in 0..500 {
        state = integ.step(&state).map_err(err)?;
    }
    ensure(traj.final_state.u.coeffs() == state.rho.coeffs(), "zero-noise SPDE differs from the PDE")?;

    let q = CovarianceSpec::power_law(order, 1.0, 0.9).map_err(err)?;
    let (t, dt, n) = (0.5, 0.01, 10_000);
    let mut noise = NoiseStream::new(42);
    let mut worst_z: f64 = 0.0;
    for k in [1i64, 2, -3] {
        let lambda_sq = q.lambda_sq(k);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let mut w = 0.0;
                for _ in 0..(t / dt as f64).round() as usize {
                    w = spde::ou_update(w, k, lambda_sq.sqrt(), dt, &mut noise);
                }
                w
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let k2 = (k * k) as f64;
        let want = lambda_sq * (1.0 - (-2.0 * k2 * t).exp()) / (2.0 * k2);
        let se = want * (2.0 / (n as f64 - 1.0)).sqrt();
        worst_z = worst_z.max((var - want).abs() / se);
    }
    ensure(worst_z <= 3.0, format!("OU variance off by {worst_z:.2} SE"))?;

    let dt = 1e-3;
    let pcfg = PdeConfig { dt, sample_interval: dt, ..pde_cfg(0.6, order, 1.0) };
    let (u, vw) = spde::decomposition_check(&SpectralField::uniform_density(order), &SpdeConfig::new(pcfg, q, 11))
        .map_err(err)?;
    let d = u.l2_distance(&vw);
    ensure(d <= 10.0 * dt, format!("decomposition distance {d:e}"))?;
    Ok(format!("bit-for-bit zero noise, OU variance within {worst_z:.2} SE, decomposition {d:.1e}"))
}

fn criterion_7() -> Outcome {
    let (sigma, order) = (0.6, 64);
    let pcfg = PdeConfig { dt: 1e-3, ..pde_cfg(sigma, order, 1.0) };
    let y0 = SpectralField::uniform_density(order);
    let m = pde::nontrivial_state(sigma, 1.0).map_err(err)?;
    let y1 = density(sigma, m, 64).map_err(err)?.to_spectral(order).map_err(err)?;
    let q = CovarianceSpec::power_law(order, 1.0, 0.9).map_err(err)?;
    let control = spde::build_control(&y0, &y1, 1.0, &q, &pcfg).map_err(err)?;
    let end = spde::run_controlled(&control, &pcfg).map_err(err)?;
    let e = end.l2_distance(&y1);
    ensure(e <= 1e-4, format!("endpoint error {e:e}"))?;
    Ok(format!("m* = {:.8}, endpoint L2 error {e:.1e}", m.m2))
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

fn criterion_8() -> Outcome {
    let v = TrigPoly::from_field(&default_v(4));
    let f = TrigPoly::from_field(&default_f(4));
    let mut ens = ParticleEnsemble::from_positions(random_positions(500, 1), 1).map_err(err)?;
    let fast = ens.drift(&v, &f);
    let slow = ens.drift_pairwise(&v, &f);
    let gap = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(gap <= 1e-12, format!("fast vs pairwise drift {gap:e}"))?;

    let cfg = ParticleConfig::new(0.9);
    let report = particles::chaos_compare(&[1_000, 10_000, 100_000], &cfg, &InitSpec::Uniform, 1.0, 8, 0, 1)
        .map_err(err)?;
    let slope = report.exponent;
    ensure((slope + 0.5).abs() <= 0.15, format!("chaos exponent {slope:.3}"))?;

    let (run, dt) = timed(|| -> mckv::Result<f64> {
        let cfg = ParticleConfig::new(0.6);
        let mut ens = ParticleEnsemble::sample(&InitSpec::Bump(FRAC_PI_2), 100_000, 0.6, 7)?;
        let s = particles::simulate(&mut ens, &cfg, 10.0, 1000)?;
        Ok(s.last().map(|x| x.m2_emp).unwrap_or(f64::NAN))
    });
    let m2 = run.map_err(err)?;
    ensure(dt < Duration::from_secs(60), format!("N=1e5, T=10 took {dt:?}"))?;
    Ok(format!("drift gap {gap:.1e}, exponent {slope:.3}, N=1e5 T=10 in {dt:.1?} (m2 = {m2:.4})"))
}

fn criterion_9() -> Outcome {
    let (sigma, order) = (0.6, 64);
    let pcfg = PdeConfig { grid: (3 * order + 2).max(pde::DEFAULT_GRID), ..pde_cfg(sigma, order, 200.0) };
    let a = InitSpec::Stationary(1.0).to_field(sigma, order).map_err(err)?;
    let b = InitSpec::Stationary(-1.0).to_field(sigma, order).map_err(err)?;
    let seeds: Vec<u64> = (0..20).collect();
    let window = (50.0, 200.0);

    let q = CovarianceSpec::power_law(order, 1.0, 0.9).map_err(err)?;
    let noisy = spde::ergodicity_experiment(&a, &b, &SpdeConfig::new(pcfg.clone(), q, 0), &seeds, window, 1)
        .map_err(err)?;
    let quiet = spde::ergodicity_experiment(&a, &b, &SpdeConfig::new(pcfg, CovarianceSpec::zero(order), 0), &seeds, window, 1)
        .map_err(err)?;
    // the Brownian mass mode dominates the seed spread; the paired gap is shown alongside
    let paired = noisy.m2_a.iter().zip(&noisy.m2_b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let summary = format!(
        "noise: {:.4} vs {:.4} (SE {:.4}, max paired gap {paired:.1e}); no noise: {:.4} vs {:.4}",
        noisy.mean_a, noisy.mean_b, noisy.standard_error, quiet.mean_a, quiet.mean_b
    );
    ensure(noisy.agree, format!("noisy runs disagree: {summary}"))?;
    ensure(!quiet.agree, format!("noiseless runs agree: {summary}"))?;
    Ok(summary)
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sigma_c reproduction", criterion_1),
        ("phase transition", criterion_2),
        ("identity suite", criterion_3),
        ("Laplace asymptotics", criterion_4),
        ("PDE solver", criterion_5),
        ("SPDE solver", criterion_6),
        ("control experiment", criterion_7),
        ("particles", criterion_8),
        ("ergodicity probe", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (outcome, dt) = timed(check);
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name} [{dt:.1?}] {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL {name} [{dt:.1?}] {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
