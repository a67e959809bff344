//! Euler-Maruyama simulation of
//!
//! ```text
//! dX^i = [-V'(X^i) + (1/N) sum_j F'(X^j - X^i)] dt + sqrt(2 sigma) dbeta^i
//! ```
//!
//! on the torus. For trigonometric `F` the mean-field sum reduces to the
//! empirical Fourier moments of the ensemble, so a step costs `O(N deg F)`.
//! Every particle owns its own random stream, which makes the dynamics
//! equivariant under relabeling.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::fourier::{GridFunction, SpectralField};
use crate::pde::{self, InitSpec, PdeConfig};
use crate::stationary;

/// `c + sum_n a_n cos(n x) + b_n sin(n x)`, `n = 1..=degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    /// Extracts plain amplitudes from a field, dropping trailing zero modes.
    pub fn from_field(f: &SpectralField) -> Self {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut cos: Vec<f64> = (1..=f.order() as i64).map(|k| f.get(-k) / sqrt_pi).collect();
        let mut sin: Vec<f64> = (1..=f.order() as i64).map(|k| f.get(k) / sqrt_pi).collect();
        let degree = (0..cos.len()).rev().find(|&i| cos[i] != 0.0 || sin[i] != 0.0).map_or(0, |i| i + 1);
        cos.truncate(degree);
        sin.truncate(degree);
        TrigPoly { cos, sin }
    }

    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    /// `(a_n, b_n)` for `n = index + 1`; missing entries are zero.
    #[inline]
    fn amplitudes(&self, index: usize) -> (f64, f64) {
        (self.cos.get(index).copied().unwrap_or(0.0), self.sin.get(index).copied().unwrap_or(0.0))
    }

    /// Derivative at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let (s1, c1) = x.sin_cos();
        self.derivative_from(s1, c1)
    }

    /// Derivative given `sin x` and `cos x`.
    #[inline]
    fn derivative_from(&self, s1: f64, c1: f64) -> f64 {
        let (mut s, mut c) = (s1, c1);
        let mut acc = 0.0;
        for n in 0..self.degree() {
            if n > 0 {
                let sn = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = sn;
            }
            let (a, b) = self.amplitudes(n);
            acc += (n + 1) as f64 * (b * c - a * s);
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct ParticleConfig {
    pub sigma: f64,
    pub v: TrigPoly,
    pub f: TrigPoly,
    pub dt: f64,
}

impl ParticleConfig {
    /// `V = cos 2x`, `F = -cos x`, `dt = 1e-3`.
    pub fn new(sigma: f64) -> Self {
        ParticleConfig {
            sigma,
            v: TrigPoly::from_field(&pde::default_v(2)),
            f: TrigPoly::from_field(&pde::default_f(1)),
            dt: pde::DEFAULT_DT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::config(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        require_positive("dt", self.dt)
    }
}

/// Empirical means of `cos x` and `sin x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalMoments {
    pub m1: f64,
    pub m2: f64,
}

pub struct ParticleEnsemble {
    positions: Vec<f64>,
    /// Cached `(sin X_i, cos X_i)`.
    trig: Vec<(f64, f64)>,
    rngs: Vec<Pcg64>,
    drift: Vec<f64>,
    pub t: f64,
    pub seed: u64,
}

// 32 bytes of state per particle keeps 1e5 streams cache resident
fn stream(seed: u64, i: usize) -> Pcg64 {
    let state = rand_pcg::Pcg64Mcg::seed_from_u64(seed).gen::<u128>();
    Pcg64::new(state, i as u128)
}

fn reduce(x: f64) -> f64 {
    if (0.0..TAU).contains(&x) {
        return x;
    }
    if (-TAU..0.0).contains(&x) && x + TAU < TAU {
        return x + TAU;
    }
    if (TAU..2.0 * TAU).contains(&x) {
        return x - TAU;
    }
    let y = x.rem_euclid(TAU);
    if y >= TAU {
        0.0
    } else {
        y
    }
}

impl ParticleEnsemble {
    /// Positions as given, reduced modulo `2 pi`; particle `i` uses stream `i`.
    pub fn from_positions(positions: Vec<f64>, seed: u64) -> Result<Self> {
        Self::with_streams(positions, seed, None)
    }

    /// Like [`ParticleEnsemble::from_positions`] with an explicit stream id
    /// per particle.
    pub fn with_streams(positions: Vec<f64>, seed: u64, streams: Option<&[usize]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::config("an ensemble needs at least one particle"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("particle positions must be finite"));
        }
        let n = positions.len();
        let rngs = match streams {
            Some(ids) if ids.len() == n => ids.iter().map(|&i| stream(seed, i)).collect(),
            Some(_) => return Err(Error::config("one stream id per particle is required")),
            None => (0..n).map(|i| stream(seed, i)).collect(),
        };
        let positions: Vec<f64> = positions.into_iter().map(reduce).collect();
        let trig = positions.iter().map(|x| x.sin_cos()).collect();
        Ok(ParticleEnsemble { positions, trig, rngs, drift: vec![0.0; n], t: 0.0, seed })
    }

    /// Draws `n` initial positions from `init`, each from its own stream.
    pub fn sample(init: &InitSpec, n: usize, sigma: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("an ensemble needs at least one particle"));
        }
        let mut rngs: Vec<Pcg64> = (0..n).map(|i| stream(seed, i)).collect();
        let positions: Vec<f64> = match init {
            InitSpec::Uniform => rngs.iter_mut().map(|r| r.gen::<f64>() * TAU).collect(),
            InitSpec::Bump(x0) => {
                let kappa = pde::BUMP_CONCENTRATION;
                let density = |x: f64| (kappa * ((x - x0).cos() - 1.0)).exp();
                rngs.iter_mut().map(|r| rejection(r, &density, 1.0)).collect()
            }
            InitSpec::Stationary(sign) => {
                let m = pde::nontrivial_state(sigma, *sign)?;
                let d = stationary::density(sigma, m, 8)?;
                let bound = bound_of(|x| d.eval(x));
                rngs.iter_mut().map(|r| rejection(r, &|x| d.eval(x), bound)).collect()
            }
            InitSpec::File(_) => {
                let g = init.to_grid(sigma, 4096)?;
                let density = |x: f64| interpolate(&g, x);
                let bound = g.values().iter().cloned().fold(0.0, f64::max);
                if !(bound > 0.0) {
                    return Err(Error::config("initial density is nowhere positive"));
                }
                rngs.iter_mut().map(|r| rejection(r, &density, bound)).collect()
            }
        };
        let positions: Vec<f64> = positions.into_iter().map(reduce).collect();
        let trig = positions.iter().map(|x| x.sin_cos()).collect();
        Ok(ParticleEnsemble { positions, trig, rngs, drift: vec![0.0; n], t: 0.0, seed })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn moments(&self) -> EmpiricalMoments {
        let n = self.len() as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for &(si, ci) in &self.trig {
            c += ci;
            s += si;
        }
        EmpiricalMoments { m1: c / n, m2: s / n }
    }

    /// `(1/N) sum_j (cos n X_j, sin n X_j)` for `n = 1..=degree`.
    fn fourier_moments(&self, degree: usize) -> Vec<(f64, f64)> {
        let mut acc = vec![(0.0, 0.0); degree];
        for &(s1, c1) in &self.trig {
            let (mut s, mut c) = (s1, c1);
            for (n, a) in acc.iter_mut().enumerate() {
                if n > 0 {
                    let sn = s * c1 + c * s1;
                    c = c * c1 - s * s1;
                    s = sn;
                }
                a.0 += c;
                a.1 += s;
            }
        }
        let inv = 1.0 / self.len() as f64;
        acc.into_iter().map(|(c, s)| (c * inv, s * inv)).collect()
    }

    fn compute_drift(&mut self, v: &TrigPoly, f: &TrigPoly) {
        let moments = self.fourier_moments(f.degree());
        for (d, &(s1, c1)) in self.drift.iter_mut().zip(&self.trig) {
            let mut acc = -v.derivative_from(s1, c1);
            let (mut s, mut c) = (s1, c1);
            for (n, &(cm, sm)) in moments.iter().enumerate() {
                if n > 0 {
                    let sn = s * c1 + c * s1;
                    c = c * c1 - s * s1;
                    s = sn;
                }
                // mean of sin(n(X_j - x)) and cos(n(X_j - x))
                let mean_sin = sm * c - cm * s;
                let mean_cos = cm * c + sm * s;
                let (a, b) = f.amplitudes(n);
                acc += (n + 1) as f64 * (b * mean_cos - a * mean_sin);
            }
            *d = acc;
        }
    }

    /// Drift via the empirical Fourier moments.
    pub fn drift(&mut self, v: &TrigPoly, f: &TrigPoly) -> Vec<f64> {
        self.compute_drift(v, f);
        self.drift.clone()
    }

    /// Direct `O(N^2)` evaluation of the drift.
    pub fn drift_pairwise(&self, v: &TrigPoly, f: &TrigPoly) -> Vec<f64> {
        let n = self.len() as f64;
        self.positions
            .iter()
            .map(|&xi| {
                let sum: f64 = self.positions.iter().map(|&xj| f.derivative(xj - xi)).sum();
                -v.derivative(xi) + sum / n
            })
            .collect()
    }

    /// One Euler-Maruyama step.
    pub fn em_step(&mut self, cfg: &ParticleConfig) {
        self.compute_drift(&cfg.v, &cfg.f);
        let amp = (2.0 * cfg.sigma * cfg.dt).sqrt();
        for (d, rng) in self.drift.iter_mut().zip(self.rngs.iter_mut()) {
            let xi: f64 = rng.sample(StandardNormal);
            *d = *d * cfg.dt + amp * xi;
        }
        for ((x, tr), &dx) in self.positions.iter_mut().zip(self.trig.iter_mut()).zip(&self.drift) {
            *x = reduce(*x + dx);
            *tr = x.sin_cos();
        }
        self.t += cfg.dt;
    }

    /// Normalized histogram density on `bins` equal cells of `[0, 2 pi)`.
    pub fn histogram(&self, bins: usize) -> Vec<f64> {
        let mut h = vec![0.0; bins.max(1)];
        let width = TAU / h.len() as f64;
        for &x in &self.positions {
            let b = ((x / width) as usize).min(h.len() - 1);
            h[b] += 1.0;
        }
        let scale = 1.0 / (self.len() as f64 * width);
        h.iter_mut().for_each(|v| *v *= scale);
        h
    }
}

fn bound_of(f: impl Fn(f64) -> f64) -> f64 {
    let m = 4096;
    let max = (0..m).map(|j| f(TAU * j as f64 / m as f64)).fold(0.0, f64::max);
    1.05 * max
}

fn rejection(rng: &mut Pcg64, density: &dyn Fn(f64) -> f64, bound: f64) -> f64 {
    loop {
        let x = rng.gen::<f64>() * TAU;
        if rng.gen::<f64>() * bound <= density(x) {
            return x;
        }
    }
}

fn interpolate(g: &GridFunction, x: f64) -> f64 {
    let m = g.len();
    let h = g.spacing();
    let u = reduce(x) / h;
    let j = (u.floor() as usize).min(m - 1);
    let w = u - j as f64;
    let v = g.values();
    ((1.0 - w) * v[j] + w * v[(j + 1) % m]).max(0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ParticleSample {
    pub t: f64,
    pub m1_emp: f64,
    pub m2_emp: f64,
}

/// Runs `steps` steps, recording moments every `stride` steps.
pub fn simulate(ens: &mut ParticleEnsemble, cfg: &ParticleConfig, t_final: f64, stride: usize) -> Result<Vec<ParticleSample>> {
    cfg.validate()?;
    let steps = pde::steps_for(t_final, cfg.dt)?;
    let stride = stride.max(1);
    let record = |e: &ParticleEnsemble| {
        let m = e.moments();
        ParticleSample { t: e.t, m1_emp: m.m1, m2_emp: m.m2 }
    };
    let mut out = vec![record(ens)];
    for n in 1..=steps {
        ens.em_step(cfg);
        if n % stride == 0 || n == steps {
            ens.t = n as f64 * cfg.dt;
            out.push(record(ens));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosRow {
    pub n: usize,
    /// `|m_emp(T) - m_PDE(T)|` per replicate.
    pub errors: Vec<f64>,
    /// Root mean square of `errors`.
    pub rms_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    pub sigma: f64,
    pub t_final: f64,
    pub pde_m1: f64,
    pub pde_m2: f64,
    pub rows: Vec<ChaosRow>,
    /// Least-squares slope of `log rms_error` against `log N`.
    pub exponent: f64,
}

/// Compares empirical moments at `t_final` with the PDE for each ensemble
/// size, over `replicates` independent seeds run on `threads` threads.
pub fn chaos_compare(
    n_list: &[usize],
    cfg: &ParticleConfig,
    init: &InitSpec,
    t_final: f64,
    replicates: usize,
    seed: u64,
    threads: usize,
) -> Result<ChaosReport> {
    cfg.validate()?;
    if n_list.is_empty() || replicates == 0 {
        return Err(Error::config("chaos comparison needs at least one N and one replicate"));
    }
    let mut pcfg = PdeConfig::new(cfg.sigma.max(f64::MIN_POSITIVE));
    pcfg.t_final = t_final;
    pcfg.dt = cfg.dt;
    pcfg.sample_interval = t_final.max(cfg.dt);
    let rho0 = init.to_field(cfg.sigma, pcfg.order)?;
    let traj = pde::evolve(&rho0, &pcfg)?;
    let (pm1, pm2) = (traj.final_state.rho.cos_moment(), traj.final_state.rho.sin_moment());

    let mut rows = Vec::new();
    for &n in n_list {
        let jobs: Vec<u64> = (0..replicates as u64).map(|r| seed.wrapping_add(r.wrapping_mul(0x9E37_79B9_7F4A_7C15))).collect();
        let threads = threads.clamp(1, jobs.len());
        let chunk = jobs.len().div_ceil(threads);
        let results: Vec<Result<f64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = jobs
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&s| {
                                let mut ens = ParticleEnsemble::sample(init, n, cfg.sigma, s)?;
                                simulate(&mut ens, cfg, t_final, usize::MAX)?;
                                let m = ens.moments();
                                Ok((m.m1 - pm1).hypot(m.m2 - pm2))
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("particle worker panicked")).collect()
        });
        let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
        let rms = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
        log::info!("N = {n}: rms moment error {rms:.3e}");
        rows.push(ChaosRow { n, errors, rms_error: rms });
    }
    let exponent = if rows.len() >= 2 { fit_slope(&rows) } else { f64::NAN };
    Ok(ChaosReport { sigma: cfg.sigma, t_final, pde_m1: pm1, pde_m2: pm2, rows, exponent })
}

fn fit_slope(rows: &[ChaosRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.rms_error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
