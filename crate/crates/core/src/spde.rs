//! Additive-noise stochastic equation
//!
//! ```text
//! du = [sigma u'' + d/dx((V' + F' * u) u)] dt + dW,   Q e_k = lambda_k^2 e_k
//! ```
//!
//! The stochastic convolution `W_A` is advanced exactly in distribution, one
//! Ornstein-Uhlenbeck process per mode, and the same increment is added to
//! `u`. Also hosts the constructive control of the irreducibility argument
//! and a same-noise ergodicity probe.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::fourier::SpectralField;
use crate::pde::{self, phi1, Integrator, PdeConfig};

pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_C: f64 = 1.0;

/// Diagonal covariance `Q e_k = lambda_k^2 e_k`, `|k| <= K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceSpec {
    pub order: usize,
    /// `lambda_k^2` ordered `k = -K, ..., K`.
    pub lambda_sq: Vec<f64>,
    pub gamma: f64,
    pub c: f64,
    pub strong_feller: bool,
}

impl CovarianceSpec {
    /// `lambda_k^2 = c (1 + k^2)^{-gamma}`; trace-class needs `gamma > 1/2`.
    pub fn power_law(order: usize, c: f64, gamma: f64) -> Result<Self> {
        require_positive("c", c)?;
        if !(gamma > 0.5 && gamma.is_finite()) {
            return Err(Error::config(format!("trace-class noise needs gamma > 1/2, got {gamma}")));
        }
        let lambda_sq = (-(order as i64)..=order as i64)
            .map(|k| c * (1.0 + (k * k) as f64).powf(-gamma))
            .collect();
        Ok(CovarianceSpec { order, lambda_sq, gamma, c, strong_feller: false })
    }

    /// Marks the covariance as satisfying the Strong-Feller lower bound,
    /// which requires `gamma < 1`.
    pub fn with_strong_feller(mut self) -> Result<Self> {
        if !(self.gamma < 1.0) {
            return Err(Error::config(format!(
                "the Strong-Feller lower bound needs gamma < 1, got {}",
                self.gamma
            )));
        }
        self.strong_feller = true;
        Ok(self)
    }

    /// No noise at all.
    pub fn zero(order: usize) -> Self {
        CovarianceSpec {
            order,
            lambda_sq: vec![0.0; 2 * order + 1],
            gamma: f64::INFINITY,
            c: 0.0,
            strong_feller: false,
        }
    }

    pub fn lambda_sq(&self, k: i64) -> f64 {
        if k.unsigned_abs() as usize > self.order {
            0.0
        } else {
            self.lambda_sq[(k + self.order as i64) as usize]
        }
    }

    pub fn lambda(&self, k: i64) -> f64 {
        self.lambda_sq(k).sqrt()
    }

    /// `sum_k lambda_k^2` over the truncation.
    pub fn trace(&self) -> f64 {
        self.lambda_sq.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.lambda_sq.iter().all(|&l| l == 0.0)
    }
}

/// Seeded source of standard Gaussian increments.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        NoiseStream { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.gaussian();
        }
    }
}

/// Decay and increment standard deviation of one OU mode over `dt`, for
/// `dw = -rate w dt + lambda dbeta`.
pub fn ou_coefficients(rate: f64, lambda: f64, dt: f64) -> (f64, f64) {
    let decay = (-rate * dt).exp();
    let var = if rate == 0.0 {
        lambda * lambda * dt
    } else {
        // (1 - e^{-2 rate dt}) / (2 rate), stable for small rate dt
        lambda * lambda * (-(-2.0 * rate * dt).exp_m1()) / (2.0 * rate)
    };
    (decay, var.sqrt())
}

/// Exact OU update of the mode `k` of `W_A` with `A = d^2/dx^2`.
pub fn ou_update(wa_k: f64, k: i64, lambda_k: f64, dt: f64, noise: &mut NoiseStream) -> f64 {
    let (decay, std) = ou_coefficients((k * k) as f64, lambda_k, dt);
    decay * wa_k + std * noise.gaussian()
}

/// Variance of `W_A` mode `k` at time `t` from zero, diffusion `sigma`.
pub fn ou_variance(k: i64, lambda_sq: f64, sigma: f64, t: f64) -> f64 {
    let rate = sigma * (k * k) as f64;
    if rate == 0.0 {
        lambda_sq * t
    } else {
        lambda_sq * (-(-2.0 * rate * t).exp_m1()) / (2.0 * rate)
    }
}

#[derive(Debug, Clone)]
pub struct SpdeConfig {
    pub pde: PdeConfig,
    pub q: CovarianceSpec,
    pub seed: u64,
    /// Cutoff radius of the truncated nonlinearity, if any.
    pub truncation: Option<f64>,
}

impl SpdeConfig {
    pub fn new(pde: PdeConfig, q: CovarianceSpec, seed: u64) -> Self {
        SpdeConfig { pde, q, seed, truncation: None }
    }

    pub fn validate(&self) -> Result<()> {
        self.pde.validate()?;
        if self.q.order != self.pde.order {
            return Err(Error::config(format!(
                "covariance order {} differs from truncation order {}",
                self.q.order, self.pde.order
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpdeState {
    pub u: SpectralField,
    /// Stochastic convolution `W_A(t)`.
    pub wa: SpectralField,
    pub t: f64,
}

impl SpdeState {
    pub fn new(u: SpectralField) -> Self {
        let wa = SpectralField::zeros(u.order());
        SpdeState { u, wa, t: 0.0 }
    }
}

/// Exponential Euler stepper for the stochastic equation.
pub struct SpdeSolver {
    integ: Integrator,
    noise: NoiseStream,
    decay: Vec<f64>,
    std: Vec<f64>,
    eta: Vec<f64>,
    noisy: bool,
}

impl SpdeSolver {
    pub fn new(cfg: &SpdeConfig) -> Result<Self> {
        cfg.validate()?;
        let mut integ = Integrator::new(&cfg.pde)?;
        if let Some(r) = cfg.truncation {
            integ = integ.with_truncation(r)?;
        }
        let order = cfg.pde.order as i64;
        let (decay, std): (Vec<f64>, Vec<f64>) = (-order..=order)
            .map(|k| ou_coefficients(cfg.pde.sigma * (k * k) as f64, cfg.q.lambda(k), cfg.pde.dt))
            .unzip();
        Ok(SpdeSolver {
            integ,
            noise: NoiseStream::new(cfg.seed),
            eta: vec![0.0; decay.len()],
            noisy: !cfg.q.is_zero(),
            decay,
            std,
        })
    }

    pub fn dt(&self) -> f64 {
        self.integ.dt()
    }

    pub fn integrator(&mut self) -> &mut Integrator {
        &mut self.integ
    }

    /// Draws the step's increments and advances `W_A` with them.
    fn draw(&mut self, wa: &SpectralField) -> SpectralField {
        let mut next = wa.clone();
        if self.noisy {
            self.noise.fill(&mut self.eta);
            for (((w, &d), &s), e) in next.coeffs_mut().iter_mut().zip(&self.decay).zip(&self.std).zip(&mut self.eta) {
                *e *= s;
                *w = d * *w + *e;
            }
        } else {
            for (w, &d) in next.coeffs_mut().iter_mut().zip(&self.decay) {
                *w *= d;
            }
        }
        next
    }

    /// `u <- E u + phi_1 dt N(u) + eta`, `W_A <- E W_A + eta`.
    pub fn step(&mut self, state: &SpdeState) -> Result<SpdeState> {
        let t = state.t + self.integ.dt();
        let mut u = self.integ.advance(&state.u, None).map_err(|e| e.at_time(t))?;
        let wa = self.draw(&state.wa);
        if self.noisy {
            for (c, e) in u.coeffs_mut().iter_mut().zip(&self.eta) {
                *c += e;
            }
        }
        pde::check_finite(&u, t)?;
        Ok(SpdeState { u, wa, t })
    }

    /// Same noise, but advances `v = u - W_A` through the random equation
    /// `dv = [sigma v'' + N(v + W_A)] dt`, returning `v + W_A`.
    pub fn step_decomposed(&mut self, v: &SpectralField, state_wa: &SpectralField, t: f64) -> Result<(SpectralField, SpectralField)> {
        let v_next = self.integ.advance(v, Some(state_wa)).map_err(|e| e.at_time(t + self.integ.dt()))?;
        let wa = self.draw(state_wa);
        pde::check_finite(&v_next, t + self.integ.dt())?;
        Ok((v_next, wa))
    }
}

/// `(F' * u) u xi_R(||u||^2)` together with the untruncated `V'` part,
/// differentiated: the transport term of the truncated equation.
pub fn truncated_nonlinearity(u: &SpectralField, r: f64, cfg: &PdeConfig) -> Result<SpectralField> {
    let cfg = PdeConfig { order: u.order(), ..cfg.clone() }.with_order(u.order());
    Integrator::new(&cfg)?.with_truncation(r)?.transport(u)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpdeSample {
    pub t: f64,
    pub m1: f64,
    pub m2: f64,
    pub l2_norm: f64,
    pub mass_mode: f64,
}

impl SpdeSample {
    fn of(u: &SpectralField, t: f64) -> Self {
        SpdeSample { t, m1: u.cos_moment(), m2: u.sin_moment(), l2_norm: u.l2_norm(), mass_mode: u.mass() }
    }
}

#[derive(Debug, Clone)]
pub struct SpdeTrajectory {
    pub samples: Vec<SpdeSample>,
    pub final_state: SpdeState,
}

impl SpdeTrajectory {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,m1,m2,l2_norm,mass_mode")?;
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", s.t, s.m1, s.m2, s.l2_norm, s.mass_mode)?;
        }
        Ok(())
    }
}

/// Runs the direct scheme from `u0` to `cfg.pde.t_final`.
pub fn evolve(u0: &SpectralField, cfg: &SpdeConfig) -> Result<SpdeTrajectory> {
    let mut solver = SpdeSolver::new(cfg)?;
    let steps = cfg.pde.steps()?;
    let stride = ((cfg.pde.sample_interval / cfg.pde.dt).round() as usize).max(1);
    let mut state = SpdeState::new(u0.with_order(cfg.pde.order));
    let mut samples = vec![SpdeSample::of(&state.u, 0.0)];
    for n in 1..=steps {
        state = solver.step(&state)?;
        state.t = n as f64 * cfg.pde.dt;
        if n % stride == 0 || n == steps {
            samples.push(SpdeSample::of(&state.u, state.t));
        }
    }
    Ok(SpdeTrajectory { samples, final_state: state })
}

/// Runs the direct scheme and the `v + W_A` scheme with identical noise and
/// returns the two terminal fields `(u, v + W_A)`.
pub fn decomposition_check(u0: &SpectralField, cfg: &SpdeConfig) -> Result<(SpectralField, SpectralField)> {
    let steps = cfg.pde.steps()?;
    let u0 = u0.with_order(cfg.pde.order);

    let mut direct = SpdeSolver::new(cfg)?;
    let mut state = SpdeState::new(u0.clone());
    for _ in 0..steps {
        state = direct.step(&state)?;
    }

    let mut split = SpdeSolver::new(cfg)?;
    let mut v = u0;
    let mut wa = SpectralField::zeros(cfg.pde.order);
    for n in 0..steps {
        let (vn, wn) = split.step_decomposed(&v, &wa, n as f64 * cfg.pde.dt)?;
        v = vn;
        wa = wn;
    }
    Ok((state.u, &v + &wa))
}

/// `f(t) = Q^{-1/2} beta(t)` along the straight path from `y0` to `y1`,
/// stored as `f(t) = f0 + f1 t + f2 t^2`.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    pub t_final: f64,
    pub coeffs: [SpectralField; 3],
    /// `Q^{1/2} f` in the same form, i.e. `beta`.
    pub forcing: [SpectralField; 3],
    pub y0: SpectralField,
    pub y1: SpectralField,
}

impl ControlSignal {
    fn poly(c: &[SpectralField; 3], t: f64) -> SpectralField {
        let mut out = c[0].clone();
        out.axpy(t, &c[1]);
        out.axpy(t * t, &c[2]);
        out
    }

    pub fn f(&self, t: f64) -> SpectralField {
        Self::poly(&self.coeffs, t)
    }

    /// `Q^{1/2} f(t)`.
    pub fn forcing_at(&self, t: f64) -> SpectralField {
        Self::poly(&self.forcing, t)
    }

    /// The path `alpha(t) = y0 + (t / T)(y1 - y0)`.
    pub fn path(&self, t: f64) -> SpectralField {
        let mut out = self.y0.clone();
        out.axpy(t / self.t_final, &(&self.y1 - &self.y0));
        out
    }
}

/// Builds the control steering `y0` to `y1` in time `t_final`.
pub fn build_control(
    y0: &SpectralField,
    y1: &SpectralField,
    t_final: f64,
    q: &CovarianceSpec,
    cfg: &PdeConfig,
) -> Result<ControlSignal> {
    require_positive("T", t_final)?;
    let order = cfg.order;
    if y0.order() > order || y1.order() > order {
        return Err(Error::config("control endpoints exceed the truncation order"));
    }
    if q.order != order {
        return Err(Error::config("covariance order differs from truncation order"));
    }
    let y0 = y0.with_order(order);
    let y1 = y1.with_order(order);
    let mut integ = Integrator::new(cfg)?;
    let d = &y1 - &y0;

    // N(alpha(s)) is exactly quadratic in s = t / T
    let at = |s: f64| {
        let mut a = y0.clone();
        a.axpy(s, &d);
        a
    };
    let n0 = integ.transport(&y0)?;
    let nh = integ.transport(&at(0.5))?;
    let n1 = integ.transport(&y1)?;

    let mut beta = [SpectralField::zeros(order), SpectralField::zeros(order), SpectralField::zeros(order)];
    for k in -(order as i64)..=order as i64 {
        let lap = cfg.sigma * (k * k) as f64;
        let (a0, a1, a2) = (n0.get(k), nh.get(k), n1.get(k));
        let q0 = a0;
        let q1 = -3.0 * a0 + 4.0 * a1 - a2;
        let q2 = 2.0 * a0 - 4.0 * a1 + 2.0 * a2;
        // beta = d/T + sigma k^2 alpha - N(alpha), in powers of s
        let b0 = d.get(k) / t_final + lap * y0.get(k) - q0;
        let b1 = lap * d.get(k) - q1;
        let b2 = -q2;
        beta[0].set(k, b0);
        beta[1].set(k, b1 / t_final);
        beta[2].set(k, b2 / (t_final * t_final));
    }

    let mut coeffs = beta.clone();
    for k in -(order as i64)..=order as i64 {
        let lambda = q.lambda(k);
        for (c, b) in coeffs.iter_mut().zip(&beta) {
            let bk = b.get(k);
            if bk == 0.0 {
                continue;
            }
            if lambda == 0.0 {
                return Err(Error::Uncontrollable { mode: k });
            }
            c.set(k, bk / lambda);
        }
    }
    let mut forcing = coeffs.clone();
    for k in -(order as i64)..=order as i64 {
        let lambda = q.lambda(k);
        for f in forcing.iter_mut() {
            f.set(k, lambda * f.get(k));
        }
    }
    Ok(ControlSignal { t_final, coeffs, forcing, y0, y1 })
}

/// `phi_2(z) = (e^z - 1 - z) / z^2`.
fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Integrates `du = [sigma u'' + N(u) + Q^{1/2} f] dt` from `control.y0` to
/// `control.t_final` with a second-order exponential Runge-Kutta scheme.
pub fn run_controlled(control: &ControlSignal, cfg: &PdeConfig) -> Result<SpectralField> {
    let mut integ = Integrator::new(cfg)?;
    let steps = pde::steps_for(control.t_final, cfg.dt)?;
    let order = cfg.order as i64;
    let dt = cfg.dt;
    let (decay, w1, w2): (Vec<f64>, Vec<f64>, Vec<f64>) = {
        let mut e = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for k in -order..=order {
            let z = -cfg.sigma * dt * (k * k) as f64;
            e.push(z.exp());
            a.push(phi1(z) * dt);
            b.push(phi2(z) * dt);
        }
        (e, a, b)
    };
    let mut u = control.y0.clone();
    for n in 0..steps {
        let t = n as f64 * dt;
        let mut g0 = integ.transport(&u)?;
        g0.axpy(1.0, &control.forcing_at(t));
        let mut a = SpectralField::zeros(cfg.order);
        for (i, c) in a.coeffs_mut().iter_mut().enumerate() {
            *c = decay[i] * u.coeffs()[i] + w1[i] * g0.coeffs()[i];
        }
        let mut g1 = integ.transport(&a)?;
        g1.axpy(1.0, &control.forcing_at(t + dt));
        for (i, c) in a.coeffs_mut().iter_mut().enumerate() {
            *c += w2[i] * (g1.coeffs()[i] - g0.coeffs()[i]);
        }
        pde::check_finite(&a, t + dt)?;
        u = a;
    }
    Ok(u)
}

/// `f_A(t) = int_0^t e^{(t-s) sigma A} Q^{1/2} f(s) ds`, mode by mode in
/// closed form.
pub fn f_a(control: &ControlSignal, sigma: f64, t: f64) -> SpectralField {
    let order = control.forcing[0].order() as i64;
    let mut out = SpectralField::zeros(order as usize);
    for k in -order..=order {
        let kappa = sigma * (k * k) as f64;
        let moments = exp_poly_moments(kappa, t);
        let v: f64 = (0..3).map(|j| control.forcing[j].get(k) * moments[j]).sum();
        out.set(k, v);
    }
    out
}

/// `int_0^t e^{-kappa (t - s)} s^n ds` for `n = 0, 1, 2`.
pub fn exp_poly_moments(kappa: f64, t: f64) -> [f64; 3] {
    let x = kappa * t;
    if x < 1.0 {
        // sum_j (-kappa)^j t^{n+j+1} n! / (n+j+1)!
        let mut out = [0.0; 3];
        for (n, o) in out.iter_mut().enumerate() {
            let nf = n as f64;
            let mut term = t.powi(n as i32 + 1) / (nf + 1.0);
            let mut sum = term;
            let mut j = 1.0;
            while term.abs() > 1e-18 * sum.abs() {
                term *= -kappa * t / (nf + 1.0 + j);
                sum += term;
                j += 1.0;
            }
            *o = sum;
        }
        out
    } else {
        let i0 = -(-x).exp_m1() / kappa;
        let i1 = t / kappa - i0 / kappa;
        let i2 = t * t / kappa - 2.0 * i1 / kappa;
        [i0, i1, i2]
    }
}

/// Same-noise runs from several initial data.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityReport {
    pub seed: u64,
    pub times: Vec<f64>,
    /// `distances[p][i]`: L2 distance of pair `p` at `times[i]`; pairs are
    /// `(0, 1), (0, 2), ..., (1, 2), ...`.
    pub distances: Vec<Vec<f64>>,
    /// Time averages over the window of `m1`, `m2`, `||u||^2` per initial datum.
    pub m1_avg: Vec<f64>,
    pub m2_avg: Vec<f64>,
    pub l2sq_avg: Vec<f64>,
}

/// Runs every initial datum under the noise of `cfg.seed` and averages the
/// observables over `window`.
pub fn ergodicity_probe(inits: &[SpectralField], cfg: &SpdeConfig, window: (f64, f64)) -> Result<ErgodicityReport> {
    if inits.len() < 2 {
        return Err(Error::config("the ergodicity probe needs at least two initial data"));
    }
    let (w0, w1) = window;
    if !(0.0 <= w0 && w0 < w1 && w1 <= cfg.pde.t_final) {
        return Err(Error::config(format!("averaging window [{w0}, {w1}] must lie inside [0, T]")));
    }
    let steps = cfg.pde.steps()?;
    let stride = ((cfg.pde.sample_interval / cfg.pde.dt).round() as usize).max(1);
    let mut solvers = inits.iter().map(|_| SpdeSolver::new(cfg)).collect::<Result<Vec<_>>>()?;
    let mut states: Vec<SpdeState> = inits.iter().map(|u| SpdeState::new(u.with_order(cfg.pde.order))).collect();
    let n = inits.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut report = ErgodicityReport {
        seed: cfg.seed,
        times: Vec::new(),
        distances: vec![Vec::new(); pairs.len()],
        m1_avg: vec![0.0; n],
        m2_avg: vec![0.0; n],
        l2sq_avg: vec![0.0; n],
    };
    let record = |states: &[SpdeState], t: f64, report: &mut ErgodicityReport| {
        report.times.push(t);
        for (p, &(i, j)) in pairs.iter().enumerate() {
            report.distances[p].push(states[i].u.l2_distance(&states[j].u));
        }
    };
    record(&states, 0.0, &mut report);
    let mut count = 0usize;
    for step in 1..=steps {
        let t = step as f64 * cfg.pde.dt;
        for (s, solver) in states.iter_mut().zip(solvers.iter_mut()) {
            *s = solver.step(s)?;
            s.t = t;
        }
        if t >= w0 - 1e-12 && t <= w1 + 1e-12 {
            count += 1;
            for (i, s) in states.iter().enumerate() {
                report.m1_avg[i] += s.u.cos_moment();
                report.m2_avg[i] += s.u.sin_moment();
                report.l2sq_avg[i] += s.u.l2_norm_sq();
            }
        }
        if step % stride == 0 || step == steps {
            record(&states, t, &mut report);
        }
    }
    let c = count.max(1) as f64;
    for v in report.m1_avg.iter_mut().chain(&mut report.m2_avg).chain(&mut report.l2sq_avg) {
        *v /= c;
    }
    Ok(report)
}

/// Agreement statistic over seeds for two initial data.
#[derive(Debug, Clone, Serialize)]
pub struct ErgodicityStats {
    pub seeds: Vec<u64>,
    /// Per-seed time average of `m2` from each initial datum.
    pub m2_a: Vec<f64>,
    pub m2_b: Vec<f64>,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Standard error of `mean_a - mean_b` from the seed-to-seed spread.
    pub standard_error: f64,
    /// `|mean_a - mean_b| <= 3 SE`; a vanishing spread with distinct means
    /// counts as disagreement.
    pub agree: bool,
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Repeats [`ergodicity_probe`] for each seed, running seeds on
/// `threads` worker threads. Without noise the runs do not depend on the
/// seed, so a single run is shared by all seeds.
pub fn ergodicity_experiment(
    a: &SpectralField,
    b: &SpectralField,
    cfg: &SpdeConfig,
    seeds: &[u64],
    window: (f64, f64),
    threads: usize,
) -> Result<ErgodicityStats> {
    if seeds.len() < 2 {
        return Err(Error::config("at least two seeds are needed for a standard error"));
    }
    let inits = [a.clone(), b.clone()];
    let run = |seed: u64| {
        let cfg = SpdeConfig { seed, ..cfg.clone() };
        ergodicity_probe(&inits, &cfg, window).map(|r| (r.m2_avg[0], r.m2_avg[1]))
    };
    let pairs: Vec<(f64, f64)> = if cfg.q.is_zero() {
        let p = run(seeds[0])?;
        vec![p; seeds.len()]
    } else {
        let threads = threads.clamp(1, seeds.len());
        let chunk = seeds.len().div_ceil(threads);
        let results: Vec<Result<(f64, f64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .chunks(chunk)
                .map(|part| {
                    let run = &run;
                    scope.spawn(move || part.iter().map(|&s| run(s)).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("ergodicity worker panicked")).collect()
        });
        results.into_iter().collect::<Result<Vec<_>>>()?
    };
    let (m2_a, m2_b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (mean_a, se_a) = mean_and_se(&m2_a);
    let (mean_b, se_b) = mean_and_se(&m2_b);
    let se = se_a.hypot(se_b);
    let diff = (mean_a - mean_b).abs();
    Ok(ErgodicityStats {
        seeds: seeds.to_vec(),
        m2_a,
        m2_b,
        mean_a,
        mean_b,
        standard_error: se,
        agree: diff <= 3.0 * se && (se > 0.0 || diff == 0.0),
    })
}
