//! Spectral integrator for
//!
//! ```text
//! d/dt rho = sigma rho'' + d/dx[(V' + F' * rho) rho]
//! ```
//!
//! with an integrating-factor (exponential) Euler step. The transport term is
//! evaluated pseudo-spectrally on a grid of `M > 3K` nodes, so the quadratic
//! product is projected onto `|k| <= K` without aliasing.

use std::path::PathBuf;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::fourier::{self, FourierGrid, GridFunction, SpectralField};
use crate::stationary::{self, MomentPair};

pub const DEFAULT_ORDER: usize = 64;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_DT: f64 = 1e-3;
/// `||rho_{n+1} - rho_n|| / dt` below which a run counts as stationary.
pub const STATIONARITY_TOL: f64 = 1e-7;
/// Grid minimum below which the positivity monitor warns.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Concentration of the `bump:x0` initial datum.
pub const BUMP_CONCENTRATION: f64 = 10.0;

/// `V(x) = cos 2x`.
pub fn default_v(order: usize) -> SpectralField {
    SpectralField::from_trig(order, 0.0, &[0.0, 1.0], &[])
}

/// `F(x) = -cos x`.
pub fn default_f(order: usize) -> SpectralField {
    SpectralField::from_trig(order, 0.0, &[-1.0], &[])
}

#[derive(Debug, Clone)]
pub struct PdeConfig {
    pub sigma: f64,
    pub v: SpectralField,
    pub f: SpectralField,
    /// Truncation order `K`.
    pub order: usize,
    /// Product grid size `M`.
    pub grid: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Time between recorded samples; every step when zero.
    pub sample_interval: f64,
    /// Stop as soon as the increment test of [`STATIONARITY_TOL`] passes.
    pub stop_when_stationary: bool,
}

impl PdeConfig {
    pub fn new(sigma: f64) -> Self {
        PdeConfig {
            sigma,
            v: default_v(DEFAULT_ORDER),
            f: default_f(DEFAULT_ORDER),
            order: DEFAULT_ORDER,
            grid: DEFAULT_GRID,
            dt: DEFAULT_DT,
            t_final: 10.0,
            sample_interval: 0.1,
            stop_when_stationary: false,
        }
    }

    /// Same config with the truncation order changed; `M` grows if needed.
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self.grid = self.grid.max(3 * order + 2);
        self.grid += self.grid % 2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("sigma", self.sigma)?;
        require_positive("dt", self.dt)?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!("final time must be nonnegative, got {}", self.t_final)));
        }
        if !(self.sample_interval >= 0.0 && self.sample_interval.is_finite()) {
            return Err(Error::config("sample interval must be nonnegative"));
        }
        if self.order == 0 {
            return Err(Error::config("truncation order must be at least 1"));
        }
        if self.grid <= 3 * self.order || self.grid % 2 != 0 {
            return Err(Error::config(format!(
                "dealiased products need an even grid with M > 3K; got M = {}, K = {}",
                self.grid, self.order
            )));
        }
        if !self.v.is_finite() || !self.f.is_finite() {
            return Err(Error::config("potentials must have finite coefficients"));
        }
        Ok(())
    }

    /// Number of steps covering `[0, t_final]`; `t_final` must be a multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        steps_for(self.t_final, self.dt)
    }
}

pub(crate) fn steps_for(t: f64, dt: f64) -> Result<usize> {
    let n = (t / dt).round();
    if (n * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(Error::config(format!("final time {t} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// `phi_1(z) = (e^z - 1) / z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        z.exp_m1() / z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    pub rho: SpectralField,
    pub t: f64,
}

/// Smooth cutoff `xi_R`: 1 on `[0, R]`, 0 beyond `R + 1`, C^2 in between.
pub fn cutoff(r: f64, x: f64) -> f64 {
    let s = (x - r).clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Exponential Euler stepper with cached transforms and step weights.
pub struct Integrator {
    sigma: f64,
    order: usize,
    dt: f64,
    /// `V'`, padded to the truncation order.
    dv: SpectralField,
    /// `F'`, padded to the truncation order.
    df: SpectralField,
    /// Interaction cutoff radius for the truncated nonlinearity.
    truncation: Option<f64>,
    grid: FourierGrid,
    decay: Vec<f64>,
    weight: Vec<f64>,
    drift_values: Vec<f64>,
    rho_values: Vec<f64>,
    /// `max |V' + F' * rho|` from the latest transport evaluation.
    last_speed: f64,
}

/// Upper bound on substeps per step before a run counts as blown up.
pub const MAX_SUBSTEPS: usize = 10_000;

/// `(e^{-sigma h k^2}, h phi_1(-sigma h k^2))` for `k = -K..=K`.
fn step_weights(sigma: f64, h: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let tau = sigma * h;
    (-(order as i64)..=order as i64)
        .map(|k| {
            let k2 = (k * k) as f64;
            ((-tau * k2).exp(), phi1(-tau * k2) * h)
        })
        .unzip()
}

fn combine(decay: &[f64], weight: &[f64], u: &SpectralField, n: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(u.order());
    for (((o, &e), &p), (&c, &nk)) in out
        .coeffs_mut()
        .iter_mut()
        .zip(decay)
        .zip(weight)
        .zip(u.coeffs().iter().zip(n.coeffs()))
    {
        *o = e * c + p * nk;
    }
    out
}

impl Integrator {
    pub fn new(cfg: &PdeConfig) -> Result<Self> {
        cfg.validate()?;
        let order = cfg.order;
        let dv = fourier::derivative(&cfg.v).with_order(order);
        let df = fourier::derivative(&cfg.f).with_order(order);
        let (decay, weight) = step_weights(cfg.sigma, cfg.dt, order);
        Ok(Integrator {
            sigma: cfg.sigma,
            order,
            dt: cfg.dt,
            dv,
            df,
            truncation: None,
            grid: FourierGrid::new(cfg.grid)?,
            decay,
            weight,
            drift_values: vec![0.0; cfg.grid],
            rho_values: vec![0.0; cfg.grid],
            last_speed: 0.0,
        })
    }

    /// Scales the interaction by `xi_R(||rho||^2)`.
    pub fn with_truncation(mut self, r: f64) -> Result<Self> {
        require_positive("R", r)?;
        self.truncation = Some(r);
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn check_order(&self, f: &SpectralField) -> Result<()> {
        if f.order() != self.order {
            return Err(Error::config(format!(
                "field has order {}, integrator expects {}",
                f.order(),
                self.order
            )));
        }
        Ok(())
    }

    /// `N(rho) = d/dx[(V' + c F' * rho) rho]` with `c = xi_R(||rho||^2)` when
    /// truncated and 1 otherwise.
    pub fn transport(&mut self, rho: &SpectralField) -> Result<SpectralField> {
        self.check_order(rho)?;
        let mut drift = self.dv.clone();
        let scale = self.truncation.map_or(1.0, |r| cutoff(r, rho.l2_norm_sq()));
        if scale != 0.0 {
            drift.axpy(scale, &fourier::convolve(&self.df, rho));
        }
        self.grid.synthesize_into(&drift, &mut self.drift_values)?;
        self.last_speed = self.drift_values.iter().fold(0.0, |m, d| m.max(d.abs()));
        self.grid.synthesize_into(rho, &mut self.rho_values)?;
        for (d, r) in self.drift_values.iter_mut().zip(&self.rho_values) {
            *d *= r;
        }
        let flux = self.grid.analyze(&self.drift_values, self.order)?;
        Ok(fourier::derivative(&flux))
    }

    /// Full right-hand side `sigma rho'' + N(rho)`.
    pub fn rhs(&mut self, rho: &SpectralField) -> Result<SpectralField> {
        let mut out = self.transport(rho)?;
        for (k, c) in rho.modes() {
            let k2 = (k * k) as f64;
            out.set(k, out.get(k) - self.sigma * k2 * c);
        }
        Ok(out)
    }

    /// Number of substeps keeping `h max|b|^2 <= sigma`, the stability limit
    /// of explicit transport against exponential diffusion.
    fn substeps(&self) -> Result<usize> {
        let n = (self.dt * self.last_speed * self.last_speed / self.sigma).ceil();
        if !(n <= MAX_SUBSTEPS as f64) {
            return Err(Error::BlowUp { t: f64::NAN, what: format!("transport speed {:.3e}", self.last_speed) });
        }
        Ok((n as usize).max(1))
    }

    /// `E u + phi_1 dt N(u + shift)`, split into substeps when the transport
    /// speed requires it. A shift is propagated by the linear flow between
    /// substeps, so `advance(v, Some(w))` equals `advance(v + w, None)` minus
    /// `E w` up to rounding.
    pub(crate) fn advance(&mut self, u: &SpectralField, shift: Option<&SpectralField>) -> Result<SpectralField> {
        self.check_order(u)?;
        let first = match shift {
            Some(w) => self.transport(&(u + w))?,
            None => self.transport(u)?,
        };
        let n = self.substeps()?;
        if n == 1 {
            return Ok(combine(&self.decay, &self.weight, u, &first));
        }
        log::debug!("splitting step into {n} substeps (speed {:.3e})", self.last_speed);
        let h = self.dt / n as f64;
        let (decay, weight) = step_weights(self.sigma, h, self.order);
        let mut v = combine(&decay, &weight, u, &first);
        let mut shift = shift.cloned();
        for _ in 1..n {
            let nk = match shift.as_mut() {
                Some(w) => {
                    w.coeffs_mut().iter_mut().zip(&decay).for_each(|(c, e)| *c *= e);
                    self.transport(&(&v + w))?
                }
                None => self.transport(&v)?,
            };
            v = combine(&decay, &weight, &v, &nk);
        }
        Ok(v)
    }

    /// One exponential Euler step.
    pub fn step(&mut self, state: &PdeState) -> Result<PdeState> {
        let t = state.t + self.dt;
        let rho = self.advance(&state.rho, None).map_err(|e| e.at_time(t))?;
        check_finite(&rho, t)?;
        Ok(PdeState { rho, t })
    }

    pub(crate) fn grid_values(&mut self, f: &SpectralField) -> Result<GridFunction> {
        self.grid.synthesize(f)
    }
}

pub(crate) fn check_finite(f: &SpectralField, t: f64) -> Result<()> {
    if !f.is_finite() {
        return Err(Error::BlowUp { t, what: "non-finite Fourier coefficient".into() });
    }
    if f.l2_norm_sq() > 1e200 {
        return Err(Error::BlowUp { t, what: "L2 norm overflow".into() });
    }
    Ok(())
}

/// `sigma rho'' + d/dx[(V' + F' * rho) rho]` for a one-off evaluation.
pub fn rhs(rho: &SpectralField, cfg: &PdeConfig) -> Result<SpectralField> {
    let cfg = PdeConfig { order: rho.order(), ..cfg.clone() };
    Integrator::new(&cfg)?.rhs(rho)
}

/// A single step; builds the integrator each call.
pub fn step(state: &PdeState, cfg: &PdeConfig) -> Result<PdeState> {
    Integrator::new(cfg)?.step(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeSample {
    pub t: f64,
    pub m1: f64,
    pub m2: f64,
    pub mass: f64,
    pub min_value: f64,
    pub l1: f64,
    pub l2: f64,
    pub l2_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<PdeSample>,
    pub final_state: PdeState,
    /// First time the stationarity test passed.
    pub stationary_at: Option<f64>,
    /// `max_t |rho_0(t) - rho_0(0)|` over all steps.
    pub mass_drift: f64,
    /// Smallest grid value over the recorded samples.
    pub min_value: f64,
    /// Optional full-density snapshots at the sample times.
    pub snapshots: Vec<(f64, GridFunction)>,
}

impl Trajectory {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,m1,m2,mass,min_value,l2_residual")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.m1, s.m2, s.mass, s.min_value, s.l2_residual
            )?;
        }
        Ok(())
    }

    pub fn write_snapshots_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,x,rho")?;
        for (t, g) in &self.snapshots {
            for (x, v) in g.nodes().zip(g.values()) {
                writeln!(w, "{t:.16e},{x:.16e},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

fn sample(integ: &mut Integrator, state: &PdeState) -> Result<(PdeSample, GridFunction)> {
    let g = integ.grid_values(&state.rho)?;
    let residual = integ.rhs(&state.rho)?.l2_norm();
    Ok((
        PdeSample {
            t: state.t,
            m1: state.rho.cos_moment(),
            m2: state.rho.sin_moment(),
            mass: state.rho.mass(),
            min_value: g.min(),
            l1: g.l1_norm(),
            l2: state.rho.l2_norm(),
            l2_residual: residual,
        },
        g,
    ))
}

/// Integrates from `rho0` up to `cfg.t_final` with monitors.
pub fn evolve(rho0: &SpectralField, cfg: &PdeConfig) -> Result<Trajectory> {
    evolve_with(rho0, cfg, false)
}

/// [`evolve`], optionally keeping density snapshots at the sample times.
pub fn evolve_with(rho0: &SpectralField, cfg: &PdeConfig, snapshots: bool) -> Result<Trajectory> {
    let mut integ = Integrator::new(cfg)?;
    let mass0 = rho0.mass();
    if (mass0 - 1.0).abs() > 1e-8 {
        return Err(Error::config(format!("initial density must integrate to 1, got {mass0}")));
    }
    let rho0 = rho0.with_order(cfg.order);
    let steps = cfg.steps()?;
    let stride = ((cfg.sample_interval / cfg.dt).round() as usize).max(1);

    let mut state = PdeState { rho: rho0, t: 0.0 };
    let mut traj = Trajectory {
        samples: Vec::new(),
        final_state: state.clone(),
        stationary_at: None,
        mass_drift: 0.0,
        min_value: f64::INFINITY,
        snapshots: Vec::new(),
    };
    let c0 = state.rho.get(0);
    let record = |integ: &mut Integrator, state: &PdeState, traj: &mut Trajectory| -> Result<()> {
        let (s, g) = sample(integ, state)?;
        if s.min_value < -POSITIVITY_TOL && s.min_value < traj.min_value {
            log::warn!("density minimum {:.3e} at t = {:.4}", s.min_value, s.t);
        }
        traj.min_value = traj.min_value.min(s.min_value);
        traj.samples.push(s);
        if snapshots {
            traj.snapshots.push((state.t, g));
        }
        Ok(())
    };
    record(&mut integ, &state, &mut traj)?;

    for n in 1..=steps {
        let next = integ.step(&state)?;
        let next = PdeState { t: n as f64 * cfg.dt, ..next };
        traj.mass_drift = traj.mass_drift.max((next.rho.get(0) - c0).abs());
        let rate = next.rho.l2_distance(&state.rho) / cfg.dt;
        state = next;
        let stationary = rate < STATIONARITY_TOL;
        if stationary && traj.stationary_at.is_none() {
            traj.stationary_at = Some(state.t);
            log::debug!("stationarity test passed at t = {:.4}", state.t);
        }
        if n % stride == 0 || n == steps || (stationary && cfg.stop_when_stationary) {
            record(&mut integ, &state, &mut traj)?;
        }
        if stationary && cfg.stop_when_stationary {
            break;
        }
    }
    traj.final_state = state;
    Ok(traj)
}

/// Initial data shared by the PDE, SPDE and particle front ends.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Uniform,
    /// Von Mises bump `exp(kappa cos(x - x0))`, normalized.
    Bump(f64),
    /// Nontrivial stationary density with `m2` of the given sign.
    Stationary(f64),
    /// Grid samples `x,value` read from CSV, normalized to mass 1.
    File(PathBuf),
}

impl std::str::FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("uniform", None) => Ok(InitSpec::Uniform),
            ("bump", Some(a)) => a
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(InitSpec::Bump)
                .ok_or_else(|| Error::config(format!("bad bump center '{a}'"))),
            ("stationary", Some("+")) => Ok(InitSpec::Stationary(1.0)),
            ("stationary", Some("-")) => Ok(InitSpec::Stationary(-1.0)),
            ("file", Some(p)) if !p.is_empty() => Ok(InitSpec::File(PathBuf::from(p))),
            _ => Err(Error::config(format!(
                "unknown initial condition '{s}'; expected uniform, bump:x0, stationary:+|-, or file:path"
            ))),
        }
    }
}

impl InitSpec {
    /// The initial density as grid samples on `m` nodes.
    pub fn to_grid(&self, sigma: f64, m: usize) -> Result<GridFunction> {
        let g = match self {
            InitSpec::Uniform => GridFunction::from_fn(m, |_| 1.0)?,
            InitSpec::Bump(x0) => {
                GridFunction::from_fn(m, |x| (BUMP_CONCENTRATION * ((x - x0).cos() - 1.0)).exp())?
            }
            InitSpec::Stationary(sign) => {
                let m_star = nontrivial_state(sigma, *sign)?;
                return Ok(stationary::density(sigma, m_star, m)?.samples);
            }
            InitSpec::File(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
                let g = GridFunction::read_csv(std::io::BufReader::new(file))?;
                if g.len() != m {
                    let f = fourier::to_spectral(&g, g.len() / 2 - 1)?;
                    fourier::to_grid(&f, m)?
                } else {
                    g
                }
            }
        };
        let mass = g.integral();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::config("initial density must have positive mass"));
        }
        GridFunction::new(g.values().iter().map(|v| v / mass).collect())
    }

    pub fn to_field(&self, sigma: f64, order: usize) -> Result<SpectralField> {
        if let InitSpec::Stationary(sign) = self {
            let m_star = nontrivial_state(sigma, *sign)?;
            return stationary::density(sigma, m_star, 8)?.to_spectral(order);
        }
        let m = (4 * order + 4).max(1024);
        let mut f = fourier::to_spectral(&self.to_grid(sigma, m)?, order)?;
        // exact unit mass
        f.set(0, 1.0 / std::f64::consts::TAU.sqrt());
        Ok(f)
    }
}

/// The stationary state `(0, sign m*)` at `sigma`.
pub fn nontrivial_state(sigma: f64, sign: f64) -> Result<MomentPair> {
    let cfg = stationary::FixedPointConfig { newton_grid: 0, ..Default::default() };
    let report = stationary::find_fixed_points_with(sigma, &cfg)?;
    report
        .m_star
        .map(|m| MomentPair::new(0.0, sign.signum() * m))
        .ok_or_else(|| Error::config(format!("no nontrivial stationary state at sigma = {sigma}")))
}
