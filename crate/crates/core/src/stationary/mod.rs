//! Stationary states of the McKean-Vlasov equation with `V = cos 2x`,
//! `F = -cos x`.
//!
//! A stationary density has the Boltzmann form
//!
//! ```text
//! rho_{m1,m2}(x) = exp(-(cos 2x - m1 cos x - m2 sin x) / sigma) / Z_sigma(m1, m2)
//! ```
//!
//! where `(m1, m2)` are its own cosine and sine moments. Stationary states
//! are therefore the fixed points of the planar map [`map_g`]. Fixed points
//! only live on the axes `m1 = 0` (the `M2` axis) or `m2 = 0` (the `M1`
//! axis); on each axis the fixed-point problem is equivalent to finding the
//! zeros of a scalar function ([`zeta`] and [`xi`] respectively), which have
//! power series in `m` with coefficients built from the moment sequences
//! [`moment_seq_s`] / [`moment_seq_c`].

mod fixed_points;
mod laplace;

pub use fixed_points::{
    find_fixed_points, find_fixed_points_with, phase_scan, FixedPointConfig, FixedPointReport,
    NewtonSummary, PhaseRow,
};
pub use laplace::{
    h_expansions, laplace_approx, laplace_coefficients, s0_leading_order_error, ExpansionCheck,
    LaplaceCoefficients, TrigPotential,
};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::fourier::{self, GridFunction, SpectralField};
use crate::quadrature::{self, BoltzmannWeights, Scaled};

/// Order parameters: cosine moment `m1` and sine moment `m2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentPair {
    pub m1: f64,
    pub m2: f64,
}

impl MomentPair {
    pub const ORIGIN: MomentPair = MomentPair { m1: 0.0, m2: 0.0 };

    pub fn new(m1: f64, m2: f64) -> Self {
        MomentPair { m1, m2 }
    }

    /// Moments in polar form `(M cos phi, M sin phi)`.
    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        MomentPair { m1: magnitude * phase.cos(), m2: magnitude * phase.sin() }
    }

    pub fn magnitude(&self) -> f64 {
        self.m1.hypot(self.m2)
    }

    pub fn phase(&self) -> f64 {
        self.m2.atan2(self.m1)
    }

    pub fn distance(&self, other: &MomentPair) -> f64 {
        (self.m1 - other.m1).hypot(self.m2 - other.m2)
    }
}

fn quadrature_nodes(sigma: f64, m: MomentPair) -> usize {
    quadrature::nodes_for_amplitude((1.0 + m.m1.abs() + m.m2.abs()) / sigma)
}

/// Exponent `-(cos 2x - m1 cos x - m2 sin x) / sigma`.
fn boltzmann_phase(sigma: f64, m: MomentPair) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let (s, c) = x.sin_cos();
        -((2.0 * x).cos() - m.m1 * c - m.m2 * s) / sigma
    }
}

fn boltzmann_weights(sigma: f64, m: MomentPair) -> BoltzmannWeights {
    BoltzmannWeights::new(quadrature_nodes(sigma, m), boltzmann_phase(sigma, m))
}

/// `Z_sigma(m)` as a scaled pair; finite for any `sigma > 0`.
pub fn partition_z_scaled(sigma: f64, m: MomentPair) -> Result<Scaled> {
    require_positive("sigma", sigma)?;
    Ok(boltzmann_weights(sigma, m).integrate(|_| 1.0))
}

/// Normalization constant `Z_sigma(m1, m2)`.
pub fn partition_z(sigma: f64, m: MomentPair) -> Result<f64> {
    let z = partition_z_scaled(sigma, m)?.value();
    if !z.is_finite() {
        return Err(Error::Overflow(format!("Z_sigma overflows at sigma = {sigma}")));
    }
    Ok(z)
}

/// Grid samples of the stationary density `rho_{m1,m2}`.
#[derive(Debug, Clone)]
pub struct StationaryDensity {
    pub sigma: f64,
    pub moments: MomentPair,
    /// `ln Z_sigma(m)`; `Z` itself overflows for very small `sigma`.
    pub ln_z: f64,
    pub samples: GridFunction,
}

impl StationaryDensity {
    pub fn z(&self) -> f64 {
        self.ln_z.exp()
    }

    /// Pointwise closed form.
    pub fn eval(&self, x: f64) -> f64 {
        (boltzmann_phase(self.sigma, self.moments)(x) - self.ln_z).exp()
    }

    /// Projection onto `e_k`, `|k| <= order`, using a quadrature grid fine
    /// enough for the density regardless of the sample grid.
    pub fn to_spectral(&self, order: usize) -> Result<SpectralField> {
        let m = quadrature_nodes(self.sigma, self.moments).max(2 * order + 2);
        let m = m + (m % 2);
        let g = GridFunction::from_fn(m, |x| self.eval(x))?;
        fourier::to_spectral(&g, order)
    }
}

/// `rho_{m1,m2}` sampled on `m_grid` nodes.
pub fn density(sigma: f64, m: MomentPair, m_grid: usize) -> Result<StationaryDensity> {
    let ln_z = partition_z_scaled(sigma, m)?.ln();
    let phase = boltzmann_phase(sigma, m);
    let samples = GridFunction::from_fn(m_grid, |x| (phase(x) - ln_z).exp())?;
    Ok(StationaryDensity { sigma, moments: m, ln_z, samples })
}

/// The fixed-point map `g_sigma(m) = (int cos rho_m, int sin rho_m)`.
pub fn map_g(sigma: f64, m: MomentPair) -> Result<MomentPair> {
    require_positive("sigma", sigma)?;
    let w = boltzmann_weights(sigma, m);
    let den: f64 = w.weights().iter().sum();
    let (mut c, mut s) = (0.0, 0.0);
    for (&x, &wx) in w.nodes().iter().zip(w.weights()) {
        let (sx, cx) = x.sin_cos();
        c += cx * wx;
        s += sx * wx;
    }
    Ok(MomentPair { m1: c / den, m2: s / den })
}

/// Restriction of `g_sigma` to the `M2` axis: second component of `g(0, m)`.
pub fn map_gbar(sigma: f64, m: f64) -> Result<f64> {
    Ok(map_g(sigma, MomentPair::new(0.0, m))?.m2)
}

/// Restriction of `g_sigma` to the `M1` axis: first component of `g(m, 0)`.
pub fn map_h(sigma: f64, m: f64) -> Result<f64> {
    Ok(map_g(sigma, MomentPair::new(m, 0.0))?.m1)
}

/// `zeta_sigma(m) = int (sin x - m) exp(-cos 2x / sigma + m sin x / sigma) dx`.
///
/// Its zeros are exactly the fixed points of [`map_gbar`].
pub fn zeta(sigma: f64, m: f64) -> Result<f64> {
    Ok(zeta_scaled(sigma, m)?.value())
}

pub fn zeta_scaled(sigma: f64, m: f64) -> Result<Scaled> {
    require_positive("sigma", sigma)?;
    let w = boltzmann_weights(sigma, MomentPair::new(0.0, m));
    Ok(w.integrate(|x| x.sin() - m))
}

/// `xi_sigma(m) = int (cos x - m) exp(-cos 2x / sigma + m cos x / sigma) dx`,
/// the `M1`-axis analogue of [`zeta`].
pub fn xi(sigma: f64, m: f64) -> Result<f64> {
    Ok(xi_scaled(sigma, m)?.value())
}

pub fn xi_scaled(sigma: f64, m: f64) -> Result<Scaled> {
    require_positive("sigma", sigma)?;
    let w = boltzmann_weights(sigma, MomentPair::new(m, 0.0));
    Ok(w.integrate(|x| x.cos() - m))
}

/// Which trigonometric factor a moment sequence raises to the power `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Sine,
    Cosine,
}

/// Even moments `int (sin x)^{2j} exp(-cos 2x / sigma) dx` (or with `cos x`)
/// for `j = 0..count`, sharing one scale factor `exp(1/sigma)`.
struct EvenMoments {
    mantissas: Vec<f64>,
    log_scale: f64,
}

impl EvenMoments {
    fn new(sigma: f64, axis: Axis, count: usize) -> Self {
        let w = boltzmann_weights(sigma, MomentPair::ORIGIN);
        let h = TAU / w.len() as f64;
        let sq: Vec<f64> = w
            .nodes()
            .iter()
            .map(|&x| match axis {
                Axis::Sine => x.sin().powi(2),
                Axis::Cosine => x.cos().powi(2),
            })
            .collect();
        let mut running: Vec<f64> = w.weights().to_vec();
        let mut mantissas = Vec::with_capacity(count);
        for _ in 0..count {
            mantissas.push(running.iter().sum::<f64>() * h);
            for (r, s) in running.iter_mut().zip(&sq) {
                *r *= s;
            }
        }
        EvenMoments { mantissas, log_scale: w.shift() }
    }

    fn value(&self, j: usize) -> f64 {
        self.mantissas[j] * self.log_scale.exp()
    }

    /// `s_{2j+2} / ((2j + 1) s_{2j}) - sigma`.
    fn upsilon(&self, j: usize, sigma: f64) -> f64 {
        self.mantissas[j + 1] / ((2 * j + 1) as f64 * self.mantissas[j]) - sigma
    }
}

fn moment_seq(sigma: f64, k: usize, axis: Axis) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let w = boltzmann_weights(sigma, MomentPair::ORIGIN);
    let kk = k as i32;
    let s = w.integrate(|x| match axis {
        Axis::Sine => x.sin().powi(kk),
        Axis::Cosine => x.cos().powi(kk),
    });
    Ok(s.value())
}

/// `s_k = int (sin x)^k exp(-cos 2x / sigma) dx`.
pub fn moment_seq_s(sigma: f64, k: usize) -> Result<f64> {
    moment_seq(sigma, k, Axis::Sine)
}

/// `c_k = int (cos x)^k exp(-cos 2x / sigma) dx`.
pub fn moment_seq_c(sigma: f64, k: usize) -> Result<f64> {
    moment_seq(sigma, k, Axis::Cosine)
}

/// `Upsilon_k(sigma) = s_{2k+2} / ((2k+1) s_{2k}) - sigma`.
pub fn upsilon(sigma: f64, k: usize) -> Result<f64> {
    require_positive("sigma", sigma)?;
    Ok(EvenMoments::new(sigma, Axis::Sine, k + 2).upsilon(k, sigma))
}

/// `iota_k(sigma) = c_{2k+2} / ((2k+1) c_{2k}) - sigma`.
pub fn iota(sigma: f64, k: usize) -> Result<f64> {
    require_positive("sigma", sigma)?;
    Ok(EvenMoments::new(sigma, Axis::Cosine, k + 2).upsilon(k, sigma))
}

/// Maximum number of series terms before [`Error::NotConverged`].
pub const SERIES_MAX_TERMS: usize = 200;

fn odd_series(sigma: f64, m: f64, tol: f64, axis: Axis) -> Result<f64> {
    require_positive("sigma", sigma)?;
    require_positive("tol", tol)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let moments = EvenMoments::new(sigma, axis, SERIES_MAX_TERMS + 2);
    let r = m / sigma;
    // (m / sigma)^{2k+1} / (2k)!, updated recursively
    let mut weight = r;
    let mut sum = 0.0;
    let mut small_in_a_row = 0;
    for k in 0..SERIES_MAX_TERMS {
        if k > 0 {
            weight *= r * r / ((2 * k) as f64 * (2 * k - 1) as f64);
        }
        let term = weight * moments.mantissas[k] * moments.upsilon(k, sigma);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::NotConverged { terms: k + 1 });
        }
        if term.abs() <= tol * sum.abs() + f64::MIN_POSITIVE {
            small_in_a_row += 1;
            if small_in_a_row == 2 {
                return Ok(sum * moments.log_scale.exp());
            }
        } else {
            small_in_a_row = 0;
        }
    }
    Err(Error::NotConverged { terms: SERIES_MAX_TERMS })
}

/// Power series `sum_k (m/sigma)^{2k+1} s_{2k} Upsilon_k / (2k)!` for
/// [`zeta`], truncated once consecutive terms drop below `tol` relative to
/// the partial sum.
pub fn zeta_series(sigma: f64, m: f64, tol: f64) -> Result<f64> {
    odd_series(sigma, m, tol, Axis::Sine)
}

/// The analogous series for [`xi`] with `c_{2k}` and `iota_k`.
pub fn xi_series(sigma: f64, m: f64, tol: f64) -> Result<f64> {
    odd_series(sigma, m, tol, Axis::Cosine)
}

/// `zeta'_sigma(0) = (s_2 - sigma s_0) / sigma`; positive below `sigma_c`.
pub fn zeta_prime_at_zero(sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let s = EvenMoments::new(sigma, Axis::Sine, 2);
    Ok((s.value(1) - sigma * s.value(0)) / sigma)
}

/// `I(M, phi) = int sin(x - phi) exp(-(cos 2x - M cos(x - phi)) / sigma) dx`,
/// proportional to the component of `g(m) - m` orthogonal to `m` for
/// `m = M (cos phi, sin phi)`. It vanishes only for `M = 0` or `phi` on an
/// axis.
pub fn quadrant_exclusion(sigma: f64, magnitude: f64, phi: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    if !(magnitude >= 0.0) {
        return Err(Error::config(format!("M must be nonnegative, got {magnitude}")));
    }
    let w = boltzmann_weights(sigma, MomentPair::from_polar(magnitude, phi));
    Ok(w.integrate(|x| (x - phi).sin()).value())
}

/// Numerical evidence that `xi_sigma` has no zero besides `m = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct XiUniqueness {
    pub sigma: f64,
    /// `c_2 - sigma c_0`, the coefficient of the linear term.
    pub linear_coefficient: f64,
    /// `iota_k(sigma)` for `k = 1..=10`.
    pub iota: Vec<f64>,
    /// Whether `xi_sigma` changes sign on `(0, 1]`.
    pub sign_change: bool,
    pub holds: bool,
}

/// Checks `c_2 - sigma c_0 < 0`, `iota_k < 0` for `k = 1..=10` and the
/// absence of sign changes of `xi_sigma` on `(0, 1]`. Requires `sigma >= 1/2`.
pub fn xi_uniqueness_check(sigma: f64) -> Result<XiUniqueness> {
    require_positive("sigma", sigma)?;
    if sigma < 0.5 {
        return Err(Error::config(format!("the xi uniqueness check needs sigma >= 1/2, got {sigma}")));
    }
    let c = EvenMoments::new(sigma, Axis::Cosine, 12);
    let linear_coefficient = c.value(1) - sigma * c.value(0);
    let iota: Vec<f64> = (1..=10).map(|k| c.upsilon(k, sigma)).collect();
    let xs: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
    let mut sign_change = false;
    let mut prev = xi(sigma, xs[0])?;
    for &m in &xs[1..] {
        let v = xi(sigma, m)?;
        if v.signum() != prev.signum() {
            sign_change = true;
        }
        prev = v;
    }
    let holds = linear_coefficient < 0.0 && iota.iter().all(|&v| v < 0.0) && !sign_change;
    Ok(XiUniqueness { sigma, linear_coefficient, iota, sign_change, holds })
}
