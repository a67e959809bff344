//! Bessel-type integrals `I_n(z) = int_T cos(2 n x) exp(z cos 2x) dx`, their
//! ratios, and the critical function `f_c` whose unique zero is the critical
//! diffusion `sigma_c`.
//!
//! With this normalization `I_n(z)` equals `2 pi` times the standard modified
//! Bessel function of the first kind.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::quadrature::{self, BoltzmannWeights, Scaled};
use crate::roots;

/// Largest `|z|` for which [`bessel_i`] returns an unscaled value.
pub const OVERFLOW_GUARD: f64 = 700.0;

/// Initial bracket for the critical diffusion.
pub const SIGMA_C_BRACKET: (f64, f64) = (0.4, 1.0);

fn nodes_for(n: u32, z: f64) -> usize {
    let m = quadrature::nodes_for_amplitude(z) + 8 * n as usize;
    m + (m % 2)
}

/// `I_n(z)` as `mantissa * exp(|z|)`; never overflows.
pub fn bessel_i_scaled(n: u32, z: f64) -> Scaled {
    let w = BoltzmannWeights::new(nodes_for(n, z), |x| z * (2.0 * x).cos());
    let nf = n as f64;
    w.integrate(|x| (2.0 * nf * x).cos())
}

/// `I_n(z)` by periodic trapezoid quadrature.
///
/// Returns [`Error::Overflow`] beyond [`OVERFLOW_GUARD`]; use
/// [`bessel_i_scaled`] there.
pub fn bessel_i(n: u32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::config(format!("Bessel argument must be finite, got {z}")));
    }
    if z.abs() > OVERFLOW_GUARD {
        return Err(Error::Overflow(format!(
            "I_{n}({z}) exceeds the f64 range; use the scaled evaluation"
        )));
    }
    Ok(bessel_i_scaled(n, z).value())
}

/// `r_n(z) = I_{n+1}(z) / I_n(z)`, computed from scaled pairs so it stays
/// finite for any `z`. Fails when `I_n(z)` is below quadrature resolution.
pub fn bessel_ratio(n: u32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::config(format!("Bessel argument must be finite, got {z}")));
    }
    let den = bessel_i_scaled(n, z);
    // below this the quadrature cannot resolve I_n against I_0
    let floor = 1e-13 * bessel_i_scaled(0, z).mantissa;
    if den.mantissa.abs() <= floor {
        return Err(Error::numerical(format!("I_{n}({z}) vanishes; ratio undefined")));
    }
    Ok(bessel_i_scaled(n + 1, z).ratio(&den))
}

/// `f_c(sigma) = 1/sigma - 2 + r_0(1/sigma) / sigma`.
pub fn f_c(sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let z = 1.0 / sigma;
    Ok(z - 2.0 + z * bessel_ratio(0, z)?)
}

/// Result of [`find_sigma_c`].
#[derive(Debug, Clone, Serialize)]
pub struct SigmaC {
    pub sigma_c: f64,
    /// `f_c` evaluated at the returned root.
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection for the root of `f_c` on [`SIGMA_C_BRACKET`], refined until
/// both the bracket half-width and `|f_c|` are at most `tol`.
pub fn find_sigma_c(tol: f64) -> Result<SigmaC> {
    require_positive("tol", tol)?;
    let (a, b) = SIGMA_C_BRACKET;
    let mut x_tol = tol;
    let mut iterations = 0;
    loop {
        let mut failure = None;
        let bis = roots::bisect(
            |s| match f_c(s) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            },
            a,
            b,
            x_tol,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let bis = bis.map_err(|e| Error::numerical(format!("sigma_c bracket failure: {e}")))?;
        iterations += bis.iterations;
        let residual = f_c(bis.root)?;
        if residual.abs() <= tol || x_tol < 1e-15 {
            return Ok(SigmaC { sigma_c: bis.root, residual, iterations });
        }
        x_tol /= 4.0;
    }
}
