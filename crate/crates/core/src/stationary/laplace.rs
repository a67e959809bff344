//! Laplace-method asymptotics for integrals `int f exp(-U / sigma)` with a
//! trigonometric potential `U`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::MomentPair;
use crate::error::{require_positive, Error, Result};
use crate::quadrature::{self, BoltzmannWeights};

/// `U(x) = a2 cos 2x + c1 cos x + s1 sin x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigPotential {
    pub a2: f64,
    pub c1: f64,
    pub s1: f64,
}

impl TrigPotential {
    /// The exponent of the stationary density at moments `m`:
    /// `cos 2x - m1 cos x - m2 sin x`.
    pub fn stationary(m: MomentPair) -> Self {
        TrigPotential { a2: 1.0, c1: -m.m1, s1: -m.m2 }
    }

    /// `k`-th derivative for `k <= 4`.
    pub fn derivative(&self, k: u32, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        let (s2, c2) = (2.0 * x).sin_cos();
        let (a, p, q) = (self.a2, self.c1, self.s1);
        match k {
            0 => a * c2 + p * c + q * s,
            1 => -2.0 * a * s2 - p * s + q * c,
            2 => -4.0 * a * c2 - p * c - q * s,
            3 => 8.0 * a * s2 + p * s - q * c,
            4 => 16.0 * a * c2 + p * c + q * s,
            _ => panic!("derivative order {k} not supported"),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// Global minimizers on `[0, 2 pi)`, refined by Newton on `U'`.
    pub fn global_minima(&self) -> Vec<f64> {
        let n = 4096;
        let h = TAU / n as f64;
        let vals: Vec<f64> = (0..n).map(|j| self.value(j as f64 * h)).collect();
        let mut cands = Vec::new();
        for j in 0..n {
            let (l, r) = (vals[(j + n - 1) % n], vals[(j + 1) % n]);
            if vals[j] <= l && vals[j] < r {
                let mut x = j as f64 * h;
                for _ in 0..50 {
                    let step = self.derivative(1, x) / self.derivative(2, x);
                    x -= step;
                    if step.abs() < 1e-15 {
                        break;
                    }
                }
                cands.push(x.rem_euclid(TAU));
            }
        }
        let umin = cands.iter().map(|&x| self.value(x)).fold(f64::INFINITY, f64::min);
        let mut out: Vec<f64> = Vec::new();
        for x in cands {
            if self.value(x) <= umin + 1e-12 * (1.0 + umin.abs())
                && !out.iter().any(|&y| (y - x).abs() < 1e-8)
            {
                out.push(x);
            }
        }
        out
    }
}

/// Ingredients of the two-term Laplace expansion around one minimum.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LaplaceCoefficients {
    pub x_min: f64,
    pub u_min: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    /// First-order correction `gamma_f`.
    pub gamma: f64,
}

impl LaplaceCoefficients {
    /// `ln( sqrt(2 pi sigma / U''(x_m)) exp(-U(x_m) / sigma) )`.
    pub fn log_prefactor(&self, sigma: f64) -> f64 {
        0.5 * (TAU * sigma / self.u2).ln() - self.u_min / sigma
    }
}

/// Computes `U^{(k)}(x_m)` analytically and `f`, `f'`, `f''` by central
/// differences, then
///
/// ```text
/// gamma_f = f (5 U3^2 / (24 U2^3) - U4 / (8 U2^2)) - f' U3 / (2 U2^2) + f'' / (2 U2)
/// ```
pub fn laplace_coefficients(
    f: impl Fn(f64) -> f64,
    u: &TrigPotential,
    x_min: f64,
) -> Result<LaplaceCoefficients> {
    let u2 = u.derivative(2, x_min);
    if !(u2 > 0.0) {
        return Err(Error::config(format!("U''(x_m) = {u2} must be positive at a minimum")));
    }
    let u3 = u.derivative(3, x_min);
    let u4 = u.derivative(4, x_min);
    let h = 1e-3;
    let (fm, f0, fp) = (f(x_min - h), f(x_min), f(x_min + h));
    let (fm2, fp2) = (f(x_min - 2.0 * h), f(x_min + 2.0 * h));
    let f1 = (fm2 - 8.0 * fm + 8.0 * fp - fp2) / (12.0 * h);
    let f2 = (-fm2 + 16.0 * fm - 30.0 * f0 + 16.0 * fp - fp2) / (12.0 * h * h);
    let gamma = f0 * (5.0 * u3 * u3 / (24.0 * u2.powi(3)) - u4 / (8.0 * u2 * u2))
        - f1 * u3 / (2.0 * u2 * u2)
        + f2 / (2.0 * u2);
    Ok(LaplaceCoefficients { x_min, u_min: u.value(x_min), u2, u3, u4, f0, f1, f2, gamma })
}

/// `sqrt(2 pi sigma / U2) exp(-U(x_m) / sigma) (f(x_m) + gamma_f sigma)`.
pub fn laplace_approx(
    f: impl Fn(f64) -> f64,
    u: &TrigPotential,
    x_min: f64,
    sigma: f64,
) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let c = laplace_coefficients(f, u, x_min)?;
    Ok(c.log_prefactor(sigma).exp() * (c.f0 + c.gamma * sigma))
}

/// `|s_0 / (2 sqrt(pi sigma / 2) exp(1/sigma)) - 1|`.
pub fn s0_leading_order_error(sigma: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    let w = BoltzmannWeights::new(quadrature::nodes_for_amplitude(1.0 / sigma), |x| {
        -(2.0 * x).cos() / sigma
    });
    let s0 = w.integrate(|_| 1.0);
    let ratio = s0.mantissa * (s0.log_scale - 1.0 / sigma).exp() / (2.0 * (PI * sigma / 2.0).sqrt());
    Ok((ratio - 1.0).abs())
}

/// Quadrature against the two-term Laplace expansion for one integrand of
/// the `M1`-axis map `h_sigma`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCheck {
    pub integrand: &'static str,
    pub sigma: f64,
    pub m: f64,
    /// Quadrature divided by the Laplace prefactor of the first minimum.
    pub quadrature_ratio: f64,
    /// Sum of `f(x_m)` over the minima.
    pub leading: f64,
    /// Sum of `gamma_f` over the minima.
    pub first_order: f64,
    /// `|ratio - leading - first_order sigma| / sigma`.
    pub error_over_sigma: f64,
    /// Leading constant of the closed-form display (2, m/2, m^2/8).
    pub display_leading: f64,
    /// Explicit part of the display's first-order coefficient.
    pub display_explicit: f64,
    /// Remainder `c(m)` implied by quadrature in the display's own
    /// normalization; `O(m)` as `m -> 0`.
    pub implied_c: f64,
}

/// Checks the expansions of `int e^{-U_m/sigma}`, `int cos x e^{-U_m/sigma}`
/// and `int cos^2 x e^{-U_m/sigma}` for `U_m = cos 2x - m cos x`.
pub fn h_expansions(sigma: f64, m: f64) -> Result<Vec<ExpansionCheck>> {
    require_positive("sigma", sigma)?;
    let u = TrigPotential { a2: 1.0, c1: -m, s1: 0.0 };
    let minima = u.global_minima();
    if minima.is_empty() {
        return Err(Error::numerical("no minimum found"));
    }
    let w = BoltzmannWeights::new(quadrature::nodes_for_amplitude((1.0 + m.abs()) / sigma), |x| {
        -u.value(x) / sigma
    });
    let e_min = 1.0 + m * m / 8.0;
    let u2_disp = 4.0 - m * m / 4.0;
    let log_disp_a = 0.5 * (TAU * sigma / u2_disp).ln() + e_min / sigma;
    let log_disp_b = 0.5 * (PI * sigma / 2.0).ln() + e_min / sigma;

    type Integrand = (&'static str, fn(f64) -> f64, f64, f64, bool);
    let cases: [Integrand; 3] = [
        ("1", |_| 1.0, 2.0, 4.0 / (4.0 - m * m / 2.0).powi(2), false),
        ("cos", |x: f64| x.cos(), m / 2.0, 0.0, false),
        ("cos^2", |x: f64| x.cos().powi(2), m * m / 8.0, 2.0 / (4.0 - m * m / 4.0), true),
    ];
    let mut out = Vec::new();
    for (name, f, display_leading, display_explicit, narrow_prefactor) in cases {
        let coeffs: Vec<LaplaceCoefficients> = minima
            .iter()
            .map(|&x| laplace_coefficients(f, &u, x))
            .collect::<Result<_>>()?;
        let log_ref = coeffs[0].log_prefactor(sigma);
        let mut leading = 0.0;
        let mut first_order = 0.0;
        for c in &coeffs {
            let rel = (c.log_prefactor(sigma) - log_ref).exp();
            leading += rel * c.f0;
            first_order += rel * c.gamma;
        }
        let q = w.integrate(f);
        let quadrature_ratio = q.mantissa * (q.log_scale - log_ref).exp();
        let error_over_sigma = (quadrature_ratio - leading - first_order * sigma).abs() / sigma;
        let log_disp = if narrow_prefactor { log_disp_b } else { log_disp_a };
        let disp_ratio = q.mantissa * (q.log_scale - log_disp).exp();
        let implied_c = (disp_ratio - display_leading) / sigma - display_explicit;
        out.push(ExpansionCheck {
            integrand: name,
            sigma,
            m,
            quadrature_ratio,
            leading,
            first_order,
            error_over_sigma,
            display_leading,
            display_explicit,
            implied_c,
        });
    }
    Ok(out)
}
