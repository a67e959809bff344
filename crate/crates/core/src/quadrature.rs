//! Periodic trapezoid quadrature on `[0, 2pi)`, including an overflow-safe
//! variant for Boltzmann-type integrands `w(x) exp(phi(x))`.

use std::f64::consts::TAU;

/// Default number of trapezoid nodes.
pub const DEFAULT_NODES: usize = 1024;

/// Equispaced nodes `x_j = 2 pi j / m`.
pub fn nodes(m: usize) -> impl Iterator<Item = f64> + Clone {
    let h = TAU / m as f64;
    (0..m).map(move |j| j as f64 * h)
}

/// Composite trapezoid rule for a `2 pi`-periodic integrand.
pub fn trapezoid(m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let sum: f64 = nodes(m).map(f).sum();
    sum * TAU / m as f64
}

/// Node count that resolves `exp(a cos(2x) + b cos(x) + ...)` when the
/// total amplitude of the exponent is `amplitude`.
///
/// The Fourier coefficients of `exp(a cos 2x)` behave like `I_j(a)`, which are
/// negligible once `j^2 / (2a) > 40`; the count below keeps the first
/// aliased frequency past that point.
pub fn nodes_for_amplitude(amplitude: f64) -> usize {
    let a = amplitude.abs();
    let j = (80.0 * a).sqrt() + 40.0;
    let m = (8.0 * j).ceil() as usize;
    let m = m.max(DEFAULT_NODES);
    m + (m % 2)
}

/// A positive number stored as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other`, exact in the scale factors.
    pub fn ratio(&self, other: &Scaled) -> f64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }
}

/// Trapezoid weights `exp(phi(x_j) - max phi)` for a fixed exponent `phi`.
///
/// All integrals against the same exponent share one pass of `exp` calls,
/// and the subtracted maximum keeps them finite for arbitrarily peaked
/// integrands.
#[derive(Debug, Clone)]
pub struct BoltzmannWeights {
    xs: Vec<f64>,
    weights: Vec<f64>,
    shift: f64,
}

impl BoltzmannWeights {
    pub fn new(m: usize, phi: impl Fn(f64) -> f64) -> Self {
        let xs: Vec<f64> = nodes(m).collect();
        let phis: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
        let shift = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights = phis.iter().map(|p| (p - shift).exp()).collect();
        BoltzmannWeights { xs, weights, shift }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    /// Normalized weights `exp(phi(x_j) - max phi)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The subtracted maximum of the exponent.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `int f(x) exp(phi(x)) dx` as a scaled pair. The mantissa may be
    /// negative or zero for sign-changing `f`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Scaled {
        let h = TAU / self.xs.len() as f64;
        let sum: f64 = self
            .xs
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum();
        Scaled { mantissa: sum * h, log_scale: self.shift }
    }

    /// `int f exp(phi) / int exp(phi)`.
    pub fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        let num: f64 = self.xs.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum();
        let den: f64 = self.weights.iter().sum();
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_for_low_degree_trig_polynomials() {
        let v = trapezoid(16, |x| 1.0 + (3.0 * x).cos() * (2.0 * x).sin() + x.cos().powi(2));
        assert!((v - (TAU + std::f64::consts::PI)).abs() < 1e-13);
    }

    #[test]
    fn scaled_integrals_survive_huge_exponents() {
        let w = BoltzmannWeights::new(4096, |x| 2000.0 * x.cos());
        let z = w.integrate(|_| 1.0);
        assert!(z.value().is_infinite());
        assert!(z.ln().is_finite());
        // <cos x> under exp(a cos x) is I_1(a)/I_0(a) ~ 1 - 1/(2a)
        let mean = w.average(|x| x.cos());
        assert!((mean - (1.0 - 1.0 / 4000.0)).abs() < 1e-6);
    }

    #[test]
    fn node_count_grows_with_amplitude() {
        assert_eq!(nodes_for_amplitude(1.0), DEFAULT_NODES);
        assert!(nodes_for_amplitude(1e4) > DEFAULT_NODES);
        assert_eq!(nodes_for_amplitude(1e4) % 2, 0);
    }
}
