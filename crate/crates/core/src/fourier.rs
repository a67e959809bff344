//! Real Fourier representation of `2 pi`-periodic functions.
//!
//! Fields are stored in the orthonormal basis
//!
//! ```text
//! e_k(x) = sin(k x) / sqrt(pi)   k > 0
//! e_0(x) = 1 / sqrt(2 pi)
//! e_k(x) = cos(|k| x) / sqrt(pi) k < 0
//! ```
//!
//! truncated to `|k| <= K`. Products and pointwise evaluations go through an
//! equispaced grid; convolutions and the heat semigroup act mode by mode.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature;

const SQRT_PI: f64 = 1.772_453_850_905_516;
const SQRT_TAU: f64 = 2.506_628_274_631_000_5;

/// Truncated coefficients `f_k`, `|k| <= order`, of a real periodic function.
#[derive(Clone, PartialEq)]
pub struct SpectralField {
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("order", &self.order)
            .field("l2_norm", &self.l2_norm())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(order: usize) -> Self {
        SpectralField { order, coeffs: vec![0.0; 2 * order + 1] }
    }

    /// The basis function `e_k` itself.
    pub fn basis(order: usize, k: i64) -> Self {
        let mut f = Self::zeros(order);
        f.set(k, 1.0);
        f
    }

    /// Builds a field from coefficients ordered `k = -order, ..., order`.
    pub fn from_coeffs(order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != 2 * order + 1 {
            return Err(Error::config(format!(
                "expected {} coefficients for order {order}, got {}",
                2 * order + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("spectral coefficients must be finite"));
        }
        Ok(SpectralField { order, coeffs })
    }

    /// `c0 + a1 cos x + b1 sin x + a2 cos 2x + ...` from plain trigonometric
    /// amplitudes: `cos[n-1]` and `sin[n-1]` multiply `cos(n x)` and `sin(n x)`.
    pub fn from_trig(order: usize, constant: f64, cos: &[f64], sin: &[f64]) -> Self {
        let mut f = Self::zeros(order);
        f.set(0, constant * SQRT_TAU);
        for (n, &a) in cos.iter().enumerate().take(order) {
            f.set(-(n as i64 + 1), a * SQRT_PI);
        }
        for (n, &b) in sin.iter().enumerate().take(order) {
            f.set(n as i64 + 1, b * SQRT_PI);
        }
        f
    }

    /// The uniform probability density `1 / (2 pi)`.
    pub fn uniform_density(order: usize) -> Self {
        Self::from_trig(order, 1.0 / TAU, &[], &[])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients ordered `k = -order, ..., order`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    fn index(&self, k: i64) -> Option<usize> {
        if k.unsigned_abs() as usize > self.order {
            None
        } else {
            Some((k + self.order as i64) as usize)
        }
    }

    /// `f_k`, zero outside the truncation.
    pub fn get(&self, k: i64) -> f64 {
        self.index(k).map_or(0.0, |i| self.coeffs[i])
    }

    /// Sets `f_k`. Panics if `|k|` exceeds the order.
    pub fn set(&mut self, k: i64, value: f64) {
        let i = self.index(k).expect("mode outside truncation");
        self.coeffs[i] = value;
    }

    /// `(k, f_k)` pairs.
    pub fn modes(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let k0 = -(self.order as i64);
        self.coeffs.iter().enumerate().map(move |(i, &c)| (k0 + i as i64, c))
    }

    /// Truncates or zero-pads to a new order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut out = Self::zeros(order);
        let n = order.min(self.order) as i64;
        for k in -n..=n {
            out.set(k, self.get(k));
        }
        out
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `||f||_{L^2}` via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `||self - other||_{L^2}` over the union of both truncations.
    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        let n = self.order.max(other.order) as i64;
        (-n..=n)
            .map(|k| {
                let d = self.get(k) - other.get(k);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `int f dx`.
    pub fn mass(&self) -> f64 {
        SQRT_TAU * self.get(0)
    }

    /// `int cos(x) f(x) dx`.
    pub fn cos_moment(&self) -> f64 {
        SQRT_PI * self.get(-1)
    }

    /// `int sin(x) f(x) dx`.
    pub fn sin_moment(&self) -> f64 {
        SQRT_PI * self.get(1)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Pointwise evaluation of the truncated series.
    pub fn eval(&self, x: f64) -> f64 {
        let (s1, c1) = x.sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        let mut acc = self.get(0) / SQRT_TAU;
        for k in 1..=self.order as i64 {
            let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
            s = sn;
            c = cn;
            acc += (self.get(k) * s + self.get(-k) * c) / SQRT_PI;
        }
        acc
    }

    /// `self += a * other`; `other` may have any order.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        let n = self.order.min(other.order) as i64;
        for k in -n..=n {
            let i = self.index(k).unwrap();
            self.coeffs[i] += a * other.get(k);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        SpectralField { order: self.order, coeffs: self.coeffs.iter().map(|c| a * c).collect() }
    }

    /// Complex exponential coefficients `c_k`, `k = 0..=order`, such that
    /// `f(x) = sum_k c_k exp(i k x)` with `c_{-k} = conj(c_k)`.
    pub fn to_complex(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.order + 1);
        out.push(Complex64::new(self.get(0) / SQRT_TAU, 0.0));
        for k in 1..=self.order as i64 {
            out.push(Complex64::new(self.get(-k), -self.get(k)) / (2.0 * SQRT_PI));
        }
        out
    }

    /// Inverse of [`SpectralField::to_complex`]; imaginary parts of `c_0` are dropped.
    pub fn from_complex(c: &[Complex64]) -> Self {
        assert!(!c.is_empty());
        let order = c.len() - 1;
        let mut f = Self::zeros(order);
        f.set(0, SQRT_TAU * c[0].re);
        for (k, ck) in c.iter().enumerate().skip(1) {
            let k = k as i64;
            f.set(k, -2.0 * SQRT_PI * ck.im);
            f.set(-k, 2.0 * SQRT_PI * ck.re);
        }
        f
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.with_order(self.order.max(rhs.order));
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.with_order(self.order.max(rhs.order));
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}

/// Samples at the nodes `x_j = 2 pi j / M`, `M` even.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() % 2 != 0 {
            return Err(Error::config(format!(
                "grid size must be a positive even integer, got {}",
                values.len()
            )));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(quadrature::nodes(m).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + Clone {
        quadrature::nodes(self.values.len())
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    /// Trapezoid integral over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.spacing()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `x,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,value")?;
        for (x, v) in self.nodes().zip(&self.values) {
            writeln!(w, "{x:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`GridFunction::write_csv`]. Only the
    /// value column is used; the nodes are assumed equispaced.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::config(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('x')) {
                continue;
            }
            let value = line
                .split(',')
                .nth(1)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::config(format!("malformed grid row {}: {line}", lineno + 1)))?;
            values.push(value);
        }
        Self::new(values)
    }
}

/// Cached FFT plans for one grid size.
pub struct FourierGrid {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl FourierGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return Err(Error::config(format!("grid size must be a positive even integer, got {m}")));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Ok(FourierGrid {
            m,
            fwd,
            inv,
            buf: vec![Complex64::default(); m],
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if self.m < 2 * order + 2 {
            return Err(Error::config(format!(
                "truncation order {order} needs at least {} grid nodes, got {}",
                2 * order + 2,
                self.m
            )));
        }
        Ok(())
    }

    /// Trapezoid projections `<g, e_k>` for `|k| <= order`.
    pub fn analyze(&mut self, values: &[f64], order: usize) -> Result<SpectralField> {
        self.check_order(order)?;
        if values.len() != self.m {
            return Err(Error::config("grid size mismatch"));
        }
        for (b, &v) in self.buf.iter_mut().zip(values) {
            *b = Complex64::new(v, 0.0);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        let inv_m = 1.0 / self.m as f64;
        let c: Vec<Complex64> = self.buf[..=order].iter().map(|b| b * inv_m).collect();
        Ok(SpectralField::from_complex(&c))
    }

    /// Evaluates `f` at the grid nodes into `out`.
    pub fn synthesize_into(&mut self, f: &SpectralField, out: &mut [f64]) -> Result<()> {
        self.check_order(f.order())?;
        if out.len() != self.m {
            return Err(Error::config("grid size mismatch"));
        }
        self.buf.iter_mut().for_each(|b| *b = Complex64::default());
        let c = f.to_complex();
        self.buf[0] = c[0];
        for (k, ck) in c.iter().enumerate().skip(1) {
            self.buf[k] = *ck;
            self.buf[self.m - k] = ck.conj();
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (o, b) in out.iter_mut().zip(&self.buf) {
            *o = b.re;
        }
        Ok(())
    }

    pub fn synthesize(&mut self, f: &SpectralField) -> Result<GridFunction> {
        let mut out = vec![0.0; self.m];
        self.synthesize_into(f, &mut out)?;
        GridFunction::new(out)
    }
}

/// Projects grid samples onto `e_k`, `|k| <= order`, with the trapezoid rule.
pub fn to_spectral(g: &GridFunction, order: usize) -> Result<SpectralField> {
    FourierGrid::new(g.len())?.analyze(g.values(), order)
}

/// Evaluates a field on `m` equispaced nodes.
pub fn to_grid(f: &SpectralField, m: usize) -> Result<GridFunction> {
    FourierGrid::new(m)?.synthesize(f)
}

/// Exact derivative: `d/dx sin(kx) = k cos(kx)`, `d/dx cos(kx) = -k sin(kx)`.
pub fn derivative(f: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(f.order());
    for k in 1..=f.order() as i64 {
        out.set(-k, k as f64 * f.get(k));
        out.set(k, -(k as f64) * f.get(-k));
    }
    out
}

/// `(f * g)(x) = int f(x - y) g(y) dy`, diagonal in the exponential basis.
/// The result has the smaller of the two orders.
pub fn convolve(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let order = f.order().min(g.order());
    let cf = f.to_complex();
    let cg = g.to_complex();
    let c: Vec<Complex64> = (0..=order).map(|k| TAU * cf[k] * cg[k]).collect();
    SpectralField::from_complex(&c)
}

/// `e^{tA} f` with `A e_k = -k^2 e_k`.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::config(format!("heat semigroup time must be nonnegative, got {t}")));
    }
    let mut out = f.clone();
    for (k, c) in f.modes() {
        if c != 0.0 {
            let k2 = (k * k) as f64;
            out.set(k, (-t * k2).exp() * c);
        }
    }
    Ok(out)
}

/// Real-line heat kernel `G_t(x) = exp(-x^2 / 4t) / sqrt(4 pi t)`.
pub fn heat_kernel_line(t: f64, x: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

fn wrapped_sum(x: f64, tol: f64, term: impl Fn(f64) -> f64) -> f64 {
    let mut sum = term(x);
    let mut n = 1.0;
    loop {
        let pair = term(x + TAU * n) + term(x - TAU * n);
        sum += pair;
        // images beyond n = 1 decay monotonically for x in [0, 2 pi)
        if n >= 1.0 && pair.abs() <= tol * sum.abs() {
            break;
        }
        n += 1.0;
    }
    sum
}

/// Periodic heat kernel `sum_n G_t(x + 2 pi n)` on `m` nodes.
pub fn periodic_heat_kernel_on(t: f64, tol: f64, m: usize) -> Result<GridFunction> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::config(format!("heat kernel time must be positive, got {t}")));
    }
    crate::error::require_positive("tol", tol)?;
    GridFunction::from_fn(m, |x| wrapped_sum(x, tol, |y| heat_kernel_line(t, y)))
}

/// Periodic heat kernel on the default 1024-node grid.
pub fn periodic_heat_kernel(t: f64, tol: f64) -> Result<GridFunction> {
    periodic_heat_kernel_on(t, tol, quadrature::DEFAULT_NODES)
}

/// `d/dx G_t^{per}` on `m` nodes, summed image by image.
pub fn periodic_heat_kernel_derivative_on(t: f64, tol: f64, m: usize) -> Result<GridFunction> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::config(format!("heat kernel time must be positive, got {t}")));
    }
    crate::error::require_positive("tol", tol)?;
    GridFunction::from_fn(m, |x| {
        wrapped_sum(x, tol, |y| -y / (2.0 * t) * heat_kernel_line(t, y))
    })
}

/// Discrete `P[z](t) = int_0^t e^{(t-s)A} d/dx z(s) ds` for `z` piecewise
/// constant on the uniform mesh `s_j = j t / n`, `n = z.len()`.
///
/// Each mode is integrated exactly over each step, which avoids the
/// `(t - s)^{-1/2}` endpoint singularity of the operator norm.
pub fn operator_p(z: &[SpectralField], t: f64) -> Result<SpectralField> {
    if z.is_empty() {
        return Err(Error::config("operator P needs a non-empty time mesh"));
    }
    crate::error::require_positive("t", t)?;
    let order = z.iter().map(|f| f.order()).max().unwrap();
    let n = z.len();
    let h = t / n as f64;
    let mut out = SpectralField::zeros(order);
    for (j, zj) in z.iter().enumerate() {
        let dz = derivative(zj);
        let age_end = (t - (j + 1) as f64 * h).max(0.0);
        for (k, c) in dz.modes() {
            if c == 0.0 {
                continue;
            }
            let k2 = (k * k) as f64;
            // int_{s_j}^{s_j + h} exp(-(t - s) k^2) ds
            let w = (-age_end * k2).exp() * (-(-h * k2).exp_m1()) / k2;
            out.set(k, out.get(k) + w * c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(m: usize, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(m, f).unwrap()
    }

    #[test]
    fn basis_projections() {
        let f = to_spectral(&grid(64, |x| x.sin()), 4).unwrap();
        for (k, c) in f.modes() {
            let want = if k == 1 { SQRT_PI } else { 0.0 };
            assert_abs_diff_eq!(c, want, epsilon = 1e-14);
        }
        let f = to_spectral(&grid(64, |_| 1.0), 4).unwrap();
        assert_abs_diff_eq!(f.get(0), SQRT_TAU, epsilon = 1e-14);
        assert_abs_diff_eq!(f.l2_norm(), SQRT_TAU, epsilon = 1e-14);
        let f = to_spectral(&grid(64, |x| (2.0 * x).cos()), 4).unwrap();
        assert_abs_diff_eq!(f.get(-2), SQRT_PI, epsilon = 1e-14);
        assert_abs_diff_eq!(f.l2_norm(), SQRT_PI, epsilon = 1e-14);
    }

    #[test]
    fn synthesis() {
        let f = SpectralField::from_trig(3, 1.0 / TAU, &[], &[]);
        let g = to_grid(&f, 16).unwrap();
        for v in g.values() {
            assert_abs_diff_eq!(*v * TAU, 1.0, epsilon = 1e-14);
        }
        let mut f = SpectralField::zeros(2);
        f.set(1, SQRT_PI);
        f.set(-1, SQRT_PI);
        let g = to_grid(&f, 16).unwrap();
        for (x, v) in g.nodes().zip(g.values()) {
            assert_abs_diff_eq!(*v, x.sin() + x.cos(), epsilon = 1e-14);
        }
        let s3 = grid(32, |x| (3.0 * x).sin());
        let back = to_grid(&to_spectral(&s3, 5).unwrap(), 32).unwrap();
        assert!(back.max_abs_diff(&s3) < 1e-14);
    }

    #[test]
    fn grid_too_small_is_a_config_error() {
        assert!(matches!(to_spectral(&grid(8, |x| x.sin()), 4), Err(Error::Config(_))));
        assert!(matches!(to_grid(&SpectralField::zeros(4), 8), Err(Error::Config(_))));
        assert!(to_spectral(&grid(10, |x| x.sin()), 4).is_ok());
        assert!(GridFunction::new(vec![1.0; 7]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let sin = SpectralField::from_trig(3, 0.0, &[], &[1.0]);
        let cos = SpectralField::from_trig(3, 0.0, &[1.0], &[]);
        assert!(derivative(&sin).l2_distance(&cos) < 1e-15);
        let cos2 = SpectralField::from_trig(3, 0.0, &[0.0, 1.0], &[]);
        let want = SpectralField::from_trig(3, 0.0, &[], &[0.0, -2.0]);
        assert!(derivative(&cos2).l2_distance(&want) < 1e-15);
        let c = SpectralField::from_trig(3, 4.0, &[], &[]);
        assert_eq!(derivative(&c).l2_norm(), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let f = SpectralField::from_trig(5, 0.3, &[0.2, -0.7, 0.1], &[1.1, 0.0, 0.4]);
        let df = derivative(&f);
        let h = 1e-5;
        for x in [0.1, 1.3, 2.9, 5.5] {
            let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(df.eval(x), fd, epsilon = 1e-8);
        }
    }

    #[test]
    fn convolution_with_cosine() {
        let f = SpectralField::from_trig(4, 0.0, &[-1.0], &[]);
        let rho = SpectralField::uniform_density(4);
        assert!(convolve(&f, &rho).l2_norm() < 1e-15);
        // F = -cos, rho = (1 + cos)/(2 pi)  =>  F * rho = -cos(x) / 2
        let rho = SpectralField::from_trig(4, 1.0 / TAU, &[1.0 / TAU], &[]);
        let want = SpectralField::from_trig(4, 0.0, &[-0.5], &[]);
        assert!(convolve(&f, &rho).l2_distance(&want) < 1e-15);
    }

    #[test]
    fn convolution_matches_direct_quadrature() {
        let f = SpectralField::from_trig(4, 0.2, &[0.5, 0.0, -0.3], &[0.0, 0.7]);
        let g = SpectralField::from_trig(4, -0.1, &[0.0, 1.0], &[0.4, 0.0, 0.0, 0.2]);
        let fg = convolve(&f, &g);
        for x in [0.0, 0.7, 3.0, 4.4] {
            let direct = quadrature::trapezoid(256, |y| f.eval(x - y) * g.eval(y));
            assert_abs_diff_eq!(fg.eval(x), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn heat_semigroup_examples() {
        let f = SpectralField::from_trig(4, 0.1, &[0.5], &[0.0, 0.3]);
        assert_eq!(heat_semigroup(&f, 0.0).unwrap(), f);
        let e0 = SpectralField::basis(4, 0);
        assert_eq!(heat_semigroup(&e0, 3.0).unwrap(), e0);
        let e3 = SpectralField::basis(4, 3);
        let out = heat_semigroup(&e3, 0.1).unwrap();
        assert_abs_diff_eq!(out.get(3), (-0.9f64).exp(), epsilon = 1e-16);
        assert!(heat_semigroup(&f, -1e-3).is_err());
    }

    #[test]
    fn heat_kernel_rejects_nonpositive_time() {
        assert!(periodic_heat_kernel(0.0, 1e-12).is_err());
        assert!(periodic_heat_kernel(-1.0, 1e-12).is_err());
    }

    #[test]
    fn operator_p_rejects_empty_mesh() {
        assert!(operator_p(&[], 1.0).is_err());
        let zero = vec![SpectralField::zeros(3); 4];
        assert_eq!(operator_p(&zero, 1.0).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let g = grid(8, |x| x.cos());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert!(back.max_abs_diff(&g) < 1e-15);
    }
}
