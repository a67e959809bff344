//! Bracketing root finders shared by the Bessel and stationary modules.

use crate::error::{Error, Result};

/// Outcome of a bisection run.
#[derive(Debug, Clone)]
pub struct Bisection {
    pub root: f64,
    pub iterations: usize,
    /// Bracket width after each iteration, starting with the initial one.
    pub widths: Vec<f64>,
}

/// Bisection on `[a, b]` until the bracket is narrower than `2 tol`.
///
/// Fails if `f(a)` and `f(b)` have the same strict sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Result<Bisection> {
    crate::error::require_positive("tol", tol)?;
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Bisection { root: a, iterations: 0, widths: vec![b - a] });
    }
    if fb == 0.0 {
        return Ok(Bisection { root: b, iterations: 0, widths: vec![b - a] });
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::numerical(format!(
            "no sign change on [{a}, {b}]: f(a) = {fa}, f(b) = {fb}"
        )));
    }
    let mut widths = vec![b - a];
    let mut iterations = 0;
    while (b - a) > 2.0 * tol && iterations < 200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::numerical(format!("non-finite value at {mid}")));
        }
        if fm == 0.0 {
            a = mid;
            b = mid;
        } else if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        iterations += 1;
        widths.push(b - a);
    }
    Ok(Bisection { root: 0.5 * (a + b), iterations, widths })
}

/// Sign-change brackets of `f` on the uniform partition of `[a, b]` into
/// `n` cells. Exact zeros at interior nodes produce a degenerate bracket.
pub fn scan_brackets(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let (y0, y1) = (ys[i], ys[i + 1]);
        if y0 == 0.0 && i > 0 {
            out.push((xs[i], xs[i]));
        } else if y0 != 0.0 && y1 != 0.0 && y0.signum() != y1.signum() {
            out.push((xs[i], xs[i + 1]));
        }
    }
    if ys[n] == 0.0 {
        out.push((xs[n], xs[n]));
    }
    out
}
