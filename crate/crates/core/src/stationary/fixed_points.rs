use log::{debug, warn};
use serde::Serialize;

use super::{map_g, xi, zeta, zeta_prime_at_zero, MomentPair};
use crate::bessel;
use crate::error::{require_positive, Error, Result};
use crate::roots;

/// Knobs of [`find_fixed_points_with`].
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Maximum accepted `||g(m) - m||` for a reported solution.
    pub residual_tol: f64,
    /// Uniform cells used to bracket roots on `(0, 1]`.
    pub scan_cells: usize,
    pub bisection_tol: f64,
    /// Roots closer than this are merged.
    pub merge_distance: f64,
    /// Multistart Newton grid is `newton_grid x newton_grid` over `[-1, 1]^2`.
    pub newton_grid: usize,
    pub newton_fd_step: f64,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
    /// `|m1 m2|` above which a Newton limit counts as off-axis.
    pub axis_tol: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            residual_tol: 1e-8,
            scan_cells: 200,
            bisection_tol: 1e-10,
            merge_distance: 1e-6,
            newton_grid: 5,
            newton_fd_step: 1e-6,
            newton_max_iter: 100,
            newton_tol: 1e-12,
            axis_tol: 1e-8,
        }
    }
}

/// Multistart Newton cross-check of the axis scans.
#[derive(Debug, Clone, Serialize, Default)]
pub struct NewtonSummary {
    pub starts: usize,
    pub converged: usize,
    pub failed: usize,
    /// Converged limits with `|m1 m2|` above the axis tolerance.
    pub off_axis: usize,
    /// Converged limits that match no axis-scan solution.
    pub unmatched: usize,
    pub points: Vec<MomentPair>,
}

/// All fixed points of `g_sigma` found for one `sigma`.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub sigma: f64,
    pub solutions: Vec<MomentPair>,
    pub count: usize,
    /// `||g(m) - m||` for each solution.
    pub residuals: Vec<f64>,
    /// Positive root of `zeta_sigma` on `(0, 1]`, if any.
    pub m_star: Option<f64>,
    /// Sign changes of `zeta_sigma` on `[1, 1.5]`; expected to be zero.
    pub roots_beyond_one: usize,
    pub newton: NewtonSummary,
}

impl FixedPointReport {
    pub fn nontrivial(&self) -> impl Iterator<Item = &MomentPair> {
        self.solutions.iter().filter(|m| m.magnitude() > 0.0)
    }
}

fn residual(sigma: f64, m: MomentPair) -> Result<f64> {
    let g = map_g(sigma, m)?;
    Ok(g.distance(&m))
}

/// Positive zeros of `f` on `(0, 1]`.
fn axis_roots(
    f: impl Fn(f64) -> Result<f64>,
    cfg: &FixedPointConfig,
    lo: f64,
    hi: f64,
) -> Result<Vec<f64>> {
    let mut failure = None;
    let eval = |m: f64| match f(m) {
        Ok(v) => v,
        Err(e) => {
            debug!("evaluation failed at m = {m}: {e}");
            f64::NAN
        }
    };
    let brackets = roots::scan_brackets(eval, lo, hi, cfg.scan_cells);
    let mut out = Vec::new();
    for (a, b) in brackets {
        if a == b {
            out.push(a);
            continue;
        }
        match roots::bisect(|m| f(m).unwrap_or(f64::NAN), a, b, cfg.bisection_tol) {
            Ok(r) => out.push(r.root),
            Err(e) => failure = Some(e),
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(out)
}

fn push_merged(list: &mut Vec<MomentPair>, m: MomentPair, dist: f64) -> bool {
    if list.iter().any(|p| p.distance(&m) < dist) {
        false
    } else {
        list.push(m);
        true
    }
}

fn newton(sigma: f64, start: MomentPair, cfg: &FixedPointConfig) -> Result<Option<MomentPair>> {
    let f = |m: MomentPair| -> Result<(f64, f64)> {
        let g = map_g(sigma, m)?;
        Ok((g.m1 - m.m1, g.m2 - m.m2))
    };
    let norm = |v: (f64, f64)| v.0.hypot(v.1);
    let h = cfg.newton_fd_step;
    let mut m = start;
    let mut fm = f(m)?;
    for _ in 0..cfg.newton_max_iter {
        if norm(fm) <= cfg.newton_tol {
            return Ok(Some(m));
        }
        let d1p = f(MomentPair::new(m.m1 + h, m.m2))?;
        let d1m = f(MomentPair::new(m.m1 - h, m.m2))?;
        let d2p = f(MomentPair::new(m.m1, m.m2 + h))?;
        let d2m = f(MomentPair::new(m.m1, m.m2 - h))?;
        let j11 = (d1p.0 - d1m.0) / (2.0 * h);
        let j21 = (d1p.1 - d1m.1) / (2.0 * h);
        let j12 = (d2p.0 - d2m.0) / (2.0 * h);
        let j22 = (d2p.1 - d2m.1) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return Ok(None);
        }
        let dx = -(j22 * fm.0 - j12 * fm.1) / det;
        let dy = -(-j21 * fm.0 + j11 * fm.1) / det;
        let mut lambda = 1.0;
        loop {
            let trial = MomentPair::new(m.m1 + lambda * dx, m.m2 + lambda * dy);
            let ft = f(trial)?;
            if norm(ft) < norm(fm) {
                m = trial;
                fm = ft;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Ok((norm(fm) <= cfg.newton_tol.sqrt()).then_some(m));
            }
        }
    }
    Ok((norm(fm) <= cfg.newton_tol).then_some(m))
}

/// Fixed points of `g_sigma` with the default [`FixedPointConfig`] and the
/// given residual tolerance.
pub fn find_fixed_points(sigma: f64, tol: f64) -> Result<FixedPointReport> {
    let cfg = FixedPointConfig { residual_tol: tol, ..FixedPointConfig::default() };
    find_fixed_points_with(sigma, &cfg)
}

/// Scans `zeta_sigma` and `xi_sigma` on `(0, 1]` for the axis fixed points,
/// verifies each against `g_sigma`, and cross-checks with multistart Newton
/// in the plane.
pub fn find_fixed_points_with(sigma: f64, cfg: &FixedPointConfig) -> Result<FixedPointReport> {
    require_positive("sigma", sigma)?;
    require_positive("residual tolerance", cfg.residual_tol)?;
    let mut solutions = vec![MomentPair::ORIGIN];

    let lo = 1.0 / cfg.scan_cells as f64;
    let m2_roots = axis_roots(|m| zeta(sigma, m), cfg, lo, 1.0)?;
    let m_star = m2_roots.iter().cloned().fold(None, |acc: Option<f64>, r| match acc {
        Some(a) if a >= r => Some(a),
        _ => Some(r),
    });
    for r in &m2_roots {
        push_merged(&mut solutions, MomentPair::new(0.0, *r), cfg.merge_distance);
        push_merged(&mut solutions, MomentPair::new(0.0, -r), cfg.merge_distance);
    }
    let m1_roots = axis_roots(|m| xi(sigma, m), cfg, lo, 1.0)?;
    for r in &m1_roots {
        push_merged(&mut solutions, MomentPair::new(*r, 0.0), cfg.merge_distance);
        push_merged(&mut solutions, MomentPair::new(-r, 0.0), cfg.merge_distance);
    }
    let roots_beyond_one = axis_roots(|m| zeta(sigma, m), cfg, 1.0, 1.5)?.len();

    let mut residuals = Vec::with_capacity(solutions.len());
    for m in &solutions {
        let r = residual(sigma, *m)?;
        if r > cfg.residual_tol {
            return Err(Error::numerical(format!(
                "candidate ({}, {}) at sigma = {sigma} has residual {r:e} > {:e}",
                m.m1, m.m2, cfg.residual_tol
            )));
        }
        residuals.push(r);
    }

    let mut summary = NewtonSummary::default();
    let n = cfg.newton_grid;
    for i in 0..n {
        for j in 0..n {
            let t = |i: usize| if n == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 };
            let start = MomentPair::new(t(i), t(j));
            summary.starts += 1;
            match newton(sigma, start, cfg)? {
                Some(p) => {
                    summary.converged += 1;
                    if (p.m1 * p.m2).abs() > cfg.axis_tol {
                        warn!("Newton converged off-axis at ({}, {}) for sigma = {sigma}", p.m1, p.m2);
                        summary.off_axis += 1;
                    }
                    if !solutions.iter().any(|s| s.distance(&p) < cfg.merge_distance) {
                        summary.unmatched += 1;
                    }
                    push_merged(&mut summary.points, p, cfg.merge_distance);
                }
                None => {
                    debug!("Newton did not converge from ({}, {}) at sigma = {sigma}", start.m1, start.m2);
                    summary.failed += 1;
                }
            }
        }
    }
    if summary.failed > 0 {
        log::info!("{} of {} Newton starts failed at sigma = {sigma}", summary.failed, summary.starts);
    }

    Ok(FixedPointReport {
        sigma,
        count: solutions.len(),
        solutions,
        residuals,
        m_star,
        roots_beyond_one,
        newton: summary,
    })
}

/// One row of the phase diagram.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub sigma: f64,
    pub count: usize,
    /// Positive `M2`-axis solution, or 0 when only the origin exists.
    pub m_star: f64,
    pub zeta_prime0: f64,
    pub f_c: f64,
}

/// Phase-diagram rows for each `sigma`; skips the Newton cross-check.
pub fn phase_scan(sigmas: &[f64]) -> Result<Vec<PhaseRow>> {
    let cfg = FixedPointConfig { newton_grid: 0, ..FixedPointConfig::default() };
    sigmas
        .iter()
        .map(|&sigma| {
            let report = find_fixed_points_with(sigma, &cfg)?;
            Ok(PhaseRow {
                sigma,
                count: report.count,
                m_star: report.m_star.unwrap_or(0.0),
                zeta_prime0: zeta_prime_at_zero(sigma)?,
                f_c: bessel::f_c(sigma)?,
            })
        })
        .collect()
}
