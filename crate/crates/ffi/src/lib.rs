//! C ABI over `mckv`. Every entry point returns an [`MckvStatus`]; on
//! failure the message is available from [`mckv_last_error_message`].
//! Objects are opaque handles created by `*_new` and released by `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mckv::particles::{ParticleConfig, ParticleEnsemble};
use mckv::pde::{Integrator, PdeConfig, PdeState};
use mckv::spde::{CovarianceSpec, SpdeConfig, SpdeSolver, SpdeState};
use mckv::{Error, GridFunction, SpectralField};

/// Result codes of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MckvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: Error) -> MckvStatus {
    set_error(&e.to_string());
    if e.is_config() {
        MckvStatus::InvalidArgument
    } else {
        MckvStatus::Numerical
    }
}

fn guard(f: impl FnOnce() -> MckvStatus) -> MckvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == MckvStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => {
            set_error("internal panic");
            MckvStatus::Panic
        }
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

macro_rules! deref_mut {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return MckvStatus::NullPointer;
            }
        }
    };
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => {
                set_error(concat!("null pointer: ", stringify!($p)));
                return MckvStatus::NullPointer;
            }
        }
    };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns its full length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mckv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Critical diffusion `sigma_c` and `f_c(sigma_c)`.
///
/// # Safety
/// Output pointers must be valid or null (null is reported).
#[no_mangle]
pub unsafe extern "C" fn mckv_sigma_c(tol: f64, out_sigma_c: *mut f64, out_residual: *mut f64) -> MckvStatus {
    guard(|| {
        let s = deref_mut!(out_sigma_c);
        let r = deref_mut!(out_residual);
        let res = try_ffi!(mckv::bessel::find_sigma_c(tol));
        *s = res.sigma_c;
        *r = res.residual;
        MckvStatus::Ok
    })
}

/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_f_c(sigma: f64, out: *mut f64) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        *o = try_ffi!(mckv::bessel::f_c(sigma));
        MckvStatus::Ok
    })
}

/// `int_T cos(2 n x) exp(z cos 2x) dx`.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_bessel_i(n: u32, z: f64, out: *mut f64) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        *o = try_ffi!(mckv::bessel::bessel_i(n, z));
        MckvStatus::Ok
    })
}

/// Stationary solutions `(m1, m2)` at one `sigma`.
pub struct MckvFixedPoints {
    points: Vec<(f64, f64)>,
}

/// # Safety
/// `out` must be valid or null; the handle is released with
/// [`mckv_fixed_points_free`].
#[no_mangle]
pub unsafe extern "C" fn mckv_fixed_points_new(sigma: f64, tol: f64, out: *mut *mut MckvFixedPoints) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        let r = try_ffi!(mckv::stationary::find_fixed_points(sigma, tol));
        let points = r.solutions.iter().map(|m| (m.m1, m.m2)).collect();
        *o = Box::into_raw(Box::new(MckvFixedPoints { points }));
        MckvStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_fixed_points_count(fp: *const MckvFixedPoints, out: *mut usize) -> MckvStatus {
    guard(|| {
        let fp = deref!(fp);
        *deref_mut!(out) = fp.points.len();
        MckvStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_fixed_points_get(fp: *const MckvFixedPoints, i: usize, m1: *mut f64, m2: *mut f64) -> MckvStatus {
    guard(|| {
        let fp = deref!(fp);
        let a = deref_mut!(m1);
        let b = deref_mut!(m2);
        match fp.points.get(i) {
            Some(&(x, y)) => {
                *a = x;
                *b = y;
                MckvStatus::Ok
            }
            None => fail(Error::Config(format!("index {i} out of range"))),
        }
    })
}

/// # Safety
/// `fp` must come from [`mckv_fixed_points_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mckv_fixed_points_free(fp: *mut MckvFixedPoints) {
    if !fp.is_null() {
        drop(Box::from_raw(fp));
    }
}

/// Deterministic PDE state with its integrator.
pub struct MckvPde {
    integ: Integrator,
    state: PdeState,
    order: usize,
}

/// Creates a PDE integrator at truncation `order` started from the uniform
/// density. Other parameters take the library defaults.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_new(sigma: f64, order: usize, dt: f64, out: *mut *mut MckvPde) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        let cfg = PdeConfig { dt, ..PdeConfig::new(sigma).with_order(order) };
        let cfg = PdeConfig { v: mckv::pde::default_v(order), f: mckv::pde::default_f(order), ..cfg };
        let integ = try_ffi!(Integrator::new(&cfg));
        let state = PdeState { rho: SpectralField::uniform_density(order), t: 0.0 };
        *o = Box::into_raw(Box::new(MckvPde { integ, state, order }));
        MckvStatus::Ok
    })
}

/// # Safety
/// `pde` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_set_uniform(pde: *mut MckvPde) -> MckvStatus {
    guard(|| {
        let p = deref_mut!(pde);
        p.state = PdeState { rho: SpectralField::uniform_density(p.order), t: 0.0 };
        MckvStatus::Ok
    })
}

/// Replaces the state by grid samples on `len` equispaced nodes, normalized
/// to unit mass, and resets the time.
///
/// # Safety
/// `values` must be valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_set_density(pde: *mut MckvPde, values: *const f64, len: usize) -> MckvStatus {
    guard(|| {
        let p = deref_mut!(pde);
        if values.is_null() {
            set_error("null pointer: values");
            return MckvStatus::NullPointer;
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let g = try_ffi!(GridFunction::new(v));
        let mass = g.integral();
        if !(mass > 0.0 && mass.is_finite()) {
            return fail(Error::Config("density must have positive finite mass".into()));
        }
        let mut rho = try_ffi!(mckv::fourier::to_spectral(&g, p.order));
        rho = rho.scaled(1.0 / mass);
        p.state = PdeState { rho, t: 0.0 };
        MckvStatus::Ok
    })
}

/// # Safety
/// `pde` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_advance(pde: *mut MckvPde, steps: usize) -> MckvStatus {
    guard(|| {
        let p = deref_mut!(pde);
        for _ in 0..steps {
            p.state = try_ffi!(p.integ.step(&p.state));
        }
        MckvStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_moments(pde: *const MckvPde, t: *mut f64, m1: *mut f64, m2: *mut f64, mass: *mut f64) -> MckvStatus {
    guard(|| {
        let p = deref!(pde);
        *deref_mut!(t) = p.state.t;
        *deref_mut!(m1) = p.state.rho.cos_moment();
        *deref_mut!(m2) = p.state.rho.sin_moment();
        *deref_mut!(mass) = p.state.rho.mass();
        MckvStatus::Ok
    })
}

/// Evaluates the density on `len` equispaced nodes; `len` must be even
/// and at least `2 order + 2`.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_grid(pde: *const MckvPde, out: *mut f64, len: usize) -> MckvStatus {
    guard(|| {
        let p = deref!(pde);
        if out.is_null() {
            set_error("null pointer: out");
            return MckvStatus::NullPointer;
        }
        let g = try_ffi!(mckv::fourier::to_grid(&p.state.rho, len));
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(g.values());
        MckvStatus::Ok
    })
}

/// # Safety
/// `pde` must come from [`mckv_pde_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mckv_pde_free(pde: *mut MckvPde) {
    if !pde.is_null() {
        drop(Box::from_raw(pde));
    }
}

/// Stochastic equation with power-law covariance.
pub struct MckvSpde {
    solver: SpdeSolver,
    state: SpdeState,
}

/// Creates an SPDE solver with `lambda_k^2 = c (1 + k^2)^{-gamma}`, started
/// from the uniform density.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_spde_new(
    sigma: f64,
    order: usize,
    dt: f64,
    gamma: f64,
    c: f64,
    seed: u64,
    out: *mut *mut MckvSpde,
) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        let pcfg = PdeConfig { dt, ..PdeConfig::new(sigma).with_order(order) };
        let pcfg = PdeConfig { v: mckv::pde::default_v(order), f: mckv::pde::default_f(order), ..pcfg };
        let q = try_ffi!(CovarianceSpec::power_law(order, c, gamma));
        let solver = try_ffi!(SpdeSolver::new(&SpdeConfig::new(pcfg, q, seed)));
        let state = SpdeState::new(SpectralField::uniform_density(order));
        *o = Box::into_raw(Box::new(MckvSpde { solver, state }));
        MckvStatus::Ok
    })
}

/// # Safety
/// `spde` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_spde_advance(spde: *mut MckvSpde, steps: usize) -> MckvStatus {
    guard(|| {
        let s = deref_mut!(spde);
        for _ in 0..steps {
            s.state = try_ffi!(s.solver.step(&s.state));
        }
        MckvStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_spde_moments(spde: *const MckvSpde, t: *mut f64, m1: *mut f64, m2: *mut f64, mass: *mut f64) -> MckvStatus {
    guard(|| {
        let s = deref!(spde);
        *deref_mut!(t) = s.state.t;
        *deref_mut!(m1) = s.state.u.cos_moment();
        *deref_mut!(m2) = s.state.u.sin_moment();
        *deref_mut!(mass) = s.state.u.mass();
        MckvStatus::Ok
    })
}

/// # Safety
/// `spde` must come from [`mckv_spde_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mckv_spde_free(spde: *mut MckvSpde) {
    if !spde.is_null() {
        drop(Box::from_raw(spde));
    }
}

/// Particle ensemble with its step configuration.
pub struct MckvParticles {
    ens: ParticleEnsemble,
    cfg: ParticleConfig,
}

/// `n` particles drawn uniformly on the torus.
///
/// # Safety
/// `out` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_particles_new(n: usize, sigma: f64, dt: f64, seed: u64, out: *mut *mut MckvParticles) -> MckvStatus {
    guard(|| {
        let o = deref_mut!(out);
        let cfg = ParticleConfig { dt, ..ParticleConfig::new(sigma) };
        try_ffi!(cfg.validate());
        let ens = try_ffi!(ParticleEnsemble::sample(&mckv::pde::InitSpec::Uniform, n, sigma, seed));
        *o = Box::into_raw(Box::new(MckvParticles { ens, cfg }));
        MckvStatus::Ok
    })
}

/// # Safety
/// `p` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_particles_advance(p: *mut MckvParticles, steps: usize) -> MckvStatus {
    guard(|| {
        let p = deref_mut!(p);
        for _ in 0..steps {
            p.ens.em_step(&p.cfg);
        }
        MckvStatus::Ok
    })
}

/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn mckv_particles_moments(p: *const MckvParticles, m1: *mut f64, m2: *mut f64) -> MckvStatus {
    guard(|| {
        let p = deref!(p);
        let m = p.ens.moments();
        *deref_mut!(m1) = m.m1;
        *deref_mut!(m2) = m.m2;
        MckvStatus::Ok
    })
}

/// Copies positions into `out`, which must hold exactly the ensemble size.
///
/// # Safety
/// `out` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mckv_particles_positions(p: *const MckvParticles, out: *mut f64, len: usize) -> MckvStatus {
    guard(|| {
        let p = deref!(p);
        if out.is_null() {
            set_error("null pointer: out");
            return MckvStatus::NullPointer;
        }
        if len != p.ens.len() {
            return fail(Error::Config(format!("buffer holds {len} values, ensemble has {}", p.ens.len())));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(p.ens.positions());
        MckvStatus::Ok
    })
}

/// # Safety
/// `p` must come from [`mckv_particles_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mckv_particles_free(p: *mut MckvParticles) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
