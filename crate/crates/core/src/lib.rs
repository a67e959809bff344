//! Numerical toolkit for the McKean-Vlasov equation on the torus with a
//! double-well confinement `V(x) = cos 2x` and Kuramoto-type interaction
//! `F(x) = -cos x`.
//!
//! The crate covers three descriptions of the same dynamics and the
//! stationary theory that ties them together:
//!
//! * [`stationary`]: Boltzmann fixed points `(m1, m2)`, the auxiliary maps
//!   used to count them, series and Laplace expansions, and the phase
//!   diagram in the diffusion strength `sigma`.
//! * [`bessel`]: the Bessel-type integrals and the critical function `f_c`
//!   whose root is the critical noise `sigma_c`.
//! * [`pde`] / [`spde`]: spectral exponential-Euler integrators for the
//!   deterministic equation and its additive-noise stochastic version.
//! * [`particles`]: the interacting N-particle system.
//!
//! [`fourier`] provides the shared spectral representation.

pub mod bessel;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod particles;
pub mod pde;
pub mod quadrature;
pub mod roots;
pub mod spde;
pub mod stationary;

pub use error::{Error, Result};
pub use fourier::{GridFunction, SpectralField};
pub use stationary::MomentPair;
