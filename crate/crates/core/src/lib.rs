//! Semi-analytic solver for the 2-D exterior Helmholtz problem outside a
//! disc, truncated to an annulus by minimising the radiation functional
//! `∫ |∇u - i k u x/|x||² dx` subject to the Helmholtz equation and the
//! Dirichlet data on the inner circle.
//!
//! - [`cylinder`]: Bessel/Neumann/Hankel evaluation and exact product antiderivatives.
//! - [`quad`]: adaptive Gauss–Kronrod quadrature used as an independent check.
//! - [`spectral`]: Fourier modes, radial mode profiles, gradient products and norms.
//! - [`solver`]: closed-form per-mode minimiser and the exact outgoing field.
//! - [`study`]: convergence sweeps and log-log slope fits.
//! - [`cli`]: configuration files and the `solve`, `sweep` and `probe` commands.

pub mod cli;
pub mod cylinder;
pub mod error;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod study;

pub use error::{Error, Result};
