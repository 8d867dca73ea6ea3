//! Time integration for the linear Klein--Gordon equation
//! `psi_tt = Delta psi + m(x,t) psi` on a periodic 1-D domain, where the
//! coefficient `m` is a sum of modulated envelopes `a_n(x,t) e^{i omega_n t}`
//! whose frequencies `omega_n` may be very large.
//!
//! The main scheme advances the exact free flow `R(h)` and closes the
//! variation-of-constants integrals with a Filon-type rule built on the
//! closed-form oscillatory moments `int tau^{j-1} e^{i omega tau} dtau`.
//! The resulting method is third-order in the step size with an error
//! constant that does not grow with the largest frequency, so large steps
//! remain usable in strongly oscillatory regimes.
//!
//! Module map:
//! - [`spectral`]: periodic Fourier collocation grid and the diagonal
//!   operator functions `cos(tG)`, `t sinc(tG)`, `G sin(tG)` with `G^2 = -Delta`.
//! - [`mass`]: the modulated-envelope representation of `m(x,t)` and the
//!   built-in experiment presets.
//! - [`filon`]: oscillatory moments and the Filon assembly of the two
//!   Duhamel integrals, plus Gauss-Legendre baselines.
//! - [`stepper`]: the third-order time stepper.
//! - [`reference`]: Runge-Kutta baselines, the constant-mass closed form,
//!   and fine-step reference solutions with an independent cross-check.
//! - [`harness`]: convergence and frequency sweeps with CSV output.

pub mod error;
pub mod filon;
pub mod harness;
pub mod mass;
pub mod reference;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use mass::{MassModel, MassTerm};
pub use spectral::{FieldState, OperatorKind, SpectralGrid};
pub use stepper::{Quadrature, Stepper, StepperConfig};
