//! Closed-form Taylor-Fourier approximations for highly oscillatory ODEs.
//!
//! Systems of the form `x' = ωAx + g(x)` are rewritten with `x = e^{tωA} y` as
//! `y' = f(ωt, y)`, where `f(θ, y) = e^{-θA} g(e^{θA} y)` is `2π`-periodic in `θ`.
//! The solver builds an approximation
//!
//! ```text
//! y(t) ≈ t^{d+1} y_{0,d+1} + Σ_{k=-M}^{M} e^{ikωt} Σ_{j=0}^{d} t^j y_{k,j}
//! ```
//!
//! by Picard-like passes that combine truncated power series arithmetic
//! ([`tps`]) with FFT-based trigonometric interpolation ([`fourier`]).
//! Once computed, the coefficients ([`TfCoefficients`]) can be evaluated at any
//! time with accuracy that does not degrade as `ω` grows.
//!
//! Besides the solver ([`tfcore`]) the crate ships the built-in problems
//! ([`problems`]), the stroboscopic averaging maps ([`averaging`]) and an
//! adaptive Runge-Kutta oracle used to measure errors ([`reference`]).
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. The `parallel` feature spreads each pass over a rayon pool.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod averaging;
pub mod codec;
mod error;
pub mod fourier;
mod math;
pub mod problems;
pub mod reference;
pub mod tfcore;
pub mod tps;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tfcore::{OscillatoryField, TfCoefficients, TfConfig};
pub use tps::TruncSeries;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
