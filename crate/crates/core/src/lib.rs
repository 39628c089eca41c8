//! Operational diversity order (ODO) toolkit for fading channels.
//!
//! The ODO is the local log-log decay slope of the outage probability at a
//! finite operating SNR: where the classical diversity order only describes
//! the asymptotic tail, the ODO answers "how much does one more dB buy me
//! *here*". This crate provides
//!
//! - [`specfun`]: the self-contained special-function kernel (scaled modified
//!   Bessel functions, generalized Marcum-Q, Gauss-Legendre quadrature),
//! - [`channels`]: normalized fading-gain distributions (Rayleigh, Rician,
//!   TWDP, cascaded Rayleigh) with SC/MRC diversity wrappers and seeded
//!   samplers,
//! - [`engine`]: the analytic ODO for any distribution plus the closed forms,
//!   tangent-line outage approximations and power-budget helpers,
//! - [`montecarlo`]: model-agnostic empirical ODO estimators with bootstrap
//!   confidence intervals.
//!
//! All analytic operations are pure functions and safe to call concurrently.

pub mod channels;
pub mod engine;
mod error;
pub mod montecarlo;
pub mod specfun;

pub use error::OdoError;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, OdoError>;
