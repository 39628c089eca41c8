//! Self-contained special-function and quadrature kernel.
//!
//! Everything the channel formulas need lives here: exponentially scaled
//! modified Bessel functions of the first kind, modified Bessel functions of
//! the second kind of orders zero and one, the generalized Marcum-Q function
//! (both tails), regularized incomplete gamma functions, and fixed-order
//! Gauss-Legendre quadrature. All routines are pure and allocation-free
//! except for quadrature-rule construction, which is cached.

mod bessel;
mod gamma;
mod marcum;
mod quad;

pub use bessel::{bessel_i_scaled, bessel_k, zk1_complement};
pub(crate) use bessel::bessel_i_ratio_log;
pub use gamma::{ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use marcum::{marcum_q, marcum_q_lower};
pub use quad::{gauss_legendre, QuadratureRule};
