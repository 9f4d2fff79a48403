//! Shannon-wavelet inverse Fourier pricing (SWIFT) of European options.
//!
//! A put is priced as `B * sum_k c_{m,k} V_{m,k}` where `c_{m,k}` are the
//! projections of the log-forward density on the sinc wavelets
//! `2^{m/2} sinc(2^m x - k)` and `V_{m,k}` the projections of the payoff.
//! The crate provides every quadrature of those coefficients, the
//! parameter-selection procedures for `(m, kappa, J)`, a COS baseline and
//! an independent reference pricer.

pub mod error;
pub mod exec;
pub mod models;
pub mod density;
pub mod numerics;
pub mod paramselect;
pub mod payoff;
pub mod pricer;
pub mod sincapprox;

pub use error::{Result, SwiftError};
pub use exec::Execution;
