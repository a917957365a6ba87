//! Autocorrelation-based Hilbert-Schmidt operators of time series and the
//! convergence of their spectra to Koopman mode energies.
//!
//! The pipeline runs signal → lagged moments → Nystrom kernel → spectrum:
//!
//! - [`signal`]: synthetic series with a known Koopman decomposition.
//! - [`autocorr`]: empirical and analytic lagged moments `rho(s)`.
//! - [`operator`]: the Toeplitz kernel of `A_tau` and its eigenpairs.
//! - [`koopman`]: closed-form Gram oracles, Fourier-atom alignment, aliasing.
//! - [`convergence`]: window sweeps, decay fits and bound checks.
//! - [`cli`]: the command-line front end.

pub mod autocorr;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod koopman;
pub mod operator;
pub mod signal;

pub use error::{Error, Result};
