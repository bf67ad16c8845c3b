//! Numerical laboratory for rank-N kicked quantum systems.
//!
//! The crate is split the same way the computations are:
//!
//! * [`number_theory`]: exact fractional parts, continued fractions, type
//!   estimates, Weyl sums and extreme discrepancy of `(n^j beta)` sequences.
//! * [`spectral`]: unperturbed spectra, theta sequences, kick states and the
//!   point-mass / secular-equation formulas of the rank-N problem.
//! * [`floquet`]: truncated Floquet matrices, their eigen-decomposition and
//!   Wiener-average dynamics.
//! * [`experiments`]: counting arguments (`J_N(x)` intervals, `S(x)` sets,
//!   lower bounds for `B^{-1}`) and deterministic sweeps.
//! * [`cli`]: the `kicklab` command-line driver.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod floquet;
pub mod number_theory;
pub mod spectral;

pub use error::{Error, Result};
