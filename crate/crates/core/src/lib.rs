//! Numerical toolkit for quaternionic m-subharmonic functions: the Baston
//! operator on grids and radial profiles, m-Hessian measures, cone tests,
//! relative extremal functions, capacities, energies and a variational
//! solver for `(Δφ)^m ∧ β^{n-m} = μ`.

pub mod calculus;
pub mod cli;
pub mod config;
pub mod energy;
pub mod envelope;
pub mod error;
pub mod exterior;
pub mod hessian;
pub mod io;
pub mod quaternion;

pub use error::{Error, Result};
