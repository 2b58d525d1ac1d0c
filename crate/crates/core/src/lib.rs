//! Numerical toolkit for the Harnack order on the operator classes `C_rho`.
//!
//! The central object is the operator kernel
//! `K_z^rho(T) = (I - conj(z) T)^-1 + (I - z T*)^-1 + (rho - 2) I`.
//! A matrix `T` belongs to `C_rho` when `K_z^rho(T)` is positive semidefinite
//! on the unit disk, and `T1` is Harnack dominated by `T0` with constant `c`
//! when `K_z^rho(T1) <= c^2 K_z^rho(T0)` there. Everything in this crate is a
//! finite-dimensional, grid-sampled realization of those two statements.

pub mod config;
pub mod error;
pub mod harnack;
pub mod herglotz;
pub mod kernel;
pub mod linalg;
pub mod radii;
pub mod random;
pub mod repro;
pub mod selftest;
pub mod spectral;

#[cfg(feature = "cli")]
pub mod cli;

mod par;
mod search;

pub use config::Tolerances;
pub use error::{HarnackError, Result};
pub use kernel::{KernelSample, RadialSchedule, TorusGrid};
pub use linalg::{ComplexMatrix, HermitianEigenSystem, SubspaceBasis};
pub use num_complex::Complex64;
