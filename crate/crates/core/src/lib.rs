//! Stochastic Allen–Cahn simulation on `[0, π]` with Dirichlet boundary
//! conditions, together with a computable bound on the conditional
//! mean-square error of each simulated trajectory.
//!
//! The equation `du = (Au - u³) dt + dW` is discretized with a spectral
//! Galerkin method on the sine basis and an exponential Euler step. While a
//! trajectory runs, [`residual::ResidualState`] and
//! [`certify::CertificateState`] accumulate the terms of the bound in a
//! single pass with memory independent of the number of steps.

pub mod certify;
pub mod config;
pub mod error;
pub mod noise;
pub mod normal;
pub mod report;
pub mod residual;
pub mod scheme;
pub mod selftest;
pub mod simulation;
pub mod spectral;

pub use config::{AlphaSpec, BoundOptions, RunConfig, SimConfig};
pub use error::{Error, Result};
pub use spectral::SpectralField;
