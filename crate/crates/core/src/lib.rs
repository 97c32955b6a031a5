//! Bootstrap percolation on the stochastic block model.
//!
//! The crate has two halves that are meant to be checked against each other:
//!
//! * a simulator ([`sbm`], [`percolation`]) that samples finite SBM instances
//!   and runs the one-node-per-step exploration chain on them, and
//! * an analytical side ([`fluid`], [`classifier`], [`critical`]) that computes
//!   the fluid-limit predictions: the drift functions `rho`, the trajectory of
//!   `x' = rho(x)`, the Perron-Frobenius eigenpair of the Jacobian, and the
//!   critical surface in seed space.
//!
//! [`experiment`] glues both halves into reproducible Monte Carlo sweeps.

pub mod classifier;
pub mod critical;
pub mod error;
pub mod experiment;
pub mod fluid;
pub mod linalg;
pub mod percolation;
pub mod rng;
pub mod sbm;

pub use error::{Error, Result};
