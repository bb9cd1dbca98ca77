//! Simulation and verification laboratory for weak convergence of
//! deterministic dynamical systems to decorated alpha-stable Lévy processes.

pub mod error;
pub mod paths;
pub mod metrics;
pub mod stable;
pub mod fprime;
pub mod cusp;
pub mod dynamics;
pub mod harness;

pub use error::{Error, Result};
