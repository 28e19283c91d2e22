//! Lorentz-invariant de Broglie-Bohm trajectories for multi-time
//! Klein-Gordon wave functions.
//!
//! Each particle's four-velocity is the future-pointing timelike
//! eigenvector of its own stress-energy-momentum tensor, and particles are
//! advanced together by equal proper-time steps along their local light
//! cones. Because the coordination rule only uses proper time, trajectories
//! computed in any inertial frame are Lorentz transforms of one another.

pub mod cli;
pub mod config;
pub mod covariance;
pub mod error;
pub mod integrator;
pub mod minkowski;
pub mod output;
pub mod stress_energy;
pub mod wavefield;

pub use error::PhysicsError;
