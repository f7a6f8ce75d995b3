//! Particle methods for local stochastic volatility.
//!
//! The engine simulates the calibrated dynamics
//! `dX = sigma(t, X) xi_t / sqrt(E[xi_t^2 | X_t]) dW` with two interacting
//! particle schemes: a half-step Euler scheme whose conditional expectation is
//! an exact Gaussian-mixture ratio, and a classical Euler scheme with a
//! regularised Nadaraya-Watson estimator. An experiment layer measures weak
//! errors against closed-form or high-accuracy references.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment layer
//! and the command line use.

pub mod cond_expectation;
pub mod error;
pub mod experiment;
pub mod market_models;
pub mod particle_schemes;
pub mod scalar;
pub mod stochastic_core;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeGrid = stochastic_core::TimeGrid<f64>;
pub type IncrementBlock = stochastic_core::IncrementBlock<f64>;
pub type LocalVolSpec = market_models::LocalVolSpec<f64>;
pub type StochVolSpec = market_models::StochVolSpec<f64>;
pub type SchemeParams = market_models::SchemeParams<f64>;
pub type WeightedSample = cond_expectation::WeightedSample<f64>;
pub type KernelSpec = cond_expectation::KernelSpec<f64>;
pub type Estimator = cond_expectation::Estimator<f64>;
pub type ParticleState = particle_schemes::ParticleState<f64>;
pub type PathStats = particle_schemes::PathStats<f64>;
pub type SystemConfig = particle_schemes::SystemConfig<f64>;
pub type RunOutput = particle_schemes::RunOutput<f64>;
