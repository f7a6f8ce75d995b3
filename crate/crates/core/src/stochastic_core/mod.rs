//! Random streams, Brownian and fractional paths, Gaussian densities.

pub mod fbm;
pub mod gaussian;
pub mod grid;
pub mod rng;

pub use fbm::{rl_fbm_path, rl_normalisation, RlFbm};
pub use gaussian::{correlate, gaussian_pdf, log_gaussian_pdf, rho_bar};
pub use grid::{draw_increments, IncrementBlock, NoiseKind, NoiseSource, TimeGrid};
pub use rng::{derive_seed, philox4x32_10, standard_normal, NoiseLabel, RandomStreamSpec};
