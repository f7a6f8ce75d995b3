//! Estimators of the conditional second moment `E[xi^2 | X = y]`.
//!
//! Two estimators share one interface: the Gaussian-mixture ratio used by the
//! half-step scheme (exact for the half-step law when `delta = 0`) and the
//! regularised Nadaraya-Watson kernel ratio. Both read an immutable
//! [`WeightedSample`] snapshot.

pub mod gaussian_mixture;
pub mod kernel;
pub mod lipschitz;
pub mod nadaraya_watson;
pub mod oracle;
pub mod sample;

pub use gaussian_mixture::{psi, psi_inverse_sqrt};
pub use kernel::{KernelFn, KernelShape, KernelSpec};
pub use lipschitz::{lipschitz_probe, nw_lipschitz_bound, psi_lipschitz_bound};
pub use nadaraya_watson::nw_estimate;
pub use oracle::cond_exp_oracle;
pub use sample::WeightedSample;

use crate::error::Result;
use crate::scalar::Real;

/// Summation strategy for estimator queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Sorted atoms, only those that can contribute.
    #[default]
    Windowed,
    /// Every atom, in input order.
    Naive,
}

#[derive(Debug, Clone)]
pub enum Estimator<T> {
    Gaussian { lam: T, delta: T },
    Kernel { kernel: KernelSpec<T>, delta: T },
}

impl<T: Real> Estimator<T> {
    pub fn delta(&self) -> T {
        match self {
            Estimator::Gaussian { delta, .. } | Estimator::Kernel { delta, .. } => *delta,
        }
    }

    /// Natural length scale: `sqrt(lam)` or the bandwidth.
    pub fn width(&self) -> T {
        match self {
            Estimator::Gaussian { lam, .. } => lam.sqrt(),
            Estimator::Kernel { kernel, .. } => kernel.epsilon(),
        }
    }

    pub fn value(&self, y: T, sample: &WeightedSample<T>, j: usize, mode: EvalMode) -> Result<T> {
        match self {
            Estimator::Gaussian { lam, delta } => psi(y, sample, *lam, *delta, j, mode),
            Estimator::Kernel { kernel, delta } => nw_estimate(y, sample, kernel, *delta, j, mode),
        }
    }
}
