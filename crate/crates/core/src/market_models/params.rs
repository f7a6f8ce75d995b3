use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::stochastic_core::gaussian::rho_bar;

/// `a c / (2 b)`: the largest admissible lower bound for the normalised
/// diffusion coefficient.
pub fn c_min_from_bounds<T: Real>(a: T, b: T, c: T) -> Result<T> {
    if !(a > T::zero() && b >= a && c > T::zero()) {
        return Err(domain(format!("c_min needs 0 < a <= b and c > 0, got a={a} b={b} c={c}")));
    }
    Ok(a * c / (b + b))
}

/// Variance of the Gaussian injected by the second half-step,
/// `c_min^2 (1 - rho^2) h`.
pub fn lambda_of<T: Real>(c_min: T, rho: T, h: T) -> Result<T> {
    if !(c_min > T::zero()) || !(h > T::zero()) {
        return Err(domain(format!("lambda needs c_min > 0 and h > 0, got {c_min}, {h}")));
    }
    let rb = rho_bar(rho)?;
    Ok(c_min * c_min * rb * rb * h)
}

/// Scheme constants derived once per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<T> {
    pub c_min: T,
    pub h: T,
    pub lam: T,
    pub delta: T,
    pub epsilon: Option<T>,
    pub rho: T,
    pub rho_bar: T,
}

impl<T: Real> SchemeParams<T> {
    /// Regularised parameters, `delta` in `(0, 1/2)`.
    pub fn new(c_min: T, rho: T, h: T, delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta < T::of(0.5)) {
            return Err(domain(format!("delta must lie in (0, 1/2), got {delta}")));
        }
        Self::build(c_min, rho, h, delta)
    }

    /// `delta = 0`: the exact conditional expectation, no regularisation.
    pub fn unregularised(c_min: T, rho: T, h: T) -> Result<Self> {
        Self::build(c_min, rho, h, T::zero())
    }

    fn build(c_min: T, rho: T, h: T, delta: T) -> Result<Self> {
        let lam = lambda_of(c_min, rho, h)?;
        Ok(Self {
            c_min,
            h,
            lam,
            delta,
            epsilon: None,
            rho,
            rho_bar: rho_bar(rho)?,
        })
    }

    /// Kernel bandwidth for the Nadaraya-Watson scheme; needs `epsilon <= h`.
    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self> {
        if !(epsilon > T::zero()) {
            return Err(domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if epsilon > self.h {
            return Err(Error::Assumption(format!(
                "kernel bandwidth {epsilon} exceeds the step size {}",
                self.h
            )));
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    /// Bandwidth without the `epsilon <= h` check, for degenerate studies.
    pub fn with_epsilon_unchecked(mut self, epsilon: T) -> Self {
        self.epsilon = Some(epsilon);
        self
    }
}
