use crate::cond_expectation::sample::WeightedSample;
use crate::cond_expectation::{Estimator, EvalMode};
use crate::error::{domain, Result};
use crate::scalar::Real;

pub const PROBE_POINTS: usize = 10_000;

/// Largest finite-difference slope of `y -> estimate(y)^{-1/2}` over a grid
/// spanning the sample plus three kernel widths on each side.
pub fn lipschitz_probe<T: Real>(
    estimator: &Estimator<T>,
    sample: &WeightedSample<T>,
    j: usize,
) -> Result<T> {
    if !(estimator.delta() > T::zero()) && j > 0 {
        // delta = 0 is only admissible when the estimate is constant
        let first = sample.xi_sq()[0];
        if sample.xi_sq().iter().any(|&v| v != first) {
            return Err(domain("lipschitz_probe needs delta > 0"));
        }
    }
    let (lo, hi) = sample.position_range();
    let reach = T::of(3.0) * estimator.width();
    let a = lo - reach;
    let b = hi + reach;
    let step = (b - a) / T::of_usize(PROBE_POINTS - 1);
    let f = |y: T| -> Result<T> {
        let v = estimator.value(y, sample, j, EvalMode::Windowed)?;
        Ok(T::one() / v.sqrt())
    };
    let mut prev = f(a)?;
    let mut best = T::zero();
    for i in 1..PROBE_POINTS {
        let y = a + step * T::of_usize(i);
        let cur = f(y)?;
        best = best.max((cur - prev).abs() / step);
        prev = cur;
    }
    Ok(best)
}

/// `gamma^{-1/2} lam^{-(1+gamma)/2} delta^{-gamma}` (up to a model constant).
pub fn psi_lipschitz_bound<T: Real>(lam: T, delta: T, gamma: T) -> T {
    gamma.powf(-T::of(0.5)) * lam.powf(-(T::one() + gamma) / T::of(2.0)) * delta.powf(-gamma)
}

/// `sup |K_eps'| / delta`.
pub fn nw_lipschitz_bound<T: Real>(kernel: &crate::cond_expectation::KernelSpec<T>, delta: T) -> T {
    kernel.max_abs_derivative() / delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cond_expectation::KernelSpec;

    #[test]
    fn constant_estimator_has_zero_slope() {
        let s = WeightedSample::new(vec![0.64; 20], (0..20).map(|k| k as f64 * 0.05).collect()).unwrap();
        let est = Estimator::Gaussian { lam: 1e-3, delta: 0.0 };
        assert!(lipschitz_probe(&est, &s, 2).unwrap() < 1e-9);
    }

    #[test]
    fn requires_delta_for_varying_sample() {
        let s = WeightedSample::new(vec![0.5, 2.0], vec![0.0, 0.1]).unwrap();
        let est = Estimator::Kernel {
            kernel: KernelSpec::quartic(0.1).unwrap(),
            delta: 0.0,
        };
        assert!(lipschitz_probe(&est, &s, 1).is_err());
    }
}
