//! Conditional second moment of `xi` given `X_prev + sqrt(lam) G = y`.
//!
//! With `d_k = y - x_k` the estimate is the regularised ratio
//! `(mean(xi_k^2 phi(d_k)) + delta) / (mean(phi(d_k)) + delta)` with
//! `phi` the centred Gaussian density of variance `lam`. Weights are formed
//! relative to the nearest atom so nothing underflows before the ratio.

use crate::cond_expectation::sample::WeightedSample;
use crate::cond_expectation::EvalMode;
use crate::error::{domain, Error, Result};
use crate::scalar::{pairwise_sum2_by, Real};
use crate::stochastic_core::gaussian::log_gaussian_pdf_unchecked;

/// Atoms whose log-weight trails the nearest atom by more than this are
/// skipped; `exp(-40)` is below double precision relative to the sum.
pub const WINDOW_LOG_CUTOFF: f64 = 40.0;

/// `Psi_j(y)`; for `j = 0` the mean of `xi^2`, independent of `y`.
pub fn psi<T: Real>(
    y: T,
    sample: &WeightedSample<T>,
    lam: T,
    delta: T,
    j: usize,
    mode: EvalMode,
) -> Result<T> {
    if !(lam > T::zero()) {
        return Err(domain(format!("psi needs lam > 0, got {lam}")));
    }
    if !(delta >= T::zero()) {
        return Err(domain(format!("psi needs delta >= 0, got {delta}")));
    }
    if j == 0 {
        return Ok(sample.mean_xi_sq());
    }
    let two_lam = lam + lam;
    let d_min = sample.nearest_distance(y);
    let d_min_sq = d_min * d_min;
    let (s1, s0) = match mode {
        EvalMode::Windowed => {
            let radius = (d_min_sq + two_lam * T::of(WINDOW_LOG_CUTOFF)).sqrt();
            let (lo, hi) = sample.window(y, radius);
            let pos = sample.sorted_positions();
            let xs = sample.sorted_xi_sq();
            pairwise_sum2_by(lo, hi, &|k| {
                let d = y - pos[k];
                let w = (-(d * d - d_min_sq) / two_lam).exp();
                (xs[k] * w, w)
            })
        }
        EvalMode::Naive => {
            let pos = sample.positions();
            let xs = sample.xi_sq();
            pairwise_sum2_by(0, pos.len(), &|k| {
                let d = y - pos[k];
                let w = (-(d * d - d_min_sq) / two_lam).exp();
                (xs[k] * w, w)
            })
        }
    };
    let value = if delta == T::zero() {
        s1 / s0
    } else {
        // undo the shift: weights were divided by phi(d_min)
        let scale = log_gaussian_pdf_unchecked(d_min, lam).exp() / T::of_usize(sample.len());
        (scale * s1 + delta) / (scale * s0 + delta)
    };
    if !value.is_finite() || !(s0 > T::zero() || delta > T::zero()) {
        return Err(Error::SingularEstimator { y: y.to_f64_lossy() });
    }
    Ok(value)
}

/// `Psi_j(y)^{-1/2}`, the factor applied to the diffusion coefficient.
pub fn psi_inverse_sqrt<T: Real>(
    y: T,
    sample: &WeightedSample<T>,
    lam: T,
    delta: T,
    j: usize,
    mode: EvalMode,
) -> Result<T> {
    let v = psi(y, sample, lam, delta, j, mode)?;
    if !(v > T::zero()) {
        return Err(Error::SingularEstimator { y: y.to_f64_lossy() });
    }
    Ok(T::one() / v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xi_sq: &[f64], pos: &[f64]) -> WeightedSample<f64> {
        WeightedSample::new(xi_sq.to_vec(), pos.to_vec()).unwrap()
    }

    #[test]
    fn single_atom() {
        let w = s(&[4.0], &[0.37]);
        for &y in &[-1.0, 0.0, 0.37, 2.5] {
            let v = psi_inverse_sqrt(y, &w, 1e-3, 0.0, 3, EvalMode::Windowed).unwrap();
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_pair() {
        let w = s(&[1.0, 4.0], &[-0.2, 0.2]);
        let v = psi_inverse_sqrt(0.0, &w, 0.01, 0.0, 1, EvalMode::Windowed).unwrap();
        assert!((v - 1.0 / 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn step_zero_uses_mean() {
        let w = s(&[1.0, 4.0, 2.25], &[-0.2, 0.2, 9.0]);
        let v = psi(123.0, &w, 0.01, 0.3, 0, EvalMode::Windowed).unwrap();
        assert!((v - 7.25 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn far_query_with_delta_tends_to_one() {
        let w = s(&[0.25, 0.5], &[0.0, 0.01]);
        let v = psi(5.0, &w, 1e-5, 1e-3, 2, EvalMode::Windowed).unwrap();
        assert_eq!(v, 1.0);
        // without delta the nearest atom dominates instead of underflowing
        let v0 = psi(5.0, &w, 1e-5, 0.0, 2, EvalMode::Windowed).unwrap();
        assert!((v0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn windowed_matches_naive() {
        let pos: Vec<f64> = (0..500).map(|k| ((k * 7919) % 500) as f64 / 250.0 - 1.0).collect();
        let xs: Vec<f64> = (0..500).map(|k| 0.5 + ((k * 31) % 17) as f64 / 10.0).collect();
        let w = s(&xs, &pos);
        for &lam in &[1e-5, 1e-3, 0.1] {
            for &delta in &[0.0, 1e-3] {
                for q in 0..50 {
                    let y = -1.2 + 2.4 * q as f64 / 49.0;
                    let a = psi(y, &w, lam, delta, 1, EvalMode::Windowed).unwrap();
                    let b = psi(y, &w, lam, delta, 1, EvalMode::Naive).unwrap();
                    assert!((a - b).abs() <= 1e-12 * b.abs(), "{lam} {delta} {y}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let w = s(&[1.0], &[0.0]);
        assert!(psi(0.0, &w, 0.0, 0.0, 1, EvalMode::Naive).is_err());
        assert!(psi(0.0, &w, 1.0, -0.1, 1, EvalMode::Naive).is_err());
    }
}
