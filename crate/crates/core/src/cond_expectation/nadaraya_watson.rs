use crate::cond_expectation::kernel::KernelSpec;
use crate::cond_expectation::sample::WeightedSample;
use crate::cond_expectation::EvalMode;
use crate::error::{domain, Error, Result};
use crate::scalar::{pairwise_sum2_by, Real};

/// Regularised Nadaraya-Watson estimate of `E[xi^2 | X = y]`:
/// `(mean(xi_k^2 K(y - x_k)) + delta) / (mean(K(y - x_k)) + delta)`.
pub fn nw_estimate<T: Real>(
    y: T,
    sample: &WeightedSample<T>,
    kernel: &KernelSpec<T>,
    delta: T,
    j: usize,
    mode: EvalMode,
) -> Result<T> {
    if !(delta >= T::zero()) {
        return Err(domain(format!("nw_estimate needs delta >= 0, got {delta}")));
    }
    if j == 0 {
        return Ok(sample.mean_xi_sq());
    }
    let (s1, s0) = match mode {
        EvalMode::Windowed => {
            let (lo, hi) = sample.window(y, kernel.epsilon());
            let pos = sample.sorted_positions();
            let xs = sample.sorted_xi_sq();
            pairwise_sum2_by(lo, hi, &|k| {
                let w = kernel.eval(y - pos[k]);
                (xs[k] * w, w)
            })
        }
        EvalMode::Naive => {
            let pos = sample.positions();
            let xs = sample.xi_sq();
            pairwise_sum2_by(0, pos.len(), &|k| {
                let w = kernel.eval(y - pos[k]);
                (xs[k] * w, w)
            })
        }
    };
    if delta == T::zero() {
        if !(s0 > T::zero()) {
            return Err(Error::SingularEstimator { y: y.to_f64_lossy() });
        }
        return Ok(s1 / s0);
    }
    let n = T::of_usize(sample.len());
    Ok((s1 / n + delta) / (s0 / n + delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coincident_positions_give_mean() {
        let k = KernelSpec::quartic(0.2f64).unwrap();
        let w = WeightedSample::new(vec![1.0, 2.0, 6.0], vec![0.3; 3]).unwrap();
        let v = nw_estimate(0.3, &w, &k, 0.0, 4, EvalMode::Windowed).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_reach_query() {
        let k = KernelSpec::quartic(0.1f64).unwrap();
        let w = WeightedSample::new(vec![0.3, 2.0], vec![0.0, 0.05]).unwrap();
        assert_eq!(nw_estimate(1.0, &w, &k, 0.01, 1, EvalMode::Windowed).unwrap(), 1.0);
        assert!(matches!(
            nw_estimate(1.0, &w, &k, 0.0, 1, EvalMode::Windowed),
            Err(Error::SingularEstimator { .. })
        ));
        // j = 0 never looks at positions
        assert!((nw_estimate(1.0, &w, &k, 0.0, 0, EvalMode::Windowed).unwrap() - 1.15).abs() < 1e-15);
    }

    #[test]
    fn two_term_hand_evaluation() {
        // eps = 0.5, y = 0.1: K(0.1) = (1 - 0.04)^2 / 0.5, K(-0.2) = (1 - 0.16)^2 / 0.5
        let k = KernelSpec::quartic(0.5f64).unwrap();
        let w = WeightedSample::new(vec![1.0, 4.0], vec![0.0, 0.3]).unwrap();
        let k0 = 0.96f64 * 0.96 / 0.5;
        let k1 = 0.84f64 * 0.84 / 0.5;
        let expect = ((k0 + 4.0 * k1) / 2.0 + 0.01) / ((k0 + k1) / 2.0 + 0.01);
        let v = nw_estimate(0.1, &w, &k, 0.01, 1, EvalMode::Windowed).unwrap();
        assert!((v - expect).abs() <= 1e-12 * expect, "{v} {expect}");
        // exact rational evaluation
        assert!((v - 2.292_939_164_427_070_7).abs() < 1e-12);
    }
}
