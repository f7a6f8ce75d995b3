//! Riemann-Liouville fractional Brownian motion on a uniform grid.
//!
//! `W^H_t = C_H * int_0^t (t - s)^(H - 1/2) dW_s` with `C_H = sqrt(2H)`, so
//! that `E[(W^H_t)^2] = t^(2H)`. Each cell `[t_j, t_{j+1})` contributes the
//! driver increment scaled by the root mean square of the kernel over the
//! cell, which reproduces the variance exactly at every grid point.

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::stochastic_core::grid::TimeGrid;

pub fn rl_normalisation<T: Real>(hurst: T) -> Result<T> {
    check_hurst(hurst)?;
    Ok((hurst + hurst).sqrt())
}

fn check_hurst<T: Real>(hurst: T) -> Result<()> {
    if !(hurst > T::zero() && hurst < T::one()) {
        return Err(domain(format!("Hurst index must lie in (0, 1), got {hurst}")));
    }
    Ok(())
}

/// Precomputed lower-triangular weights `C_H * w_{k,j}` for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RlFbm<T> {
    hurst: T,
    grid: TimeGrid<T>,
    // row k (1-based grid index) holds k weights, packed
    weights: Vec<T>,
}

impl<T: Real> RlFbm<T> {
    pub fn new(hurst: T, grid: TimeGrid<T>) -> Result<Self> {
        let c_h = rl_normalisation(hurst)?;
        let n = grid.n_steps();
        let h = grid.h();
        let two_h = hurst + hurst;
        let mut weights = Vec::with_capacity(n * (n + 1) / 2);
        for k in 1..=n {
            for j in 0..k {
                // int_{t_j}^{t_{j+1}} (t_k - s)^(2H - 1) ds, in units of h
                let far = T::of_usize(k - j);
                let near = T::of_usize(k - j - 1);
                let cell = (far.powf(two_h) - near.powf(two_h)) * h.powf(two_h) / two_h;
                weights.push(c_h * (cell / h).sqrt());
            }
        }
        Ok(Self {
            hurst,
            grid,
            weights,
        })
    }

    pub fn hurst(&self) -> T {
        self.hurst
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    fn row(&self, k: usize) -> &[T] {
        let start = (k - 1) * k / 2;
        &self.weights[start..start + k]
    }

    /// Weight applied to the driver increment of step `j` at grid index `k`
    /// (includes `C_H`).
    pub fn weight(&self, k: usize, j: usize) -> T {
        assert!(j < k && k <= self.grid.n_steps());
        self.row(k)[j]
    }

    /// Discrete variance of `W^H` at grid index `k`.
    pub fn variance_at(&self, k: usize) -> T {
        if k == 0 {
            return T::zero();
        }
        let h = self.grid.h();
        self.row(k).iter().fold(T::zero(), |acc, &w| acc + w * w * h)
    }

    /// `W^H` at every grid point (`n_steps + 1` values, starting at 0).
    pub fn path(&self, driver: &[T]) -> Result<Vec<T>> {
        let n = self.grid.n_steps();
        if driver.len() != n {
            return Err(domain(format!(
                "driver has {} increments, grid has {n} steps",
                driver.len()
            )));
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(T::zero());
        for k in 1..=n {
            let w = self.row(k);
            // driver index j pairs with weight for lag k - j
            let mut acc = T::zero();
            for j in 0..k {
                acc = acc + w[j] * driver[j];
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// One-shot helper: `W^H` on `grid` driven by `driver`.
pub fn rl_fbm_path<T: Real>(hurst: T, grid: &TimeGrid<T>, driver: &[T]) -> Result<Vec<T>> {
    RlFbm::new(hurst, *grid)?.path(driver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic_core::grid::draw_increments;
    use crate::stochastic_core::rng::NoiseLabel;

    #[test]
    fn normalisation_constant() {
        assert!((rl_normalisation(0.1f64).unwrap() - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((rl_normalisation(0.5f64).unwrap() - 1.0).abs() < 1e-15);
        assert!(rl_normalisation(0.0f64).is_err());
        assert!(rl_normalisation(1.0f64).is_err());
    }

    #[test]
    fn brownian_case_is_cumulative_sum() {
        let g = TimeGrid::new(1.0f64, 0.05).unwrap();
        let blk = draw_increments(&g, 1, 3, NoiseLabel::B).unwrap();
        let path = rl_fbm_path(0.5, &g, blk.row(0)).unwrap();
        let mut cum = 0.0;
        for (k, v) in path.iter().enumerate().skip(1) {
            cum += blk.get(0, k - 1);
            assert!((v - cum).abs() < 1e-14);
        }
    }

    #[test]
    fn discrete_variance_is_exact() {
        for &hurst in &[0.1f64, 0.3, 0.5] {
            for &n in &[1usize, 7, 50, 64] {
                let g = TimeGrid::with_steps(1.0f64, n).unwrap();
                let f = RlFbm::new(hurst, g).unwrap();
                for k in 1..=n {
                    let t = g.time(k);
                    let expect = t.powf(2.0 * hurst);
                    let got = f.variance_at(k);
                    assert!((got - expect).abs() <= 1e-12 * expect, "H={hurst} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn sampled_variance_at_one() {
        let g = TimeGrid::with_steps(1.0f64, 20).unwrap();
        let f = RlFbm::new(0.1, g).unwrap();
        let n = 100_000;
        let blk = draw_increments(&g, n, 17, NoiseLabel::HDriver).unwrap();
        let mut s2 = 0.0;
        for i in 0..n {
            let v = *f.path(blk.row(i)).unwrap().last().unwrap();
            s2 += v * v;
        }
        let var = s2 / n as f64;
        let se = 2f64.sqrt() / (n as f64).sqrt();
        assert!((var - 1.0).abs() < 5.0 * se, "{var}");
    }

    #[test]
    fn driver_length_checked() {
        let g = TimeGrid::with_steps(1.0f64, 4).unwrap();
        assert!(rl_fbm_path(0.3, &g, &[0.0; 3]).is_err());
    }
}
