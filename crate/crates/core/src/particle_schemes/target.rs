use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::market_models::LocalVolSpec;
use crate::scalar::Real;
use crate::stochastic_core::{rho_bar, NoiseKind, NoiseLabel, NoiseSource, TimeGrid};

/// Euler-Maruyama for `dY = sigma(t, Y) dW` with `W = rho B + rho_bar Bbar`.
///
/// Driving `W` through the same labelled streams as the particle schemes lets
/// a fine reference share its Brownian path with a coarse run (dyadic noise).
#[derive(Debug, Clone)]
pub struct TargetConfig<T> {
    pub grid: TimeGrid<T>,
    pub x0: T,
    pub local_vol: LocalVolSpec<T>,
    pub n_paths: usize,
    pub noise: NoiseSource,
    pub rho: T,
}

/// Terminal values of the target process started at zero, driven by `Bbar`.
pub fn simulate_target<T: Real>(
    grid: &TimeGrid<T>,
    vol: &LocalVolSpec<T>,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<T>> {
    simulate_target_with(&TargetConfig {
        grid: *grid,
        x0: T::zero(),
        local_vol: vol.clone(),
        n_paths,
        noise: NoiseSource::new(seed),
        rho: T::zero(),
    })
}

pub fn simulate_target_with<T: Real>(cfg: &TargetConfig<T>) -> Result<Vec<T>> {
    if cfg.n_paths == 0 {
        return Err(domain("simulate_target needs n_paths >= 1"));
    }
    cfg.noise.check_grid(&cfg.grid)?;
    let rb = rho_bar(cfg.rho)?;
    let rho = cfg.rho;
    let grid = cfg.grid;
    let n = grid.n_steps();
    let sqrt_h = grid.h().sqrt();
    let seed = cfg.noise.seed;
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| -> Result<T> {
            let mut y = cfg.x0;
            match cfg.noise.kind {
                NoiseKind::PerStep => {
                    for j in 0..n {
                        let dbb = sqrt_h * T::of(crate::stochastic_core::standard_normal(
                            seed,
                            i as u64,
                            NoiseLabel::Bbar,
                            j as u64,
                        ));
                        let dw = if rho == T::zero() {
                            dbb
                        } else {
                            let db = sqrt_h
                                * T::of(crate::stochastic_core::standard_normal(
                                    seed,
                                    i as u64,
                                    NoiseLabel::B,
                                    j as u64,
                                ));
                            rho * db + rb * dbb
                        };
                        y = y + cfg.local_vol.sigma(grid.time(j), y)? * dw;
                    }
                }
                NoiseKind::Dyadic => {
                    let dbb = cfg.noise.increments(&grid, i, NoiseLabel::Bbar)?;
                    let db = if rho == T::zero() {
                        None
                    } else {
                        Some(cfg.noise.increments(&grid, i, NoiseLabel::B)?)
                    };
                    for j in 0..n {
                        let dw = match &db {
                            None => dbb[j],
                            Some(b) => rho * b[j] + rb * dbb[j],
                        };
                        y = y + cfg.local_vol.sigma(grid.time(j), y)? * dw;
                    }
                }
            }
            Ok(y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_vol_is_brownian_motion() {
        let g = TimeGrid::new(1.0f64, 0.25).unwrap();
        let vol = LocalVolSpec::constant(1.0).unwrap();
        let y = simulate_target(&g, &vol, 100_000, 3).unwrap();
        let n = y.len() as f64;
        let m = y.iter().sum::<f64>() / n;
        let v = y.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
        assert!(m.abs() < 5.0 / n.sqrt());
        assert!((v - 1.0).abs() < 5.0 * 2f64.sqrt() / n.sqrt());
    }

    #[test]
    fn deterministic_and_zero_steps() {
        let g = TimeGrid::new(1.0f64, 0.01).unwrap();
        let vol = LocalVolSpec::tanh();
        assert_eq!(
            simulate_target(&g, &vol, 500, 9).unwrap(),
            simulate_target(&g, &vol, 500, 9).unwrap()
        );
        let g0 = TimeGrid::with_steps(0.0f64, 0).unwrap();
        assert_eq!(simulate_target(&g0, &vol, 3, 9).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn dyadic_target_with_unit_vol_is_grid_free() {
        let vol = LocalVolSpec::constant(1.0).unwrap();
        let mk = |n| TargetConfig {
            grid: TimeGrid::with_steps(1.0f64, n).unwrap(),
            x0: 0.0,
            local_vol: vol.clone(),
            n_paths: 20,
            noise: NoiseSource::dyadic(5),
            rho: -0.6,
        };
        let a = simulate_target_with(&mk(2)).unwrap();
        let b = simulate_target_with(&mk(32)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
