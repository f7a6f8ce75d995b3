use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::stochastic_core::rng::{standard_normal, NoiseLabel};

/// Uniform time discretisation `0, h, 2h, ..., T` with `T / h` integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    h: T,
    n_steps: usize,
}

impl<T: Real> TimeGrid<T> {
    /// Rejects step sizes that do not divide the horizon.
    pub fn new(horizon: T, h: T) -> Result<Self> {
        if !(horizon >= T::zero()) || !horizon.is_finite() {
            return Err(domain(format!("horizon must be finite and >= 0, got {horizon}")));
        }
        if !(h > T::zero() && h <= T::one()) {
            return Err(domain(format!("step size must lie in (0, 1], got {h}")));
        }
        let ratio = horizon / h;
        let n = ratio.round();
        let tol = T::of(1e-9) * n.max(T::one());
        if (ratio - n).abs() > tol {
            return Err(domain(format!("T / h = {ratio} is not an integer")));
        }
        Ok(Self {
            horizon,
            h,
            n_steps: n.to_usize().unwrap_or(0),
        })
    }

    pub fn with_steps(horizon: T, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            if horizon == T::zero() {
                return Ok(Self {
                    horizon,
                    h: T::one(),
                    n_steps: 0,
                });
            }
            return Err(domain("a positive horizon needs at least one step"));
        }
        Self::new(horizon, horizon / T::of_usize(n_steps))
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, k: usize) -> T {
        T::of_usize(k) * self.h
    }
}

/// How Brownian increments are addressed in the counter-based streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    /// One normal per grid step.
    #[default]
    PerStep,
    /// Dyadic Brownian-bridge (Levy) construction: the value at every dyadic
    /// time is fixed by the seed, so all grids with `2^k` steps observe the
    /// same Brownian path.
    Dyadic,
}

/// Source of the Brownian increments of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSource {
    pub seed: u64,
    pub kind: NoiseKind,
}

const DYADIC_TAG: u64 = 1 << 63;

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            kind: NoiseKind::PerStep,
        }
    }

    pub fn dyadic(seed: u64) -> Self {
        Self {
            seed,
            kind: NoiseKind::Dyadic,
        }
    }

    pub fn check_grid<T: Real>(&self, grid: &TimeGrid<T>) -> Result<()> {
        let n = grid.n_steps();
        if self.kind == NoiseKind::Dyadic && n > 0 && !n.is_power_of_two() {
            return Err(domain(format!(
                "dyadic noise needs a power-of-two step count, got {n}"
            )));
        }
        Ok(())
    }

    /// All increments of one particle's Brownian motion `label` on `grid`.
    pub fn increments<T: Real>(
        &self,
        grid: &TimeGrid<T>,
        particle: usize,
        label: NoiseLabel,
    ) -> Result<Vec<T>> {
        self.check_grid(grid)?;
        let n = grid.n_steps();
        let p = particle as u64;
        match self.kind {
            NoiseKind::PerStep => {
                let sqrt_h = grid.h().sqrt();
                Ok((0..n)
                    .map(|j| sqrt_h * T::of(standard_normal(self.seed, p, label, j as u64)))
                    .collect())
            }
            NoiseKind::Dyadic => {
                if n == 0 {
                    return Ok(Vec::new());
                }
                let horizon = grid.horizon().to_f64_lossy();
                // w[m] = W(m T / n)
                let mut w = vec![0.0f64; n + 1];
                w[n] = horizon.sqrt() * standard_normal(self.seed, p, label, DYADIC_TAG);
                let levels = n.trailing_zeros() as u64;
                for level in 1..=levels {
                    let stride = n >> level;
                    let sd = (horizon / (1u64 << (level + 1)) as f64).sqrt();
                    let mut m = 1u64;
                    while m < (1u64 << level) {
                        let at = m as usize * stride;
                        let mid = 0.5 * (w[at - stride] + w[at + stride]);
                        let key = DYADIC_TAG | (level << 40) | m;
                        w[at] = mid + sd * standard_normal(self.seed, p, label, key);
                        m += 2;
                    }
                }
                Ok(w.windows(2).map(|s| T::of(s[1] - s[0])).collect())
            }
        }
    }
}

/// Gaussian increments, one row per path and one column per step.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementBlock<T> {
    n_paths: usize,
    n_steps: usize,
    h: T,
    values: Vec<T>,
}

impl<T: Real> IncrementBlock<T> {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Variance of every entry.
    pub fn variance(&self) -> T {
        self.h
    }

    pub fn row(&self, path: usize) -> &[T] {
        &self.values[path * self.n_steps..(path + 1) * self.n_steps]
    }

    pub fn get(&self, path: usize, step: usize) -> T {
        self.values[path * self.n_steps + step]
    }
}

/// Draws the block of `N(0, h)` increments addressed by `(seed, label)`.
pub fn draw_increments<T: Real>(
    grid: &TimeGrid<T>,
    n_paths: usize,
    seed: u64,
    label: NoiseLabel,
) -> Result<IncrementBlock<T>> {
    if n_paths == 0 {
        return Err(domain("draw_increments needs n_paths >= 1"));
    }
    let source = NoiseSource::new(seed);
    let n = grid.n_steps();
    let mut values = Vec::with_capacity(n_paths * n);
    for i in 0..n_paths {
        values.extend(source.increments(grid, i, label)?);
    }
    Ok(IncrementBlock {
        n_paths,
        n_steps: n,
        h: grid.h(),
        values,
    })
}
