use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::stochastic_core::fbm::RlFbm;
use crate::stochastic_core::gaussian::rho_bar;
use crate::stochastic_core::grid::TimeGrid;

/// `xi_t = f(t, B_t)`; must not look at the future of `B`.
pub type XiFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum StochVol<T> {
    Constant(T),
    /// `floor + scale * exp(W^H_t - t^(2H) / 2)` with `W^H` driven by `B`.
    RoughBergomi { hurst: T, floor: T, scale: T },
    User(XiFn<T>),
}

impl<T: fmt::Debug> fmt::Debug for StochVol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StochVol::Constant(k) => write!(f, "Constant({k:?})"),
            StochVol::RoughBergomi {
                hurst,
                floor,
                scale,
            } => write!(f, "RoughBergomi {{ hurst: {hurst:?}, floor: {floor:?}, scale: {scale:?} }}"),
            StochVol::User(_) => f.write_str("User(..)"),
        }
    }
}

/// Stochastic volatility factor with declared bounds `a <= xi <= b` and the
/// correlation `rho` between its driver `B` and the asset noise `W`.
#[derive(Debug, Clone)]
pub struct StochVolSpec<T> {
    variant: StochVol<T>,
    lower: T,
    upper: T,
    rho: T,
}

impl<T: Real> StochVolSpec<T> {
    pub fn constant(kappa: T, rho: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(domain(format!("constant xi must be positive, got {kappa}")));
        }
        rho_bar(rho)?;
        Ok(Self {
            variant: StochVol::Constant(kappa),
            lower: kappa,
            upper: kappa,
            rho,
        })
    }

    /// Declared bounds are `[floor, +inf)`: the factor is unbounded above.
    pub fn rough_bergomi(hurst: T, floor: T, scale: T, rho: T) -> Result<Self> {
        if !(hurst > T::zero() && hurst < T::one()) {
            return Err(domain(format!("Hurst index must lie in (0, 1), got {hurst}")));
        }
        if !(floor > T::zero()) || !(scale >= T::zero()) {
            return Err(domain("rough Bergomi needs floor > 0 and scale >= 0"));
        }
        rho_bar(rho)?;
        Ok(Self {
            variant: StochVol::RoughBergomi {
                hurst,
                floor,
                scale,
            },
            lower: floor,
            upper: T::infinity(),
            rho,
        })
    }

    pub fn rough_bergomi_default(rho: T) -> Result<Self> {
        Self::rough_bergomi(T::of(0.1), T::of(0.01), T::of(0.5), rho)
    }

    pub fn user(f: XiFn<T>, lower: T, upper: T, rho: T) -> Result<Self> {
        if !(lower > T::zero() && lower <= upper) {
            return Err(domain(format!("user xi bounds must satisfy 0 < a <= b, got [{lower}, {upper}]")));
        }
        rho_bar(rho)?;
        Ok(Self {
            variant: StochVol::User(f),
            lower,
            upper,
            rho,
        })
    }

    /// `low` while `B_t < 0`, `high` otherwise.
    pub fn two_state(low: T, high: T, rho: T) -> Result<Self> {
        let f: XiFn<T> = Arc::new(move |_t, b| if b < T::zero() { low } else { high });
        Self::user(f, low.min(high), low.max(high), rho)
    }

    pub fn variant(&self) -> &StochVol<T> {
        &self.variant
    }

    pub fn lower_bound(&self) -> T {
        self.lower
    }

    pub fn upper_bound(&self) -> T {
        self.upper
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn has_finite_bounds(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn sampler(&self, grid: TimeGrid<T>) -> Result<XiSampler<T>> {
        let fbm = match &self.variant {
            StochVol::RoughBergomi { hurst, .. } => Some(RlFbm::new(*hurst, grid)?),
            _ => None,
        };
        Ok(XiSampler {
            spec: self.clone(),
            grid,
            fbm,
        })
    }

    /// Number of entries of `path` outside the declared bounds.
    pub fn bound_violations(&self, path: &[T]) -> usize {
        path.iter()
            .filter(|&&v| !(v >= self.lower && v <= self.upper))
            .count()
    }
}

/// Generates `xi` paths on a fixed grid.
#[derive(Debug, Clone)]
pub struct XiSampler<T> {
    spec: StochVolSpec<T>,
    grid: TimeGrid<T>,
    fbm: Option<RlFbm<T>>,
}

impl<T: Real> XiSampler<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    /// `xi` at grid indices `0..=n`. Entry `k` reads `driver_b[..k]` only.
    pub fn path(&self, driver_b: &[T]) -> Result<Vec<T>> {
        let n = self.grid.n_steps();
        if driver_b.len() != n {
            return Err(domain(format!(
                "xi driver has {} increments, grid has {n} steps",
                driver_b.len()
            )));
        }
        match &self.spec.variant {
            StochVol::Constant(k) => Ok(vec![*k; n + 1]),
            StochVol::RoughBergomi {
                hurst,
                floor,
                scale,
            } => {
                let fbm = self.fbm.as_ref().expect("sampler built with fbm weights");
                let w = fbm.path(driver_b)?;
                let two_h = *hurst + *hurst;
                Ok(w.iter()
                    .enumerate()
                    .map(|(k, &wk)| {
                        let t = self.grid.time(k);
                        let var = if k == 0 { T::zero() } else { t.powf(two_h) };
                        *floor + *scale * (wk - T::of(0.5) * var).exp()
                    })
                    .collect())
            }
            StochVol::User(f) => {
                let mut out = Vec::with_capacity(n + 1);
                let mut b = T::zero();
                out.push(f(T::zero(), b));
                for (k, db) in driver_b.iter().enumerate() {
                    b = b + *db;
                    out.push(f(self.grid.time(k + 1), b));
                }
                Ok(out)
            }
        }
    }
}

pub fn xi_path<T: Real>(spec: &StochVolSpec<T>, grid: &TimeGrid<T>, driver_b: &[T]) -> Result<Vec<T>> {
    spec.sampler(*grid)?.path(driver_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic_core::grid::draw_increments;
    use crate::stochastic_core::rng::NoiseLabel;

    #[test]
    fn constant_path() {
        let g = TimeGrid::new(1.0f64, 0.1).unwrap();
        let s = StochVolSpec::constant(1.0, -0.7).unwrap();
        let p = xi_path(&s, &g, &[0.3; 10]).unwrap();
        assert_eq!(p, vec![1.0; 11]);
        assert_eq!(s.bound_violations(&p), 0);
        assert!(StochVolSpec::constant(1.0f64, 1.0).is_err());
    }

    #[test]
    fn rough_bergomi_starts_at_floor_plus_scale() {
        let g = TimeGrid::new(1.0f64, 0.02).unwrap();
        let s = StochVolSpec::rough_bergomi_default(-0.7).unwrap();
        let blk = draw_increments(&g, 1, 1, NoiseLabel::B).unwrap();
        let p = xi_path(&s, &g, blk.row(0)).unwrap();
        assert!((p[0] - 0.51).abs() < 1e-15);
        assert_eq!(s.bound_violations(&p), 0);
        assert!(!s.has_finite_bounds());
    }

    #[test]
    fn rough_bergomi_mean_at_one() {
        let g = TimeGrid::new(1.0f64, 0.05).unwrap();
        let s = StochVolSpec::rough_bergomi_default(-0.7).unwrap();
        let sampler = s.sampler(g).unwrap();
        let n = 100_000;
        let blk = draw_increments(&g, n, 21, NoiseLabel::B).unwrap();
        let vals: Vec<f64> = (0..n)
            .map(|i| *sampler.path(blk.row(i)).unwrap().last().unwrap())
            .collect();
        let m = vals.iter().sum::<f64>() / n as f64;
        let sd = (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!((m - 0.51).abs() < 5.0 * sd / (n as f64).sqrt(), "{m}");
    }

    #[test]
    fn adapted_to_driver() {
        let g = TimeGrid::new(1.0f64, 0.1).unwrap();
        let specs = [
            StochVolSpec::rough_bergomi_default(-0.7).unwrap(),
            StochVolSpec::two_state(0.5, 2.0, 0.3).unwrap(),
        ];
        let blk = draw_increments(&g, 1, 9, NoiseLabel::B).unwrap();
        for s in &specs {
            let base = xi_path(s, &g, blk.row(0)).unwrap();
            for j in 0..g.n_steps() {
                let mut d = blk.row(0).to_vec();
                d[j] += 5.0;
                let bumped = xi_path(s, &g, &d).unwrap();
                assert_eq!(&base[..=j], &bumped[..=j], "step {j}");
            }
        }
    }

    #[test]
    fn two_state_follows_sign_of_b() {
        let g = TimeGrid::new(1.0f64, 0.5).unwrap();
        let s = StochVolSpec::two_state(0.5, 2.0, 0.0).unwrap();
        let p = xi_path(&s, &g, &[-0.1, 0.3]).unwrap();
        assert_eq!(p, vec![2.0, 0.5, 2.0]);
        assert_eq!((s.lower_bound(), s.upper_bound()), (0.5, 2.0));
    }
}
