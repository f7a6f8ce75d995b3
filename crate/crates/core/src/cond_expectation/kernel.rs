use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::Real;

pub type KernelFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub enum KernelShape<T> {
    /// `max(1 - u^2, 0)^2`
    Quartic,
    User(KernelFn<T>),
}

impl<T> fmt::Debug for KernelShape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelShape::Quartic => f.write_str("Quartic"),
            KernelShape::User(_) => f.write_str("User(..)"),
        }
    }
}

const CHECK_POINTS: usize = 10_000;

/// Compactly supported kernel `K_eps(u) = K_1(u / eps) / eps`.
#[derive(Debug, Clone)]
pub struct KernelSpec<T> {
    epsilon: T,
    shape: KernelShape<T>,
    // sup |K_1'| on [-1, 1]
    unit_slope: T,
    // inf of K_1 on (-1/2, 1/2)
    unit_floor: T,
}

/// What the construction-time checks measured on the unit kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiagnostics {
    pub max_outside_support: f64,
    pub min_value: f64,
    pub floor_near_zero: f64,
    pub max_slope: f64,
    pub max_slope_jump: f64,
}

impl<T: Real> KernelSpec<T> {
    pub fn quartic(epsilon: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            shape: KernelShape::Quartic,
            // |d/du (1 - u^2)^2| peaks at u = 1/sqrt(3)
            unit_slope: T::of(8.0 / (3.0 * 3f64.sqrt())),
            unit_floor: T::of(0.5625),
        })
    }

    /// Custom unit kernel; rejected unless it is non-negative, vanishes
    /// outside `[-1, 1]`, is continuously differentiable and bounded away
    /// from zero on `(-1/2, 1/2)`.
    pub fn user(epsilon: T, unit: KernelFn<T>) -> Result<Self> {
        check_epsilon(epsilon)?;
        let d = diagnose(unit.as_ref());
        if d.min_value < 0.0 || !d.min_value.is_finite() {
            return Err(domain("kernel takes negative or non-finite values"));
        }
        if d.max_outside_support > 0.0 {
            return Err(domain("kernel support exceeds [-1, 1]"));
        }
        if !(d.floor_near_zero > 0.0) {
            return Err(domain("kernel is not bounded away from zero on (-1/2, 1/2)"));
        }
        // a C^1 kernel changes slope by O(spacing) between neighbouring cells
        let spacing = 4.0 / CHECK_POINTS as f64;
        if d.max_slope_jump > 100.0 * spacing * (1.0 + d.max_slope) {
            return Err(domain(format!(
                "kernel derivative jumps by {} on a {spacing} grid; not C^1",
                d.max_slope_jump
            )));
        }
        Ok(Self {
            epsilon,
            shape: KernelShape::User(unit),
            unit_slope: T::of(d.max_slope),
            unit_floor: T::of(d.floor_near_zero),
        })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn shape(&self) -> &KernelShape<T> {
        &self.shape
    }

    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            ..self.clone()
        })
    }

    #[inline]
    pub fn unit(&self, u: T) -> T {
        match &self.shape {
            KernelShape::Quartic => {
                let s = T::one() - u * u;
                if s > T::zero() {
                    s * s
                } else {
                    T::zero()
                }
            }
            KernelShape::User(f) => f(u),
        }
    }

    /// `K_eps(u)`.
    #[inline]
    pub fn eval(&self, u: T) -> T {
        self.unit(u / self.epsilon) / self.epsilon
    }

    /// `sup |K_eps'| = sup |K_1'| / eps^2`.
    pub fn max_abs_derivative(&self) -> T {
        self.unit_slope / (self.epsilon * self.epsilon)
    }

    pub fn unit_max_abs_derivative(&self) -> T {
        self.unit_slope
    }

    pub fn unit_floor(&self) -> T {
        self.unit_floor
    }

    pub fn diagnostics(&self) -> KernelDiagnostics {
        diagnose(&|u: T| self.unit(u))
    }
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero()) || !epsilon.is_finite() {
        return Err(domain(format!("bandwidth must be positive, got {epsilon}")));
    }
    Ok(())
}

fn diagnose<T: Real, F: Fn(T) -> T + ?Sized>(k: &F) -> KernelDiagnostics {
    // grid over [-2, 2] with CHECK_POINTS cells
    let spacing = 4.0 / CHECK_POINTS as f64;
    let values: Vec<f64> = (0..=CHECK_POINTS)
        .map(|i| k(T::of(-2.0 + spacing * i as f64)).to_f64_lossy())
        .collect();
    let mut d = KernelDiagnostics {
        max_outside_support: 0.0,
        min_value: f64::INFINITY,
        floor_near_zero: f64::INFINITY,
        max_slope: 0.0,
        max_slope_jump: 0.0,
    };
    let mut prev_slope: Option<f64> = None;
    for (i, &v) in values.iter().enumerate() {
        let u = -2.0 + spacing * i as f64;
        d.min_value = d.min_value.min(v);
        if u.abs() > 1.0 + 1e-12 {
            d.max_outside_support = d.max_outside_support.max(v.abs());
        }
        if u.abs() < 0.5 {
            d.floor_near_zero = d.floor_near_zero.min(v);
        }
        if i > 0 {
            let slope = (v - values[i - 1]) / spacing;
            d.max_slope = d.max_slope.max(slope.abs());
            if let Some(p) = prev_slope {
                d.max_slope_jump = d.max_slope_jump.max((slope - p).abs());
            }
            prev_slope = Some(slope);
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_satisfies_kernel_conditions() {
        let k = KernelSpec::quartic(1.0f64).unwrap();
        let d = k.diagnostics();
        assert_eq!(d.max_outside_support, 0.0);
        assert!(d.min_value >= 0.0);
        assert!(d.floor_near_zero >= 0.5625 - 1e-12);
        assert!((d.max_slope - k.unit_max_abs_derivative()).abs() < 1e-3);
        assert!(d.max_slope_jump < 1e-2);
        assert_eq!(k.unit(0.0), 1.0);
        assert_eq!(k.unit(1.0), 0.0);
        assert_eq!(k.unit(-1.3), 0.0);
    }

    #[test]
    fn l1_scaling() {
        let k1 = KernelSpec::quartic(1.0f64).unwrap();
        let k = KernelSpec::quartic(0.25f64).unwrap();
        for &u in &[-0.3, -0.1, 0.0, 0.05, 0.2, 0.26] {
            assert!((k.eval(u) - k1.unit(u / 0.25) / 0.25).abs() < 1e-15);
        }
        // unit mass: int (1-u^2)^2 du over [-1, 1] = 16/15
        let n = 200_000;
        let mass: f64 = (0..n)
            .map(|i| {
                let u = -0.25 + 0.5 * (i as f64 + 0.5) / n as f64;
                k.eval(u) * 0.5 / n as f64
            })
            .sum();
        assert!((mass - 16.0 / 15.0).abs() < 1e-8);
    }

    #[test]
    fn user_kernels_are_checked() {
        let ok: KernelFn<f64> = Arc::new(|u: f64| {
            let s = 1.0 - u * u;
            if s > 0.0 {
                s * s * s
            } else {
                0.0
            }
        });
        assert!(KernelSpec::user(0.1, ok).is_ok());

        let wide: KernelFn<f64> = Arc::new(|u: f64| (-u * u).exp());
        assert!(KernelSpec::user(0.1, wide).is_err());

        let kinked: KernelFn<f64> = Arc::new(|u: f64| (1.0 - u.abs()).max(0.0));
        assert!(KernelSpec::user(0.1, kinked).is_err());

        let hollow: KernelFn<f64> = Arc::new(|u: f64| {
            let s = 1.0 - u * u;
            if s > 0.0 {
                s * s * u * u
            } else {
                0.0
            }
        });
        assert!(KernelSpec::user(0.1, hollow).is_err());

        let negative: KernelFn<f64> = Arc::new(|u: f64| {
            let s = 1.0 - u * u;
            if s > 0.0 {
                s * s - 0.5
            } else {
                0.0
            }
        });
        assert!(KernelSpec::user(0.1, negative).is_err());
        assert!(KernelSpec::quartic(0.0f64).is_err());
    }
}
