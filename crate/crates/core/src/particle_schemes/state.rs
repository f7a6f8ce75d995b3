use crate::error::{domain, Result};
use crate::scalar::Real;

/// Ensemble at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState<T> {
    /// Full-step positions.
    pub x: Vec<T>,
    /// Half-step positions of the previous step. Equal to `x` before the first
    /// step and for the Euler schemes.
    pub x_half: Vec<T>,
    pub xi: Vec<T>,
    pub j: usize,
    pub clamp_count: usize,
}

impl<T: Real> ParticleState<T> {
    pub fn new(n: usize, x0: T, xi0: Vec<T>) -> Result<Self> {
        if n == 0 || xi0.len() != n {
            return Err(domain(format!("state needs n >= 1 and {n} xi values, got {}", xi0.len())));
        }
        Ok(Self {
            x: vec![x0; n],
            x_half: vec![x0; n],
            xi: xi0,
            j: 0,
            clamp_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Per-path statistics accumulated over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats<T> {
    /// `sum_j (X_{(j+1)h} - X_{jh})^2`.
    pub qv: Vec<T>,
    pub terminal_x: Vec<T>,
    /// `max_j |X_{jh}|`.
    pub max_abs_x: Vec<T>,
    /// Largest realised diffusion coefficient over all particles and steps.
    pub max_diffusion: T,
    /// Smallest half-step square-root argument before clamping.
    pub min_argument: T,
}

impl<T: Real> PathStats<T> {
    pub fn new(n: usize, x0: T) -> Self {
        Self {
            qv: vec![T::zero(); n],
            terminal_x: vec![x0; n],
            max_abs_x: vec![x0.abs(); n],
            max_diffusion: T::zero(),
            min_argument: T::infinity(),
        }
    }
}

/// Unbiased sample variance of the accumulated quadratic variations.
pub fn quad_var_variance<T: Real>(stats: &PathStats<T>) -> Result<T> {
    let n = stats.qv.len();
    if n < 2 {
        return Err(domain(format!("quad_var_variance needs at least 2 paths, got {n}")));
    }
    let nn = T::of_usize(n);
    let mean = crate::scalar::pairwise_sum(&stats.qv) / nn;
    let dev: Vec<T> = stats.qv.iter().map(|&q| (q - mean) * (q - mean)).collect();
    Ok(crate::scalar::pairwise_sum(&dev) / (nn - T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(qv: Vec<f64>) -> PathStats<f64> {
        let n = qv.len();
        PathStats {
            qv,
            terminal_x: vec![0.0; n],
            max_abs_x: vec![0.0; n],
            max_diffusion: 0.0,
            min_argument: f64::INFINITY,
        }
    }

    #[test]
    fn qv_variance_examples() {
        assert_eq!(quad_var_variance(&stats(vec![0.7; 5])).unwrap(), 0.0);
        assert_eq!(quad_var_variance(&stats(vec![0.0, 2.0])).unwrap(), 2.0);
        assert!(quad_var_variance(&stats(vec![1.0])).is_err());
    }

    #[test]
    fn state_shapes() {
        let s = ParticleState::new(3, 0.5f64, vec![1.0; 3]).unwrap();
        assert_eq!(s.x, s.x_half);
        assert!(ParticleState::new(3, 0.5f64, vec![1.0; 2]).is_err());
    }
}
