use crate::error::{domain, Result};
use crate::scalar::{pairwise_sum, Real};

/// Atoms `(xi^2, position)` of an empirical joint law.
///
/// Squares are taken once at construction. A copy sorted by position backs
/// the windowed evaluators; the original index order backs the naive ones.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample<T> {
    xi_sq: Vec<T>,
    positions: Vec<T>,
    sorted_positions: Vec<T>,
    sorted_xi_sq: Vec<T>,
    mean_xi_sq: T,
}

impl<T: Real> WeightedSample<T> {
    pub fn new(xi_sq: Vec<T>, positions: Vec<T>) -> Result<Self> {
        if xi_sq.is_empty() || xi_sq.len() != positions.len() {
            return Err(domain(format!(
                "sample needs equal, non-zero lengths, got {} and {}",
                xi_sq.len(),
                positions.len()
            )));
        }
        if xi_sq.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(domain("xi^2 entries must be finite and >= 0"));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(domain("sample positions must be finite"));
        }
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| positions[a].partial_cmp(&positions[b]).unwrap());
        let sorted_positions = order.iter().map(|&k| positions[k]).collect();
        let sorted_xi_sq = order.iter().map(|&k| xi_sq[k]).collect();
        let mean_xi_sq = pairwise_sum(&xi_sq) / T::of_usize(xi_sq.len());
        Ok(Self {
            xi_sq,
            positions,
            sorted_positions,
            sorted_xi_sq,
            mean_xi_sq,
        })
    }

    /// Squares `xi` on the way in.
    pub fn from_xi(xi: &[T], positions: Vec<T>) -> Result<Self> {
        Self::new(xi.iter().map(|&v| v * v).collect(), positions)
    }

    pub fn len(&self) -> usize {
        self.xi_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_sq.is_empty()
    }

    pub fn xi_sq(&self) -> &[T] {
        &self.xi_sq
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn sorted_positions(&self) -> &[T] {
        &self.sorted_positions
    }

    pub fn sorted_xi_sq(&self) -> &[T] {
        &self.sorted_xi_sq
    }

    pub fn mean_xi_sq(&self) -> T {
        self.mean_xi_sq
    }

    pub fn position_range(&self) -> (T, T) {
        (self.sorted_positions[0], *self.sorted_positions.last().unwrap())
    }

    /// Sorted index range of atoms with `|y - x| <= radius`.
    pub(crate) fn window(&self, y: T, radius: T) -> (usize, usize) {
        let lo = self.sorted_positions.partition_point(|&x| x < y - radius);
        let hi = self.sorted_positions.partition_point(|&x| x <= y + radius);
        (lo, hi)
    }

    /// Distance from `y` to the nearest atom.
    pub(crate) fn nearest_distance(&self, y: T) -> T {
        let p = &self.sorted_positions;
        let idx = p.partition_point(|&x| x < y);
        let mut best = T::infinity();
        if idx < p.len() {
            best = best.min((p[idx] - y).abs());
        }
        if idx > 0 {
            best = best.min((y - p[idx - 1]).abs());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_sign() {
        assert!(WeightedSample::<f64>::new(vec![], vec![]).is_err());
        assert!(WeightedSample::new(vec![1.0], vec![0.0, 1.0]).is_err());
        assert!(WeightedSample::new(vec![-1.0], vec![0.0]).is_err());
        assert!(WeightedSample::new(vec![1.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn sorted_view_keeps_pairs() {
        let s = WeightedSample::from_xi(&[1.0, 2.0, 3.0], vec![0.5, -1.0, 0.0]).unwrap();
        assert_eq!(s.sorted_positions(), &[-1.0, 0.0, 0.5]);
        assert_eq!(s.sorted_xi_sq(), &[4.0, 9.0, 1.0]);
        assert_eq!(s.mean_xi_sq(), 14.0 / 3.0);
        assert_eq!(s.window(0.1, 0.45), (1, 3));
        assert_eq!(s.nearest_distance(-0.4), 0.4);
    }
}
