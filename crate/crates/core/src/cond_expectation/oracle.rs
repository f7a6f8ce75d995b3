//! Reference conditional expectation for finitely supported laws.
//!
//! Kept separate from the estimators on purpose: plain linear scan over all
//! atoms in input order, double-double accumulation, no windowing.

use crate::cond_expectation::sample::WeightedSample;

#[derive(Debug, Clone, Copy, Default)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    fn add(&mut self, x: f64) {
        // Knuth two-sum
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        let lo = self.lo + err;
        let hi = s + lo;
        self.lo = lo - (hi - s);
        self.hi = hi;
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// `E[xi^2 | X + sqrt(lam) G = x]` where `(xi^2, X)` is uniform over the atoms
/// and `G` is an independent standard normal.
pub fn cond_exp_oracle(atoms: &WeightedSample<f64>, lam: f64, x: f64) -> f64 {
    let xs = atoms.xi_sq();
    let pos = atoms.positions();
    let mut d_min_sq = f64::INFINITY;
    for &p in pos {
        let d = x - p;
        d_min_sq = d_min_sq.min(d * d);
    }
    let mut num = DoubleDouble::default();
    let mut den = DoubleDouble::default();
    for (&v, &p) in xs.iter().zip(pos) {
        let d = x - p;
        let w = (-(d * d - d_min_sq) / (2.0 * lam)).exp();
        // the product v * w is exact up to one rounding; keep its error term
        let prod = v * w;
        let prod_err = v.mul_add(w, -prod);
        num.add(prod);
        num.add(prod_err);
        den.add(w);
    }
    num.value() / den.value()
}
