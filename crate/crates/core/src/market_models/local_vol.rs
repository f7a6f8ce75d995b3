use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Tabulated `sigma(t, x)`: piecewise constant in `t`, linear in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVolTable<T> {
    times: Vec<T>,
    xs: Vec<T>,
    // values[row][col], one row per time breakpoint
    values: Vec<Vec<T>>,
}

impl<T: Real> LocalVolTable<T> {
    pub fn new(times: Vec<T>, xs: Vec<T>, values: Vec<Vec<T>>) -> Result<Self> {
        if times.is_empty() || xs.len() < 2 {
            return Err(domain("table needs at least one time row and two x nodes"));
        }
        if values.len() != times.len() || values.iter().any(|r| r.len() != xs.len()) {
            return Err(domain("table values do not match the (times, xs) shape"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("table breakpoints must be strictly increasing"));
        }
        if values.iter().flatten().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(domain("table volatilities must be finite and positive"));
        }
        Ok(Self { times, xs, values })
    }

    fn bounds(&self) -> (T, T) {
        let flat = self.values.iter().flatten();
        let lo = flat.clone().fold(T::infinity(), |a, &b| a.min(b));
        let hi = flat.fold(T::neg_infinity(), |a, &b| a.max(b));
        (lo, hi)
    }

    fn eval(&self, t: T, x: T) -> Result<T> {
        let first = self.xs[0];
        let last = *self.xs.last().unwrap();
        if !(x >= first && x <= last) {
            return Err(Error::Extrapolation { x: x.to_f64_lossy() });
        }
        let row = match self.times.iter().rposition(|&tk| tk <= t) {
            Some(r) => r,
            None => 0,
        };
        let vals = &self.values[row];
        let upper = self.xs.partition_point(|&xk| xk <= x).min(self.xs.len() - 1);
        let lower = upper - 1;
        let (x0, x1) = (self.xs[lower], self.xs[upper]);
        let w = (x - x0) / (x1 - x0);
        Ok(vals[lower] + w * (vals[upper] - vals[lower]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalVol<T> {
    Constant(T),
    /// `3/4 + tanh(x)/4`.
    Tanh,
    Table(LocalVolTable<T>),
}

/// Local volatility with its ellipticity bounds `c <= sigma <= C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalVolSpec<T> {
    variant: LocalVol<T>,
    lower: T,
    upper: T,
}

impl<T: Real> LocalVolSpec<T> {
    pub fn constant(value: T) -> Result<Self> {
        if !(value > T::zero()) || !value.is_finite() {
            return Err(domain(format!("constant volatility must be positive, got {value}")));
        }
        Ok(Self {
            variant: LocalVol::Constant(value),
            lower: value,
            upper: value,
        })
    }

    pub fn tanh() -> Self {
        Self {
            variant: LocalVol::Tanh,
            lower: T::of(0.5),
            upper: T::one(),
        }
    }

    pub fn table(table: LocalVolTable<T>) -> Self {
        let (lower, upper) = table.bounds();
        Self {
            variant: LocalVol::Table(table),
            lower,
            upper,
        }
    }

    pub fn variant(&self) -> &LocalVol<T> {
        &self.variant
    }

    pub fn lower_bound(&self) -> T {
        self.lower
    }

    pub fn upper_bound(&self) -> T {
        self.upper
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.variant, LocalVol::Constant(_))
    }

    pub fn sigma(&self, t: T, x: T) -> Result<T> {
        match &self.variant {
            LocalVol::Constant(v) => Ok(*v),
            LocalVol::Tanh => Ok(T::of(0.75) + x.tanh() * T::of(0.25)),
            LocalVol::Table(table) => table.eval(t, x),
        }
    }
}

pub fn sigma_eval<T: Real>(spec: &LocalVolSpec<T>, t: T, x: T) -> Result<T> {
    spec.sigma(t, x)
}
