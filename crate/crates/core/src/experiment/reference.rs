use crate::error::{Error, Result};
use crate::experiment::payoff::Payoff;
use crate::experiment::stats::mc_stats;
use crate::market_models::{LocalVol, LocalVolSpec};
use crate::particle_schemes::simulate_target;
use crate::stochastic_core::TimeGrid;

/// Closed-form `E[f(W_1)]` for the payoffs with one.
pub fn reference_fake_bm(payoff: &Payoff) -> Result<f64> {
    match payoff {
        Payoff::Cosine => Ok((-0.5f64).exp()),
        Payoff::LogCall => {
            // E[(e^Z - K)^+], Z ~ N(-1, 1), K = 1/2
            let k: f64 = 0.5;
            let d1 = -k.ln();
            let d2 = d1 - 1.0;
            Ok((-0.5f64).exp() * normal_cdf(d1) - k * normal_cdf(d2))
        }
        Payoff::User(name, _) => Err(Error::Config(format!(
            "no closed-form Brownian reference for payoff '{name}'"
        ))),
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Checks that a model is the unit-volatility Brownian setup on `[0, 1]`.
pub fn require_fake_bm(vol: &LocalVolSpec<f64>, x0: f64, horizon: f64) -> Result<()> {
    let unit = matches!(vol.variant(), LocalVol::Constant(v) if *v == 1.0);
    if !unit || x0 != 0.0 || horizon != 1.0 {
        return Err(Error::Config(
            "closed-form reference needs sigma = 1, x0 = 0 and T = 1".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetReference {
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
}

impl Default for TargetReference {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            steps: 1000,
            paths: 1_000_000,
        }
    }
}

/// Monte Carlo `(value, stderr)` of `E[f(Y_T)]` for each payoff, from one
/// simulation of the target process. Depends on the local volatility only.
pub fn reference_target(
    vol: &LocalVolSpec<f64>,
    payoffs: &[Payoff],
    seed: u64,
    setup: TargetReference,
) -> Result<Vec<(f64, f64)>> {
    let grid = TimeGrid::with_steps(setup.horizon, setup.steps)?;
    let y = simulate_target(&grid, vol, setup.paths, seed)?;
    payoffs
        .iter()
        .map(|p| {
            let v: Vec<f64> = y.iter().map(|&x| p.eval(x)).collect();
            mc_stats(&v)
        })
        .collect()
}

/// Reference for the tanh model.
pub fn reference_tanh(payoff: &Payoff, seed: u64, setup: TargetReference) -> Result<(f64, f64)> {
    Ok(reference_target(&LocalVolSpec::tanh(), std::slice::from_ref(payoff), seed, setup)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((reference_fake_bm(&Payoff::Cosine).unwrap() - 0.606_530_659_712_633_4).abs() < 1e-15);
        let call = reference_fake_bm(&Payoff::LogCall).unwrap();
        // 50-digit evaluation of the lognormal call formula
        assert!((call - 0.268_732_461_509_236_9).abs() < 1e-13, "{call}");
        assert_eq!((call * 1000.0).round() / 1000.0, 0.269);
    }

    #[test]
    fn tanh_reference_is_reproducible() {
        let setup = TargetReference {
            horizon: 1.0,
            steps: 50,
            paths: 20_000,
        };
        let a = reference_tanh(&Payoff::Cosine, 3, setup).unwrap();
        assert_eq!(a, reference_tanh(&Payoff::Cosine, 3, setup).unwrap());
        assert!(a.1 < 5e-3);
    }
}
