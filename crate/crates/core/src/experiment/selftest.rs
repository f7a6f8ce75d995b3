use crate::cond_expectation::{cond_exp_oracle, psi, EvalMode, Estimator, KernelSpec, WeightedSample};
use crate::error::Result;
use crate::market_models::{LocalVolSpec, SchemeParams, StochVolSpec};
use crate::particle_schemes::{run_system, Scheme, SystemConfig};
use crate::stochastic_core::{derive_seed, gaussian_pdf, philox4x32_10, standard_normal, NoiseLabel, TimeGrid};

/// Outcome of one invariant suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn uniform(seed: u64, i: u64, k: u64) -> f64 {
    let z = standard_normal(seed, i, NoiseLabel::HDriver, k);
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

/// Random atomic law with `n` atoms from a counter stream.
pub fn random_sample(seed: u64, n: usize) -> WeightedSample<f64> {
    let xi_sq = (0..n).map(|i| 0.25 + 3.75 * uniform(seed, i as u64, 0)).collect();
    let pos = (0..n).map(|i| 0.3 * standard_normal(seed, i as u64, NoiseLabel::Z, 1)).collect();
    WeightedSample::new(xi_sq, pos).expect("valid random sample")
}

/// Fast invariant suites for the `selftest` command.
pub fn run_selftest() -> Vec<Check> {
    vec![
        check("philox known-answer vectors", || {
            let out = philox4x32_10([0, 0, 0, 0], [0, 0]);
            let ok = out == [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8];
            Ok((ok, format!("{out:08x?}")))
        }),
        check("gaussian density at the origin", || {
            let v: f64 = gaussian_pdf(0.0, 1.0)?;
            Ok(((v - 0.398_942_280_401_432_7).abs() < 1e-15, format!("{v}")))
        }),
        check("mixture estimator matches oracle", || {
            let mut worst: f64 = 0.0;
            for s in 0..20u64 {
                let sample = random_sample(derive_seed(11, &[s]), 1 + (s as usize % 20));
                for &lam in &[1e-5, 1e-3, 1e-1] {
                    for q in 0..20u64 {
                        let y = 0.4 * standard_normal(s, q, NoiseLabel::B, 7);
                        let got = psi(y, &sample, lam, 0.0, 1, EvalMode::Windowed)?;
                        let want = cond_exp_oracle(&sample, lam, y);
                        worst = worst.max(((got - want) / want).abs());
                    }
                }
            }
            Ok((worst <= 1e-8, format!("max relative error {worst:e}")))
        }),
        check("estimators stay within xi bounds", || {
            let mut violations = 0;
            for s in 0..20u64 {
                let sample = random_sample(derive_seed(12, &[s]), 50);
                let ests = [
                    Estimator::Gaussian { lam: 1e-3, delta: 1e-3 },
                    Estimator::Kernel {
                        kernel: KernelSpec::quartic(0.05)?,
                        delta: 1e-3,
                    },
                ];
                for est in &ests {
                    for q in 0..20u64 {
                        let y = 0.5 * standard_normal(s, q, NoiseLabel::B, 3);
                        let v = est.value(y, &sample, 1, EvalMode::Windowed)?;
                        if !(v >= 0.25 * (1.0 - 1e-12) && v <= 4.0 * (1.0 + 1e-12)) {
                            violations += 1;
                        }
                    }
                }
            }
            Ok((violations == 0, format!("{violations} violations")))
        }),
        check("runs are reproducible", || {
            let grid = TimeGrid::with_steps(1.0, 5)?;
            let cfg = SystemConfig::new(
                Scheme::HalfStep,
                grid,
                200,
                LocalVolSpec::tanh(),
                StochVolSpec::rough_bergomi_default(-0.7)?,
                SchemeParams::new(0.05, -0.7, grid.h(), 0.01)?,
                5,
            );
            let a = run_system(&cfg)?;
            let b = run_system(&cfg)?;
            Ok((a.stats == b.stats, "bit-identical terminal values".into()))
        }),
        check("half-step variance identity", || {
            let grid = TimeGrid::with_steps(1.0, 10)?;
            let cfg = SystemConfig::new(
                Scheme::HalfStep,
                grid,
                4000,
                LocalVolSpec::constant(1.0)?,
                StochVolSpec::constant(1.0, -0.7)?,
                SchemeParams::unregularised(0.3, -0.7, grid.h())?,
                9,
            );
            let out = run_system(&cfg)?;
            let mean_qv = out.stats.qv.iter().sum::<f64>() / 4000.0;
            Ok(((mean_qv - 1.0).abs() < 0.05, format!("mean quadratic variation {mean_qv}")))
        }),
    ]
}
