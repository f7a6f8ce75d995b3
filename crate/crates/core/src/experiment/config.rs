use std::path::Path;

use serde::Deserialize;

use crate::cond_expectation::EvalMode;
use crate::error::{Error, Result};
use crate::experiment::payoff::Payoff;
use crate::experiment::reference::TargetReference;
use crate::market_models::{LocalVolSpec, SchemeParams, StochVolSpec};
use crate::particle_schemes::Scheme;
use crate::stochastic_core::NoiseKind;

pub const SEED_ENV: &str = "LSVSIM_SEED";

/// Experiment description read from a TOML file.
///
/// ```toml
/// seed = 42
///
/// [model]
/// local_vol = "constant"      # constant | tanh
/// sigma = 1.0
/// stoch_vol = "rough_bergomi" # constant | rough_bergomi | two_state
/// rho = -0.7
///
/// [scheme]
/// kinds = ["half_step"]
/// c_min = 0.05
///
/// [sweep]
/// steps = [50]                # or h = [0.02]
/// n = [8000]
/// delta = [0.001]
/// payoffs = ["cosine", "log_call"]
///
/// [reference]
/// kind = "fake_bm"            # fake_bm | target_mc
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Write measured wall time into `runtime_ms`; off keeps CSVs byte-stable.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    /// Sets `h ~ gamma`, `delta ~ gamma`, `epsilon ~ gamma^2` for a target
    /// accuracy `gamma`, replacing the sweep lists.
    #[serde(default)]
    pub target_error: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub horizon: f64,
    pub x0: f64,
    pub local_vol: String,
    pub sigma: f64,
    pub stoch_vol: String,
    pub kappa: f64,
    pub hurst: f64,
    pub floor: f64,
    pub scale: f64,
    pub xi_low: f64,
    pub xi_high: f64,
    pub rho: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            horizon: 1.0,
            x0: 0.0,
            local_vol: "constant".into(),
            sigma: 1.0,
            stoch_vol: "rough_bergomi".into(),
            kappa: 1.0,
            hurst: 0.1,
            floor: 0.01,
            scale: 0.5,
            xi_low: 0.5,
            xi_high: 1.5,
            rho: -0.7,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeSection {
    pub kinds: Vec<String>,
    /// Overrides `a c / (2 b)`; required when `xi` is unbounded.
    pub c_min: Option<f64>,
    pub strict: bool,
    /// `windowed` or `naive` estimator evaluation.
    pub evaluation: String,
    /// `per_step` or `dyadic`.
    pub noise: String,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kinds: vec!["half_step".into()],
            c_min: None,
            strict: false,
            evaluation: "windowed".into(),
            noise: "per_step".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub steps: Vec<usize>,
    pub h: Vec<f64>,
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    /// Explicit bandwidths; otherwise `epsilon = h^epsilon_power`.
    pub epsilon: Vec<f64>,
    pub epsilon_power: f64,
    pub payoffs: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            steps: Vec::new(),
            h: Vec::new(),
            n: vec![1000],
            delta: vec![0.001],
            epsilon: Vec::new(),
            epsilon_power: 2.0,
            payoffs: vec!["cosine".into()],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    /// `fake_bm`, `target_mc` or `none`.
    pub kind: String,
    pub steps: usize,
    pub paths: usize,
    pub seed: Option<u64>,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        let d = TargetReference::default();
        Self {
            kind: "fake_bm".into(),
            steps: d.steps,
            paths: d.paths,
            seed: None,
        }
    }
}

/// `(steps, delta, epsilon)` for a target accuracy `gamma`: `h ~ gamma`,
/// `delta ~ gamma`, `epsilon ~ gamma^2`.
pub fn accuracy_preset(gamma: f64, horizon: f64) -> Result<(usize, f64, f64)> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::Config(format!("target error must lie in (0, 1/2), got {gamma}")));
    }
    let steps = (horizon / gamma).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    Ok((steps, gamma, h * h))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.apply_env()?;
        cfg.apply_preset()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got '{v}'")))?;
        }
        Ok(())
    }

    fn apply_preset(&mut self) -> Result<()> {
        if let Some(gamma) = self.target_error {
            let (steps, delta, eps) = accuracy_preset(gamma, self.model.horizon)?;
            self.sweep.steps = vec![steps];
            self.sweep.h.clear();
            self.sweep.delta = vec![delta];
            self.sweep.epsilon = vec![eps];
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.local_vol()?;
        self.stoch_vol()?;
        self.schemes()?;
        self.payoffs()?;
        self.evaluation()?;
        self.noise_kind()?;
        if self.sweep.n.is_empty() || self.sweep.n.contains(&0) {
            return Err(Error::Config("sweep.n needs positive particle counts".into()));
        }
        if self.sweep.delta.is_empty() {
            return Err(Error::Config("sweep.delta is empty".into()));
        }
        for &d in &self.sweep.delta {
            if !(d > 0.0 && d < 0.5) {
                return Err(Error::Config(format!("delta must lie in (0, 1/2), got {d}")));
            }
        }
        let steps = self.step_counts()?;
        if steps.is_empty() {
            return Err(Error::Config("sweep needs steps or h values".into()));
        }
        if self.schemes()?.contains(&Scheme::NwEuler) {
            for &n in &steps {
                let h = self.model.horizon / n as f64;
                for eps in self.epsilons(h) {
                    if !(eps > 0.0 && eps <= h) {
                        return Err(Error::Config(format!("epsilon {eps} must lie in (0, h = {h}]")));
                    }
                }
            }
        }
        match self.reference.kind.as_str() {
            "fake_bm" | "target_mc" | "none" => Ok(()),
            other => Err(Error::Config(format!("unknown reference kind '{other}'"))),
        }
    }

    /// Step counts of the sweep, from `steps` or from `h` (each `T / h` must
    /// be integral).
    pub fn step_counts(&self) -> Result<Vec<usize>> {
        let mut out = self.sweep.steps.clone();
        for &h in &self.sweep.h {
            let g = crate::stochastic_core::TimeGrid::new(self.model.horizon, h)?;
            out.push(g.n_steps());
        }
        Ok(out)
    }

    pub fn epsilons(&self, h: f64) -> Vec<f64> {
        if self.sweep.epsilon.is_empty() {
            vec![h.powf(self.sweep.epsilon_power)]
        } else {
            self.sweep.epsilon.clone()
        }
    }

    pub fn schemes(&self) -> Result<Vec<Scheme>> {
        if self.scheme.kinds.is_empty() {
            return Err(Error::Config("scheme.kinds is empty".into()));
        }
        let out = self
            .scheme
            .kinds
            .iter()
            .map(|s| Scheme::parse(s))
            .collect::<Result<Vec<_>>>()?;
        if out.contains(&Scheme::GaussianEuler) {
            return Err(Error::Config("gaussian_euler needs a frozen ensemble and cannot be swept".into()));
        }
        Ok(out)
    }

    pub fn payoffs(&self) -> Result<Vec<Payoff>> {
        if self.sweep.payoffs.is_empty() {
            return Err(Error::Config("sweep.payoffs is empty".into()));
        }
        self.sweep.payoffs.iter().map(|s| Payoff::parse(s)).collect()
    }

    pub fn evaluation(&self) -> Result<EvalMode> {
        match self.scheme.evaluation.as_str() {
            "windowed" => Ok(EvalMode::Windowed),
            "naive" => Ok(EvalMode::Naive),
            other => Err(Error::Config(format!("unknown evaluation '{other}'"))),
        }
    }

    pub fn noise_kind(&self) -> Result<NoiseKind> {
        match self.scheme.noise.as_str() {
            "per_step" => Ok(NoiseKind::PerStep),
            "dyadic" => Ok(NoiseKind::Dyadic),
            other => Err(Error::Config(format!("unknown noise '{other}'"))),
        }
    }

    pub fn local_vol(&self) -> Result<LocalVolSpec<f64>> {
        match self.model.local_vol.as_str() {
            "constant" => LocalVolSpec::constant(self.model.sigma),
            "tanh" => Ok(LocalVolSpec::tanh()),
            other => Err(Error::Config(format!("unknown local_vol '{other}'"))),
        }
    }

    pub fn stoch_vol(&self) -> Result<StochVolSpec<f64>> {
        let m = &self.model;
        match m.stoch_vol.as_str() {
            "constant" => StochVolSpec::constant(m.kappa, m.rho),
            "rough_bergomi" => StochVolSpec::rough_bergomi(m.hurst, m.floor, m.scale, m.rho),
            "two_state" => StochVolSpec::two_state(m.xi_low, m.xi_high, m.rho),
            other => Err(Error::Config(format!("unknown stoch_vol '{other}'"))),
        }
    }

    /// `c_min` from the config or from the declared bounds.
    pub fn c_min(&self) -> Result<f64> {
        if let Some(c) = self.scheme.c_min {
            if !(c > 0.0) {
                return Err(Error::Config(format!("c_min must be positive, got {c}")));
            }
            return Ok(c);
        }
        let sv = self.stoch_vol()?;
        if !sv.has_finite_bounds() {
            return Err(Error::Config("unbounded xi: set scheme.c_min explicitly".into()));
        }
        let lv = self.local_vol()?;
        crate::market_models::c_min_from_bounds(sv.lower_bound(), sv.upper_bound(), lv.lower_bound())
    }

    pub fn params(&self, steps: usize, delta: f64, epsilon: Option<f64>) -> Result<SchemeParams<f64>> {
        let h = self.model.horizon / steps as f64;
        let p = SchemeParams::new(self.c_min()?, self.model.rho, h, delta)?;
        match epsilon {
            Some(e) => p.with_epsilon(e),
            None => Ok(p),
        }
    }

    pub fn reference_setup(&self) -> TargetReference {
        TargetReference {
            horizon: self.model.horizon,
            steps: self.reference.steps,
            paths: self.reference.paths,
        }
    }
}
