use std::sync::Arc;

use rayon::prelude::*;

use crate::cond_expectation::{Estimator, EvalMode, KernelSpec, WeightedSample};
use crate::error::{domain, Error, Result};
use crate::market_models::{LocalVolSpec, SchemeParams, StochVol, StochVolSpec};
use crate::particle_schemes::state::{ParticleState, PathStats};
use crate::particle_schemes::step::{
    ensemble_mean_sq, euler_advance, half_step_advance, Conditioner, StepContext, StepNoise,
};
use crate::scalar::Real;
use crate::stochastic_core::{NoiseLabel, NoiseSource, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Half-step scheme with the Gaussian-mixture estimator.
    HalfStep,
    /// Classical Euler with the Nadaraya-Watson estimator on current positions.
    NwEuler,
    /// Classical Euler with the Gaussian-mixture estimator read from a frozen
    /// half-step ensemble. Needs [`Conditioning::Frozen`].
    GaussianEuler,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::HalfStep => "half_step",
            Scheme::NwEuler => "nw_euler",
            Scheme::GaussianEuler => "gaussian_euler",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "half_step" => Ok(Scheme::HalfStep),
            "nw_euler" => Ok(Scheme::NwEuler),
            "gaussian_euler" => Ok(Scheme::GaussianEuler),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Conditioning snapshots of an earlier run: `psi0` for the first step and
/// `samples[j - 1]` for step `j >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenEnsemble<T> {
    pub psi0: T,
    pub samples: Vec<WeightedSample<T>>,
}

#[derive(Debug, Clone, Default)]
pub enum Conditioning<T> {
    /// Estimator fed by the running ensemble.
    #[default]
    Interacting,
    /// Estimator fed by an independent reference ensemble; the particles no
    /// longer interact.
    Frozen(Arc<FrozenEnsemble<T>>),
}

#[derive(Debug, Clone)]
pub struct SystemConfig<T> {
    pub scheme: Scheme,
    pub grid: TimeGrid<T>,
    pub n_particles: usize,
    pub x0: T,
    pub local_vol: LocalVolSpec<T>,
    pub stoch_vol: StochVolSpec<T>,
    pub params: SchemeParams<T>,
    /// Nadaraya-Watson kernel; the quartic kernel at `params.epsilon` if unset.
    pub kernel: Option<KernelSpec<T>>,
    pub noise: NoiseSource,
    pub strict: bool,
    pub mode: EvalMode,
    pub conditioning: Conditioning<T>,
    pub record_snapshots: bool,
}

impl<T: Real> SystemConfig<T> {
    /// Interacting run with per-step noise, windowed evaluation and no
    /// snapshots.
    pub fn new(
        scheme: Scheme,
        grid: TimeGrid<T>,
        n_particles: usize,
        local_vol: LocalVolSpec<T>,
        stoch_vol: StochVolSpec<T>,
        params: SchemeParams<T>,
        seed: u64,
    ) -> Self {
        Self {
            scheme,
            grid,
            n_particles,
            x0: T::zero(),
            local_vol,
            stoch_vol,
            params,
            kernel: None,
            noise: NoiseSource::new(seed),
            strict: false,
            mode: EvalMode::Windowed,
            conditioning: Conditioning::Interacting,
            record_snapshots: false,
        }
    }

    pub fn estimator(&self) -> Result<Estimator<T>> {
        let p = &self.params;
        match self.scheme {
            Scheme::HalfStep | Scheme::GaussianEuler => Ok(Estimator::Gaussian {
                lam: p.lam,
                delta: p.delta,
            }),
            Scheme::NwEuler => {
                let kernel = match (&self.kernel, p.epsilon) {
                    (Some(k), _) => k.clone(),
                    (None, Some(eps)) => KernelSpec::quartic(eps)?,
                    (None, None) => {
                        return Err(Error::Config("nw_euler needs a bandwidth epsilon".into()))
                    }
                };
                Ok(Estimator::Kernel {
                    kernel,
                    delta: p.delta,
                })
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(domain("run_system needs at least one particle"));
        }
        if (self.params.h - self.grid.h()).abs() > T::of(1e-12) * self.grid.h() && self.grid.n_steps() > 0 {
            return Err(Error::Config(format!(
                "scheme step {} differs from grid step {}",
                self.params.h,
                self.grid.h()
            )));
        }
        if self.params.rho != self.stoch_vol.rho() {
            return Err(Error::Config(format!(
                "scheme correlation {} differs from the model's {}",
                self.params.rho,
                self.stoch_vol.rho()
            )));
        }
        if self.scheme == Scheme::GaussianEuler && matches!(self.conditioning, Conditioning::Interacting) {
            return Err(Error::Config("gaussian_euler needs a frozen reference ensemble".into()));
        }
        if let Conditioning::Frozen(f) = &self.conditioning {
            let need = self.grid.n_steps().saturating_sub(1);
            if f.samples.len() < need {
                return Err(Error::Config(format!(
                    "frozen ensemble has {} snapshots, run needs {need}",
                    f.samples.len()
                )));
            }
        }
        self.noise.check_grid(&self.grid)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    pub stats: PathStats<T>,
    pub state: ParticleState<T>,
    /// Conditioning snapshots of an interacting run, when recorded.
    pub snapshots: Option<FrozenEnsemble<T>>,
}

struct Noise<T> {
    n: usize,
    b: Vec<T>,
    bbar: Vec<T>,
    z: Vec<T>,
    /// `n + 1` values per particle; empty for constant `xi`.
    xi: Vec<T>,
}

impl<T: Real> Noise<T> {
    fn draw(cfg: &SystemConfig<T>) -> Result<Self> {
        let n = cfg.grid.n_steps();
        let half = cfg.scheme == Scheme::HalfStep;
        let constant_xi = matches!(cfg.stoch_vol.variant(), StochVol::Constant(_));
        let sampler = cfg.stoch_vol.sampler(cfg.grid)?;
        let rows: Vec<Result<[Vec<T>; 4]>> = (0..cfg.n_particles)
            .into_par_iter()
            .map(|i| {
                let b = cfg.noise.increments(&cfg.grid, i, NoiseLabel::B)?;
                let bbar = cfg.noise.increments(&cfg.grid, i, NoiseLabel::Bbar)?;
                let z = if half {
                    cfg.noise.increments(&cfg.grid, i, NoiseLabel::Z)?
                } else {
                    Vec::new()
                };
                let xi = if constant_xi { Vec::new() } else { sampler.path(&b)? };
                Ok([b, bbar, z, xi])
            })
            .collect();
        let cap = cfg.n_particles * n;
        let mut out = Self {
            n,
            b: Vec::with_capacity(cap),
            bbar: Vec::with_capacity(cap),
            z: Vec::with_capacity(if half { cap } else { 0 }),
            xi: Vec::new(),
        };
        for row in rows {
            let [b, bbar, z, xi] = row?;
            out.b.extend(b);
            out.bbar.extend(bbar);
            out.z.extend(z);
            out.xi.extend(xi);
        }
        Ok(out)
    }

    fn column(v: &[T], stride: usize, j: usize, n_particles: usize) -> Vec<T> {
        if v.is_empty() {
            return Vec::new();
        }
        (0..n_particles).map(|i| v[i * stride + j]).collect()
    }

    fn xi_at(&self, j: usize, n_particles: usize, spec: &StochVolSpec<T>) -> Vec<T> {
        match spec.variant() {
            StochVol::Constant(k) => vec![*k; n_particles],
            _ => Self::column(&self.xi, self.n + 1, j, n_particles),
        }
    }
}

/// Runs the particle system for `n_steps` steps.
///
/// Output is a pure function of the configuration: every particle reads its
/// own counter-based streams and every reduction runs in index order, so the
/// thread count does not matter.
pub fn run_system<T: Real>(cfg: &SystemConfig<T>) -> Result<RunOutput<T>> {
    cfg.validate()?;
    let n_particles = cfg.n_particles;
    let estimator = cfg.estimator()?;
    let noise = Noise::draw(cfg)?;
    let n = noise.n;
    let mut state = ParticleState::new(n_particles, cfg.x0, noise.xi_at(0, n_particles, &cfg.stoch_vol))?;
    let mut stats = PathStats::new(n_particles, cfg.x0);
    let ctx = StepContext {
        local_vol: &cfg.local_vol,
        params: &cfg.params,
        strict: cfg.strict,
    };
    let psi0 = match &cfg.conditioning {
        Conditioning::Interacting => ensemble_mean_sq(&state.xi),
        Conditioning::Frozen(f) => f.psi0,
    };
    let record = cfg.record_snapshots && matches!(cfg.conditioning, Conditioning::Interacting);
    let mut snapshots = Vec::new();
    for j in 0..n {
        let d_b = Noise::column(&noise.b, n, j, n_particles);
        let d_bbar = Noise::column(&noise.bbar, n, j, n_particles);
        let d_z = Noise::column(&noise.z, n, j, n_particles);
        let step_noise = StepNoise {
            d_b: &d_b,
            d_bbar: &d_bbar,
            d_z: &d_z,
        };
        let owned;
        let sample = if j == 0 {
            None
        } else {
            match &cfg.conditioning {
                Conditioning::Frozen(f) => Some(&f.samples[j - 1]),
                Conditioning::Interacting => {
                    let positions = match cfg.scheme {
                        Scheme::HalfStep => state.x_half.clone(),
                        _ => state.x.clone(),
                    };
                    owned = WeightedSample::from_xi(&state.xi, positions)?;
                    Some(&owned)
                }
            }
        };
        let cond = match sample {
            None => Conditioner::Mean(psi0),
            Some(sample) => Conditioner::Sample {
                estimator: &estimator,
                sample,
                j,
                mode: cfg.mode,
            },
        };
        let prev = state.x.clone();
        let report = match cfg.scheme {
            Scheme::HalfStep => half_step_advance(&mut state, &ctx, &cond, &step_noise)?,
            Scheme::NwEuler | Scheme::GaussianEuler => euler_advance(&mut state, &ctx, &cond, &step_noise)?,
        };
        if record {
            if let Some(s) = sample {
                snapshots.push(s.clone());
            }
        }
        stats.max_diffusion = stats.max_diffusion.max(report.max_diffusion);
        stats.min_argument = stats.min_argument.min(report.min_argument);
        for i in 0..n_particles {
            let dx = state.x[i] - prev[i];
            stats.qv[i] = stats.qv[i] + dx * dx;
            stats.max_abs_x[i] = stats.max_abs_x[i].max(state.x[i].abs());
        }
        state.xi = noise.xi_at(j + 1, n_particles, &cfg.stoch_vol);
    }
    stats.terminal_x = state.x.clone();
    Ok(RunOutput {
        stats,
        state,
        snapshots: record.then_some(FrozenEnsemble { psi0, samples: snapshots }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_bm(scheme: Scheme, n: usize, steps: usize, seed: u64) -> SystemConfig<f64> {
        let grid = TimeGrid::with_steps(1.0, steps).unwrap();
        let sv = StochVolSpec::constant(1.0, -0.5).unwrap();
        let params = SchemeParams::unregularised(0.3, -0.5, grid.h()).unwrap();
        let params = if scheme == Scheme::NwEuler {
            params.with_epsilon(grid.h() * grid.h()).unwrap()
        } else {
            params
        };
        SystemConfig::new(scheme, grid, n, LocalVolSpec::constant(1.0).unwrap(), sv, params, seed)
    }

    #[test]
    fn zero_steps_returns_start() {
        let mut cfg = fake_bm(Scheme::HalfStep, 5, 1, 1);
        cfg.grid = TimeGrid::with_steps(0.0, 0).unwrap();
        cfg.x0 = 0.25;
        let out = run_system(&cfg).unwrap();
        assert_eq!(out.stats.terminal_x, vec![0.25; 5]);
        assert_eq!(out.stats.qv, vec![0.0; 5]);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let grid = TimeGrid::with_steps(1.0, 10).unwrap();
        let sv = StochVolSpec::rough_bergomi_default(-0.7).unwrap();
        let params = SchemeParams::new(0.05, -0.7, grid.h(), 0.01).unwrap();
        let cfg = SystemConfig::new(Scheme::HalfStep, grid, 300, LocalVolSpec::tanh(), sv, params, 77);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_system(&cfg).unwrap())
        };
        let a = run(1);
        let b = run(8);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn constant_xi_nw_reduces_to_target_euler() {
        use crate::particle_schemes::target::{simulate_target_with, TargetConfig};
        let cfg = fake_bm(Scheme::NwEuler, 50, 8, 4);
        let mut cfg = cfg;
        cfg.local_vol = LocalVolSpec::tanh();
        let out = run_system(&cfg).unwrap();
        let y = simulate_target_with(&TargetConfig {
            grid: cfg.grid,
            x0: 0.0,
            local_vol: LocalVolSpec::tanh(),
            n_paths: 50,
            noise: cfg.noise,
            rho: -0.5,
        })
        .unwrap();
        assert_eq!(out.stats.terminal_x, y);
    }

    #[test]
    fn gaussian_euler_requires_frozen_reference() {
        let cfg = fake_bm(Scheme::GaussianEuler, 5, 2, 1);
        assert!(matches!(run_system(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn snapshots_cover_every_step_after_the_first() {
        let mut cfg = fake_bm(Scheme::HalfStep, 20, 6, 2);
        cfg.record_snapshots = true;
        let out = run_system(&cfg).unwrap();
        let snap = out.snapshots.unwrap();
        assert_eq!(snap.samples.len(), 5);
        assert_eq!(snap.psi0, 1.0);
    }
}
