use rayon::prelude::*;

use crate::cond_expectation::{Estimator, EvalMode, WeightedSample};
use crate::error::{domain, Error, Result};
use crate::market_models::{LocalVolSpec, SchemeParams};
use crate::particle_schemes::state::ParticleState;
use crate::scalar::Real;

/// Source of `E[xi^2 | X = y]` for one step. Every particle of the step reads
/// the same frozen snapshot.
#[derive(Debug, Clone, Copy)]
pub enum Conditioner<'a, T> {
    /// Constant estimate (the first step uses the ensemble mean of `xi_0^2`).
    Mean(T),
    Sample {
        estimator: &'a Estimator<T>,
        sample: &'a WeightedSample<T>,
        j: usize,
        mode: EvalMode,
    },
}

impl<T: Real> Conditioner<'_, T> {
    pub fn value(&self, y: T) -> Result<T> {
        match self {
            Conditioner::Mean(m) => Ok(*m),
            Conditioner::Sample {
                estimator,
                sample,
                j,
                mode,
            } => estimator.value(y, sample, *j, *mode),
        }
    }
}

/// Brownian increments of one step, one entry per particle. `d_z` is only
/// read by the half-step scheme.
#[derive(Debug, Clone, Copy)]
pub struct StepNoise<'a, T> {
    pub d_b: &'a [T],
    pub d_bbar: &'a [T],
    pub d_z: &'a [T],
}

/// Model data shared by every particle of a step.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a, T> {
    pub local_vol: &'a LocalVolSpec<T>,
    pub params: &'a SchemeParams<T>,
    pub strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    /// Largest diffusion coefficient realised during the step.
    pub max_diffusion: T,
    /// Smallest square-root argument `s^2 - c_min^2` before clamping;
    /// infinite for the Euler schemes.
    pub min_argument: T,
}

fn check_lengths<T>(state: &ParticleState<T>, noise: &StepNoise<'_, T>, need_z: bool) -> Result<()> {
    let n = state.x.len();
    if noise.d_b.len() != n || noise.d_bbar.len() != n || (need_z && noise.d_z.len() != n) {
        return Err(domain(format!("step noise does not match {n} particles")));
    }
    if state.xi.len() != n || state.x_half.len() != n {
        return Err(domain("state arrays have inconsistent lengths"));
    }
    Ok(())
}

fn positive_estimate<T: Real>(psi: T, y: T) -> Result<T> {
    if psi > T::zero() && psi.is_finite() {
        Ok(psi)
    } else {
        Err(Error::SingularEstimator { y: y.to_f64_lossy() })
    }
}

/// One step of the half-step scheme.
///
/// `X_half = X + s rho dB + sqrt(s^2 - c_min^2) rho_bar dWbar` with
/// `s = sigma xi / sqrt(Psi)`, then `X = X_half + c_min rho_bar dZ`.
pub fn half_step_advance<T: Real>(
    state: &mut ParticleState<T>,
    ctx: &StepContext<'_, T>,
    cond: &Conditioner<'_, T>,
    noise: &StepNoise<'_, T>,
) -> Result<StepReport<T>> {
    check_lengths(state, noise, true)?;
    let p = ctx.params;
    let t = p.h * T::of_usize(state.j);
    let c2 = p.c_min * p.c_min;
    let rows: Vec<Result<(T, T, T, T)>> = (0..state.x.len())
        .into_par_iter()
        .map(|i| {
            let x = state.x[i];
            let xi = state.xi[i];
            let sigma = ctx.local_vol.sigma(t, x)?;
            let psi = positive_estimate(cond.value(x)?, x)?;
            let s2 = sigma * sigma * xi * xi / psi;
            let arg = s2 - c2;
            if arg < T::zero() && ctx.strict {
                return Err(Error::ModelBound {
                    step: state.j,
                    particle: i,
                    argument: arg.to_f64_lossy(),
                    sigma: sigma.to_f64_lossy(),
                    xi: xi.to_f64_lossy(),
                    psi: psi.to_f64_lossy(),
                    c_min: p.c_min.to_f64_lossy(),
                });
            }
            let kept = arg.max(T::zero());
            let half = x + s2.sqrt() * p.rho * noise.d_b[i] + kept.sqrt() * p.rho_bar * noise.d_bbar[i];
            let full = half + p.c_min * p.rho_bar * noise.d_z[i];
            let rb2 = p.rho_bar * p.rho_bar;
            let diffusion = (p.rho * p.rho * s2 + rb2 * (kept + c2)).sqrt();
            Ok((full, half, arg, diffusion))
        })
        .collect();
    let mut max_diffusion = T::zero();
    let mut min_argument = T::infinity();
    for (i, row) in rows.into_iter().enumerate() {
        let (full, half, raw, diffusion) = row?;
        state.x[i] = full;
        state.x_half[i] = half;
        state.clamp_count += (raw < T::zero()) as usize;
        max_diffusion = max_diffusion.max(diffusion);
        min_argument = min_argument.min(raw);
    }
    state.j += 1;
    Ok(StepReport {
        max_diffusion,
        min_argument,
    })
}

/// One classical Euler step `X += sigma xi Psi^{-1/2} (rho dB + rho_bar dBbar)`.
///
/// The conditioner decides the scheme: Nadaraya-Watson on current positions,
/// or a frozen Gaussian-mixture reference.
pub fn euler_advance<T: Real>(
    state: &mut ParticleState<T>,
    ctx: &StepContext<'_, T>,
    cond: &Conditioner<'_, T>,
    noise: &StepNoise<'_, T>,
) -> Result<StepReport<T>> {
    check_lengths(state, noise, false)?;
    let p = ctx.params;
    let t = p.h * T::of_usize(state.j);
    let rows: Vec<Result<(T, T)>> = (0..state.x.len())
        .into_par_iter()
        .map(|i| {
            let x = state.x[i];
            let sigma = ctx.local_vol.sigma(t, x)?;
            let psi = positive_estimate(cond.value(x)?, x)?;
            let s = sigma * state.xi[i] / psi.sqrt();
            let dw = p.rho * noise.d_b[i] + p.rho_bar * noise.d_bbar[i];
            Ok((x + s * dw, s.abs()))
        })
        .collect();
    let mut max_diffusion = T::zero();
    for (i, row) in rows.into_iter().enumerate() {
        let (next, s) = row?;
        state.x[i] = next;
        state.x_half[i] = next;
        max_diffusion = max_diffusion.max(s);
    }
    state.j += 1;
    Ok(StepReport {
        max_diffusion,
        min_argument: T::infinity(),
    })
}

/// Nadaraya-Watson Euler step: conditions on the current positions.
pub fn nw_euler_advance<T: Real>(
    state: &mut ParticleState<T>,
    ctx: &StepContext<'_, T>,
    estimator: &Estimator<T>,
    mode: EvalMode,
    noise: &StepNoise<'_, T>,
) -> Result<StepReport<T>> {
    if state.j == 0 {
        let mean = ensemble_mean_sq(&state.xi);
        return euler_advance(state, ctx, &Conditioner::Mean(mean), noise);
    }
    let sample = WeightedSample::from_xi(&state.xi, state.x.clone())?;
    let cond = Conditioner::Sample {
        estimator,
        sample: &sample,
        j: state.j,
        mode,
    };
    euler_advance(state, ctx, &cond, noise)
}

pub(crate) fn ensemble_mean_sq<T: Real>(xi: &[T]) -> T {
    let sq: Vec<T> = xi.iter().map(|&v| v * v).collect();
    crate::scalar::pairwise_sum(&sq) / T::of_usize(xi.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_parts() -> (LocalVolSpec<f64>, SchemeParams<f64>) {
        (
            LocalVolSpec::tanh(),
            SchemeParams::unregularised(0.2, -0.5, 0.1).unwrap(),
        )
    }

    #[test]
    fn full_minus_half_is_the_z_increment() {
        let (vol, params) = ctx_parts();
        let ctx = StepContext {
            local_vol: &vol,
            params: &params,
            strict: true,
        };
        let mut s = ParticleState::new(4, 0.1, vec![1.0, 0.8, 1.2, 0.9]).unwrap();
        let db = [0.1, -0.2, 0.05, 0.3];
        let dbb = [-0.1, 0.2, 0.0, 0.4];
        let dz = [0.3, 0.1, -0.25, 0.02];
        let noise = StepNoise {
            d_b: &db,
            d_bbar: &dbb,
            d_z: &dz,
        };
        half_step_advance(&mut s, &ctx, &Conditioner::Mean(1.0), &noise).unwrap();
        for i in 0..4 {
            assert_eq!(s.x[i], s.x_half[i] + params.c_min * params.rho_bar * dz[i]);
        }
        assert_eq!(s.j, 1);
    }

    #[test]
    fn strict_mode_reports_negative_argument() {
        let vol = LocalVolSpec::constant(0.1).unwrap();
        let params = SchemeParams::unregularised(0.5, 0.0, 0.1).unwrap();
        let mut ctx = StepContext {
            local_vol: &vol,
            params: &params,
            strict: true,
        };
        let z = [0.0];
        let noise = StepNoise {
            d_b: &z,
            d_bbar: &z,
            d_z: &z,
        };
        let mut s = ParticleState::new(1, 0.0, vec![1.0]).unwrap();
        let err = half_step_advance(&mut s, &ctx, &Conditioner::Mean(1.0), &noise).unwrap_err();
        assert!(matches!(err, Error::ModelBound { step: 0, particle: 0, .. }));
        ctx.strict = false;
        half_step_advance(&mut s, &ctx, &Conditioner::Mean(1.0), &noise).unwrap();
        assert_eq!(s.clamp_count, 1);
    }

    #[test]
    fn permuting_particles_permutes_the_update() {
        let (vol, params) = ctx_parts();
        let ctx = StepContext {
            local_vol: &vol,
            params: &params,
            strict: false,
        };
        let xs = [0.3, -0.1, 0.05, 0.2, -0.4];
        let xi = [1.0, 0.7, 1.1, 0.9, 1.3];
        let db = [0.1, -0.2, 0.05, 0.3, 0.0];
        let dbb = [-0.1, 0.2, 0.0, 0.4, -0.3];
        let dz = [0.3, 0.1, -0.25, 0.02, 0.11];
        let sample = WeightedSample::from_xi(&xi, xs.to_vec()).unwrap();
        let est = Estimator::Gaussian {
            lam: params.lam,
            delta: 0.01,
        };
        let run = |perm: &[usize]| {
            let pick = |a: &[f64]| perm.iter().map(|&k| a[k]).collect::<Vec<_>>();
            let mut s = ParticleState::new(5, 0.0, pick(&xi)).unwrap();
            s.x = pick(&xs);
            s.j = 1;
            let (b, bb, z) = (pick(&db), pick(&dbb), pick(&dz));
            let cond = Conditioner::Sample {
                estimator: &est,
                sample: &sample,
                j: 1,
                mode: EvalMode::Windowed,
            };
            let noise = StepNoise {
                d_b: &b,
                d_bbar: &bb,
                d_z: &z,
            };
            half_step_advance(&mut s, &ctx, &cond, &noise).unwrap();
            s.x
        };
        let base = run(&[0, 1, 2, 3, 4]);
        let perm = [3, 0, 4, 1, 2];
        let moved = run(&perm);
        for (slot, &k) in perm.iter().enumerate() {
            assert_eq!(moved[slot], base[k]);
        }
    }
}
