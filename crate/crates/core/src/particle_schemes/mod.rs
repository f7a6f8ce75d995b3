//! Time stepping: the target Euler process, the half-step particle system and
//! the classical Euler system with a plug-in conditional-moment estimator.

pub mod state;
pub mod step;
pub mod system;
pub mod target;

pub use state::{quad_var_variance, ParticleState, PathStats};
pub use step::{
    euler_advance, half_step_advance, nw_euler_advance, Conditioner, StepContext, StepNoise, StepReport,
};
pub use system::{run_system, Conditioning, FrozenEnsemble, RunOutput, Scheme, SystemConfig};
pub use target::{simulate_target, simulate_target_with, TargetConfig};
