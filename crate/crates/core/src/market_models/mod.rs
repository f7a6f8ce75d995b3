//! Local volatility, stochastic volatility and the derived scheme constants.

pub mod local_vol;
pub mod params;
pub mod stoch_vol;

pub use local_vol::{sigma_eval, LocalVol, LocalVolSpec, LocalVolTable};
pub use params::{c_min_from_bounds, lambda_of, SchemeParams};
pub use stoch_vol::{xi_path, StochVol, StochVolSpec, XiFn, XiSampler};
