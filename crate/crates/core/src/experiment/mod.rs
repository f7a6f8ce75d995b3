//! Payoffs, references, statistics, sweeps and persistence.

pub mod config;
pub mod payoff;
pub mod rate;
pub mod reference;
pub mod selftest;
pub mod stats;
pub mod sweep;

pub use config::{accuracy_preset, ExperimentConfig, SEED_ENV};
pub use payoff::{payoff_eval, Payoff};
pub use rate::{fit_rate, RateFit};
pub use reference::{reference_fake_bm, reference_tanh, reference_target, TargetReference};
pub use selftest::{run_selftest, Check};
pub use stats::{jackknife_variance_stderr, ks_two_sample, mc_stats, sample_variance, spearman};
pub use sweep::{read_csv, run_cell, run_sweep, write_csv, Cell, SweepResult, CSV_COLUMNS};
