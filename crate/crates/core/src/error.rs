use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("singular estimator at y = {y}: no mass within reach and delta = 0")]
    SingularEstimator { y: f64 },

    #[error("local volatility table queried outside its range at x = {x}")]
    Extrapolation { x: f64 },

    #[error(
        "negative square-root argument {argument:e} at step {step}, particle {particle} \
         (sigma = {sigma}, xi = {xi}, psi = {psi}, c_min = {c_min})"
    )]
    ModelBound {
        step: usize,
        particle: usize,
        argument: f64,
        sigma: f64,
        xi: f64,
        psi: f64,
        c_min: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
