use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone)]
pub enum Payoff {
    Cosine,
    /// `max(e^{x - 1} - 1/2, 0)`.
    LogCall,
    User(String, Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Payoff {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Payoff::Cosine => x.cos(),
            Payoff::LogCall => ((x - 1.0).exp() - 0.5).max(0.0),
            Payoff::User(_, f) => f(x),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Payoff::Cosine => "cosine",
            Payoff::LogCall => "log_call",
            Payoff::User(name, _) => name,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cos" => Ok(Payoff::Cosine),
            "log_call" | "call" => Ok(Payoff::LogCall),
            other => Err(Error::Config(format!("unknown payoff '{other}'"))),
        }
    }
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PartialEq for Payoff {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

pub fn payoff_eval(kind: &Payoff, x: f64) -> f64 {
    kind.eval(x)
}
