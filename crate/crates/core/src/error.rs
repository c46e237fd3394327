use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, matrix norm {norm:e})")]
    NonConvergence {
        sweeps: usize,
        off_norm: f64,
        norm: f64,
    },

    #[error("chart degenerate at u = {u:?}: smallest singular value {sigma_min:e}")]
    ChartDegenerate { u: Vec<f64>, sigma_min: f64 },

    #[error("normal frame gauge discontinuity near u = {u:?}: alignment {alignment}")]
    Gauge { u: Vec<f64>, alignment: f64 },

    #[error("non-finite value {value} at node {node} (u = {u:?})")]
    NonFinite {
        node: usize,
        u: Vec<f64>,
        value: f64,
    },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),
}
