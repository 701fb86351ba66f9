use thiserror::Error;

use crate::geodesic::GeodesicResult;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("point {coords:?} lies outside the chart domain of {chart}")]
    Domain { chart: String, coords: Vec<f64> },

    #[error("metric is degenerate at {coords:?} (pivot ratio {ratio:e})")]
    Degenerate { coords: Vec<f64>, ratio: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("physics error: {0}")]
    Physics(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("geodesic terminated at parameter {reached} before {requested}")]
    Incomplete {
        requested: f64,
        reached: f64,
        result: Box<GeodesicResult>,
    },

    #[error("geodesic shooting failed to converge: {0}")]
    Shooting(String),

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
