use thiserror::Error;

use crate::config::ConfigError;
use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("expression error in {context}: {source}")]
    ExprIn {
        context: String,
        #[source]
        source: ExprError,
    },

    #[error("invalid convex set: {0}")]
    InvalidSet(String),

    #[error("direction is not a unit vector (norm {0})")]
    InvalidDirection(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integration region at {point:?} leaves the grid of the exhaustion member")]
    GridCoverage { point: Vec<f64> },

    #[error("multimap envelopes cross at x = {point:?}, u = {u:?}: lower {lower} > upper {upper}")]
    InvalidMultimap {
        point: Vec<f64>,
        u: Vec<f64>,
        lower: f64,
        upper: f64,
    },

    #[error("weight function is negative ({value}) at {point:?}")]
    NegativeWeightFunction { point: Vec<f64>, value: f64 },

    #[error("no weight L <= 2^20 brings the weighted integral {best} below the target {target}")]
    WeightSelectionFailed { target: f64, best: f64 },

    #[error("boundary condition fails: {0}")]
    BoundaryCondition(String),

    #[error("no contraction margin: sup phi(x)/x = {0} >= 1 on (0, r_n]")]
    NoContractionMargin(f64),

    #[error("iteration is not contracting: median step ratio {ratio} over the last {window} steps")]
    NonContractive { ratio: f64, window: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("incompatible boundary traces at {point:?}: {left} vs {right}")]
    IncompatibleTraces {
        point: Vec<f64>,
        left: f64,
        right: f64,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn expr_in(context: impl Into<String>) -> impl FnOnce(ExprError) -> Error {
        let context = context.into();
        move |source| Error::ExprIn { context, source }
    }
}
