//! Piecewise polynomial performance models and their text format.

mod format;
mod piecewise;
mod polynomial;

pub use format::{deserialize, serialize, FormatError, FORMAT_VERSION};
pub use piecewise::{
    contains, evaluate, subtract, volume, Bounds, CoverViolation, Evaluation, PiecewiseModel,
    Region, RoutineModel, Statistic,
};
pub use polynomial::{Polynomial, PolynomialError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("no model for discrete combination {0:?}")]
    UnknownCombo(String),
    #[error("point has {found} coordinates, model has {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("model has no regions")]
    NoRegions,
    #[error("no polynomial for counter {counter} and statistic {statistic}")]
    MissingPolynomial {
        counter: String,
        statistic: Statistic,
    },
}
