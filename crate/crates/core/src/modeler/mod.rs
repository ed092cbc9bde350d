//! Automatic construction of piecewise polynomial models from samples.
//!
//! A build samples each discrete combination of a routine at planned
//! points, fits the median of a target counter, and lays out regions
//! either by growing them from seeds or by bisecting the domain. All other
//! counters and statistics are then fitted on the final regions.

mod build;
mod config;
mod fit;
mod plan;
mod source;
mod stats;

pub use build::{build_routine_model, BuildError, BuildReport};
pub use config::{LdPolicy, ModelerConfig, Strategy, MODELER_KEYS};
pub use fit::{fit_error, fit_polynomial, monomials};
pub use plan::{monomial_count, plan_samples, SamplePlan};
pub use source::{ProcessSource, SampleSource, SourceError, SyntheticSource};
pub use stats::{summarize, summarize_values, StatisticsSummary, SummaryError};
