//! Measurement, piecewise-polynomial modeling and model-based ranking of
//! blocked dense linear algebra algorithms.
//!
//! The pipeline has four stages:
//!
//! - [`sampler`] executes routine invocations from a request stream and
//!   reports counters (`ticks`, `flops`) per invocation.
//! - [`modeler`] drives a sampler to build piecewise-polynomial
//!   [`model::RoutineModel`]s over the size arguments of a routine.
//! - [`blocked`] describes blocked algorithms declaratively and expands them
//!   into traces of routine invocations.
//! - [`predict`] evaluates routine models over traces to predict, rank and
//!   block-size-tune algorithms without running them.

pub mod blocked;
pub mod kernel;
pub mod model;
pub mod modeler;
pub mod predict;
pub mod sampler;
