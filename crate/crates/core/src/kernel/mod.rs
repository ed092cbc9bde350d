//! Routine registry, reference kernels and the analytic flop oracle.

mod flops;
mod kernels;
mod registry;
mod request;
mod signature;

pub use flops::flop_count;
pub use kernels::{
    execute_kernel, execute_kernel_counted, execute_kernel_with, FlopTally, NoTally, Tally,
};
pub use registry::{lookup_signature, registry, Registry};
pub use request::{
    validate_against, validate_request, ArgValue, MatrixLoc, SamplingRequest, Violation,
};
pub use signature::{Arg, ArgKind, DimExpr, RoutineSignature, SignatureError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("unknown routine {0}")]
    UnknownRoutine(String),
    #[error("routine {0} is already registered")]
    DuplicateRoutine(String),
    #[error("{routine}: expected {expected} operand offsets, got {found}")]
    OperandCount {
        routine: String,
        expected: usize,
        found: usize,
    },
    #[error("{routine}: operand ends at element {end}, arena holds {len}")]
    OutOfArena {
        routine: String,
        end: usize,
        len: usize,
    },
}
