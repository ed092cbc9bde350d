//! Blocked algorithms as loops of subroutine calls over partitioned
//! operands, and their expansion into call traces.

mod algorithm;
mod builtin;
mod execute;
mod partition;

pub use algorithm::{
    generate_trace, AlgorithmError, ArgTemplate, BlockedAlgorithm, PartRef, Trace, Traversal,
    UpdateStatement,
};
pub use builtin::{algorithm_by_id, algorithm_ids, builtin_algorithm, OPERATIONS};
pub use execute::{execute_trace, Backend, ExecError, OperandData, Operands};
pub use partition::{repartition, split_axis, Direction, PartView, Partition, RepartitionError};
