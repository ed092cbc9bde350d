use std::collections::BTreeMap;

use crate::kernel::{
    execute_kernel_counted, flop_count, lookup_signature, ArgValue, KernelError, MatrixLoc,
};
use crate::sampler::CounterSet;

use super::algorithm::Trace;

/// A column-major matrix with leading dimension equal to its row count.
#[derive(Debug, Clone, PartialEq)]
pub struct OperandData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl OperandData {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "operand data has the wrong length");
        OperandData { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }
}

pub type Operands = BTreeMap<String, OperandData>;

pub enum Backend<'a> {
    /// Sums the analytic flop count of every call.
    Counting,
    /// Runs the reference kernels on the given operands, in place.
    Kernel(&'a mut Operands),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("trace refers to operand {0}, which was not supplied")]
    MissingOperand(String),
    #[error("call {call}: leading dimension {ld} of {operand} does not match its {rows} rows")]
    LeadingDim {
        call: usize,
        operand: String,
        ld: usize,
        rows: usize,
    },
    #[error("call {call} has a matrix without an operand view")]
    Unplaced { call: usize },
}

/// Sums the flops of a trace, either analytically or by running it.
pub fn execute_trace(trace: &Trace, backend: Backend<'_>) -> Result<CounterSet, ExecError> {
    let flops = match backend {
        Backend::Counting => trace
            .iter()
            .map(flop_count)
            .sum::<Result<u64, KernelError>>()?,
        Backend::Kernel(ops) => run_kernels(trace, ops)?,
    };
    Ok([("flops", flops)].into_iter().collect())
}

fn run_kernels(trace: &Trace, ops: &mut Operands) -> Result<u64, ExecError> {
    let mut base = BTreeMap::new();
    let mut arena = Vec::new();
    for (name, m) in ops.iter() {
        base.insert(name.clone(), arena.len());
        arena.extend_from_slice(&m.data);
    }
    let mut total = 0;
    for (call, req) in trace.iter().enumerate() {
        let sig = lookup_signature(&req.routine)?;
        let lds: Vec<usize> = req.matrix_extents(sig).iter().map(|e| e.2).collect();
        let mut offsets = Vec::new();
        for (v, ld) in req
            .values
            .iter()
            .filter(|v| matches!(v, ArgValue::Matrix(_)))
            .zip(lds)
        {
            let ArgValue::Matrix(MatrixLoc::View { operand, row, col }) = v else {
                return Err(ExecError::Unplaced { call });
            };
            let m = ops
                .get(operand)
                .ok_or_else(|| ExecError::MissingOperand(operand.clone()))?;
            if ld != m.rows.max(1) {
                return Err(ExecError::LeadingDim {
                    call,
                    operand: operand.clone(),
                    ld,
                    rows: m.rows,
                });
            }
            offsets.push(base[operand] + row + col * ld);
        }
        total += execute_kernel_counted(req, &mut arena, &offsets)?;
    }
    for (name, m) in ops.iter_mut() {
        let (start, len) = (base[name], m.data.len());
        m.data.copy_from_slice(&arena[start..start + len]);
    }
    Ok(total)
}
