use std::collections::BTreeMap;
use std::fmt;

use crate::kernel::{
    lookup_signature, validate_against, ArgKind, ArgValue, MatrixLoc, SamplingRequest,
};

use super::partition::{Direction, PartView, Partition};

/// Reference to a part of an operand, e.g. `L` / `21`. An empty part name
/// means the whole operand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartRef {
    pub operand: String,
    pub part: String,
}

impl PartRef {
    /// Parses `"L21"` as operand `L`, part `21`; operand names are the
    /// leading non-digit characters.
    pub fn parse(s: &str) -> Self {
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        PartRef {
            operand: s[..split].to_string(),
            part: s[split..].to_string(),
        }
    }
}

impl fmt::Display for PartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.operand, self.part)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgTemplate {
    Code(char),
    Real(f64),
    Rows(PartRef),
    Cols(PartRef),
    Matrix(PartRef),
    /// Leading dimension of the named operand.
    Ld(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStatement {
    pub routine: String,
    pub args: Vec<ArgTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Traversal {
    pub operand: String,
    /// Names of the algorithm sizes giving the operand's rows and columns.
    pub rows: String,
    pub cols: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockedAlgorithm {
    pub name: String,
    pub sizes: Vec<String>,
    pub operands: Vec<Traversal>,
    pub body: Vec<UpdateStatement>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlgorithmError {
    #[error("{alg}: unknown routine {routine}")]
    UnknownRoutine { alg: String, routine: String },
    #[error("{alg}: {routine} takes {expected} arguments, statement has {found}")]
    Arity {
        alg: String,
        routine: String,
        expected: usize,
        found: usize,
    },
    #[error("{alg}: argument {arg} of {routine} cannot be {template}")]
    Kind {
        alg: String,
        routine: String,
        arg: String,
        template: String,
    },
    #[error("{alg}: no part {part} under its operand's traversal")]
    UnknownPart { alg: String, part: String },
    #[error("{alg}: operand {operand} uses unknown size {size}")]
    UnknownSize { alg: String, operand: String, size: String },
    #[error("{alg}: expected {expected} sizes, got {found}")]
    SizeCount {
        alg: String,
        expected: usize,
        found: usize,
    },
    #[error("{alg}: generated invalid call {request}: {reason}")]
    InvalidCall {
        alg: String,
        request: String,
        reason: String,
    },
    #[error("unknown algorithm {0}")]
    UnknownAlgorithm(String),
}

/// An ordered list of subroutine invocations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub calls: Vec<SamplingRequest>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SamplingRequest> {
        self.calls.iter()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.calls {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl BlockedAlgorithm {
    /// Builds an algorithm, checking every statement against the routine
    /// signatures and the operand traversals.
    pub fn new(
        name: &str,
        sizes: &[&str],
        operands: Vec<Traversal>,
        body: Vec<UpdateStatement>,
    ) -> Result<Self, AlgorithmError> {
        let alg = BlockedAlgorithm {
            name: name.to_string(),
            sizes: sizes.iter().map(|s| s.to_string()).collect(),
            operands,
            body,
        };
        alg.check()?;
        Ok(alg)
    }

    fn traversal(&self, operand: &str) -> Option<&Traversal> {
        self.operands.iter().find(|t| t.operand == operand)
    }

    fn check(&self) -> Result<(), AlgorithmError> {
        let alg = || self.name.clone();
        for t in &self.operands {
            for s in [&t.rows, &t.cols] {
                if !self.sizes.contains(s) {
                    return Err(AlgorithmError::UnknownSize {
                        alg: alg(),
                        operand: t.operand.clone(),
                        size: s.clone(),
                    });
                }
            }
        }
        let part_ok = |r: &PartRef| {
            self.traversal(&r.operand)
                .is_some_and(|t| t.direction.has_part(&r.part))
        };
        for st in &self.body {
            let sig = lookup_signature(&st.routine).map_err(|_| AlgorithmError::UnknownRoutine {
                alg: alg(),
                routine: st.routine.clone(),
            })?;
            if sig.args.len() != st.args.len() {
                return Err(AlgorithmError::Arity {
                    alg: alg(),
                    routine: st.routine.clone(),
                    expected: sig.args.len(),
                    found: st.args.len(),
                });
            }
            for (a, t) in sig.args.iter().zip(&st.args) {
                let fits = match (&a.kind, t) {
                    (ArgKind::Discrete(allowed), ArgTemplate::Code(c)) => allowed.contains(c),
                    (ArgKind::Scalar, ArgTemplate::Real(_)) => true,
                    (ArgKind::Size, ArgTemplate::Rows(r) | ArgTemplate::Cols(r)) => {
                        if !part_ok(r) {
                            return Err(AlgorithmError::UnknownPart {
                                alg: alg(),
                                part: r.to_string(),
                            });
                        }
                        true
                    }
                    (ArgKind::MatrixData { .. }, ArgTemplate::Matrix(r)) => {
                        if !part_ok(r) {
                            return Err(AlgorithmError::UnknownPart {
                                alg: alg(),
                                part: r.to_string(),
                            });
                        }
                        true
                    }
                    (ArgKind::LeadingDim(_), ArgTemplate::Ld(op)) => self.traversal(op).is_some(),
                    _ => false,
                };
                if !fits {
                    return Err(AlgorithmError::Kind {
                        alg: alg(),
                        routine: st.routine.clone(),
                        arg: a.name.clone(),
                        template: format!("{t:?}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Rows and columns of every operand for the given sizes.
    pub fn operand_dims(&self, sizes: &[usize]) -> Result<BTreeMap<String, (usize, usize)>, AlgorithmError> {
        if sizes.len() != self.sizes.len() {
            return Err(AlgorithmError::SizeCount {
                alg: self.name.clone(),
                expected: self.sizes.len(),
                found: sizes.len(),
            });
        }
        let size = |n: &str| sizes[self.sizes.iter().position(|s| s == n).unwrap()];
        Ok(self
            .operands
            .iter()
            .map(|t| (t.operand.clone(), (size(&t.rows), size(&t.cols))))
            .collect())
    }

    /// Number of elements the loop runs over: the longest traversal.
    pub fn extent(&self, sizes: &[usize]) -> Result<usize, AlgorithmError> {
        let dims = self.operand_dims(sizes)?;
        Ok(self
            .operands
            .iter()
            .map(|t| {
                let (r, c) = dims[&t.operand];
                t.direction.extent(r, c)
            })
            .max()
            .unwrap_or(0))
    }

    /// Expands the loop for concrete sizes and block size `b` into the
    /// sequence of subroutine invocations. Calls with a zero size argument
    /// are left out.
    pub fn generate_trace(&self, sizes: &[usize], b: usize) -> Result<Trace, AlgorithmError> {
        let dims = self.operand_dims(sizes)?;
        let extent = self.extent(sizes)?;
        let b = b.max(1);
        let mut calls = Vec::new();
        let mut p = 0;
        while p < extent {
            let b_eff = b.min(extent - p);
            let parts: BTreeMap<&str, Partition> = self
                .operands
                .iter()
                .map(|t| {
                    let (r, c) = dims[&t.operand];
                    (t.operand.as_str(), Partition::at(t.direction, r, c, p, b_eff))
                })
                .collect();
            let view = |r: &PartRef| -> PartView {
                parts[r.operand.as_str()]
                    .part(&r.part)
                    .expect("parts checked at construction")
            };
            for st in &self.body {
                let mut empty = false;
                let values = st
                    .args
                    .iter()
                    .map(|t| match t {
                        ArgTemplate::Code(c) => ArgValue::Code(*c),
                        ArgTemplate::Real(v) => ArgValue::Real(*v),
                        ArgTemplate::Rows(r) | ArgTemplate::Cols(r) => {
                            let v = view(r);
                            let n = if matches!(t, ArgTemplate::Rows(_)) { v.rows } else { v.cols };
                            empty |= n == 0;
                            ArgValue::Int(n)
                        }
                        ArgTemplate::Matrix(r) => {
                            let v = view(r);
                            ArgValue::Matrix(MatrixLoc::View {
                                operand: r.operand.clone(),
                                row: v.row,
                                col: v.col,
                            })
                        }
                        ArgTemplate::Ld(op) => ArgValue::Int(dims[op].0.max(1)),
                    })
                    .collect();
                if empty {
                    continue;
                }
                let req = SamplingRequest::new(&st.routine, values);
                let sig = lookup_signature(&st.routine).expect("checked at construction");
                if let Err(v) = validate_against(sig, &req) {
                    return Err(AlgorithmError::InvalidCall {
                        alg: self.name.clone(),
                        request: req.to_string(),
                        reason: v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
                    });
                }
                calls.push(req);
            }
            p += b_eff;
        }
        Ok(Trace { calls })
    }
}

/// Free-function form of [`BlockedAlgorithm::generate_trace`].
pub fn generate_trace(
    alg: &BlockedAlgorithm,
    sizes: &[usize],
    b: usize,
) -> Result<Trace, AlgorithmError> {
    alg.generate_trace(sizes, b)
}
