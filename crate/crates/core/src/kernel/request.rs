use std::fmt;

use super::registry::lookup_signature;
use super::signature::{ArgKind, DimExpr, RoutineSignature};

/// Where a matrix operand lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixLoc {
    /// Placement is left to the sampler (`?` on the request stream).
    Auto,
    /// A view into a named operand of a blocked algorithm, starting at the
    /// given row and column of the full matrix.
    View {
        operand: String,
        row: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Code(char),
    Int(usize),
    Real(f64),
    Matrix(MatrixLoc),
}

impl ArgValue {
    fn kind_label(&self) -> &'static str {
        match self {
            ArgValue::Code(_) => "code",
            ArgValue::Int(_) => "integer",
            ArgValue::Real(_) => "real",
            ArgValue::Matrix(_) => "matrix",
        }
    }
}

/// One routine invocation with concrete argument values.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRequest {
    pub routine: String,
    pub values: Vec<ArgValue>,
}

impl SamplingRequest {
    pub fn new(routine: &str, values: Vec<ArgValue>) -> Self {
        SamplingRequest {
            routine: routine.to_string(),
            values,
        }
    }

    /// Integer value at position `i`. Panics if the value is not an integer;
    /// callers validate first.
    pub fn int(&self, i: usize) -> usize {
        match self.values[i] {
            ArgValue::Int(v) => v,
            ref other => panic!("argument {i} of {} is {other:?}, not an integer", self.routine),
        }
    }

    pub fn code(&self, i: usize) -> char {
        match self.values[i] {
            ArgValue::Code(c) => c,
            ref other => panic!("argument {i} of {} is {other:?}, not a code", self.routine),
        }
    }

    pub fn real(&self, i: usize) -> f64 {
        match self.values[i] {
            ArgValue::Real(v) => v,
            ref other => panic!("argument {i} of {} is {other:?}, not a real", self.routine),
        }
    }

    fn by_name<'a>(&'a self, sig: &RoutineSignature, name: &str) -> Option<&'a ArgValue> {
        sig.position(name).and_then(|i| self.values.get(i))
    }

    /// Evaluates a dimension expression against this request.
    pub fn eval_dim(&self, sig: &RoutineSignature, e: &DimExpr) -> Option<usize> {
        let size = |n: &str| match self.by_name(sig, n) {
            Some(ArgValue::Int(v)) => Some(*v),
            _ => None,
        };
        match e {
            DimExpr::Size(n) => size(n),
            DimExpr::Pick {
                discrete,
                when,
                then,
                otherwise,
            } => match self.by_name(sig, discrete) {
                Some(ArgValue::Code(c)) if c == when => size(then),
                Some(ArgValue::Code(_)) => size(otherwise),
                _ => None,
            },
        }
    }

    /// Rows and columns of the named matrix argument.
    pub fn matrix_dims(&self, sig: &RoutineSignature, matrix: &str) -> Option<(usize, usize)> {
        match sig.kind_of(matrix)? {
            ArgKind::MatrixData { rows, cols } => {
                Some((self.eval_dim(sig, rows)?, self.eval_dim(sig, cols)?))
            }
            _ => None,
        }
    }

    /// Values of the size arguments in signature order.
    pub fn size_point(&self, sig: &RoutineSignature) -> Vec<usize> {
        sig.args
            .iter()
            .zip(&self.values)
            .filter(|(a, _)| matches!(a.kind, ArgKind::Size))
            .map(|(_, v)| match v {
                ArgValue::Int(x) => *x,
                _ => 0,
            })
            .collect()
    }

    /// Values of the discrete arguments in signature order.
    pub fn discrete_combo(&self, sig: &RoutineSignature) -> Vec<char> {
        sig.args
            .iter()
            .zip(&self.values)
            .filter(|(a, _)| matches!(a.kind, ArgKind::Discrete(_)))
            .map(|(_, v)| match v {
                ArgValue::Code(c) => *c,
                _ => '?',
            })
            .collect()
    }
}

impl SamplingRequest {
    /// Builds a request from a discrete combination and a size point.
    ///
    /// Scalars come from `scalar(name)`, increments are 1, matrices are
    /// left to the sampler, and each leading dimension is `ld(rows)` of its
    /// bound matrix.
    pub fn assemble(
        sig: &RoutineSignature,
        combo: &[char],
        sizes: &[usize],
        scalar: impl Fn(&str) -> f64,
        ld: impl Fn(usize) -> usize,
    ) -> SamplingRequest {
        let mut codes = combo.iter();
        let mut dims = sizes.iter();
        let values = sig
            .args
            .iter()
            .map(|a| match &a.kind {
                ArgKind::Discrete(allowed) => {
                    ArgValue::Code(*codes.next().unwrap_or(&allowed[0]))
                }
                ArgKind::Size => ArgValue::Int(*dims.next().unwrap_or(&0)),
                ArgKind::Scalar => ArgValue::Real(scalar(&a.name)),
                ArgKind::MatrixData { .. } => ArgValue::Matrix(MatrixLoc::Auto),
                ArgKind::LeadingDim(_) | ArgKind::Increment => ArgValue::Int(1),
            })
            .collect();
        let mut req = SamplingRequest::new(&sig.name, values);
        for (i, a) in sig.args.iter().enumerate() {
            if let ArgKind::LeadingDim(m) = &a.kind {
                let rows = req.matrix_dims(sig, m).map_or(0, |d| d.0);
                req.values[i] = ArgValue::Int(ld(rows));
            }
        }
        req
    }

    /// `(rows, cols, ld)` of every matrix argument in signature order.
    pub fn matrix_extents(&self, sig: &RoutineSignature) -> Vec<(usize, usize, usize)> {
        sig.args
            .iter()
            .filter_map(|a| match &a.kind {
                ArgKind::MatrixData { .. } => {
                    let (rows, cols) = self.matrix_dims(sig, &a.name).unwrap_or((0, 0));
                    let ld = sig
                        .args
                        .iter()
                        .position(|b| matches!(&b.kind, ArgKind::LeadingDim(m) if *m == a.name))
                        .and_then(|i| match self.values.get(i) {
                            Some(ArgValue::Int(v)) => Some(*v),
                            _ => None,
                        })
                        .unwrap_or(rows);
                    Some((rows, cols, ld))
                }
                _ => None,
            })
            .collect()
    }
}

/// Formats the request in the sampler's input-stream syntax. Matrix
/// operands are always written as `?`.
impl fmt::Display for SamplingRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.routine)?;
        for v in &self.values {
            match v {
                ArgValue::Code(c) => write!(f, " {c}")?,
                ArgValue::Int(i) => write!(f, " {i}")?,
                ArgValue::Real(r) => write!(f, " {r:?}")?,
                ArgValue::Matrix(_) => f.write_str(" ?")?,
            }
        }
        Ok(())
    }
}

/// One reason a request does not fit its signature.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("unknown routine {0}")]
    UnknownRoutine(String),
    #[error("expected {expected} arguments, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("{arg} expects a {expected} value, got a {found}")]
    KindMismatch {
        arg: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{arg} not in {{{}}}", .allowed.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))]
    CodeNotAllowed {
        arg: String,
        code: char,
        allowed: Vec<char>,
    },
    #[error("{arg} < rows({matrix}) ({ld} < {rows})")]
    LeadingDimTooSmall {
        arg: String,
        matrix: String,
        ld: usize,
        rows: usize,
    },
    #[error("{arg} must be positive")]
    NonPositiveIncrement { arg: String },
}

/// Checks `request` against its registered signature and returns every
/// violation found.
pub fn validate_request(request: &SamplingRequest) -> Result<(), Vec<Violation>> {
    let sig = match lookup_signature(&request.routine) {
        Ok(s) => s,
        Err(_) => return Err(vec![Violation::UnknownRoutine(request.routine.clone())]),
    };
    validate_against(sig, request)
}

pub fn validate_against(
    sig: &RoutineSignature,
    request: &SamplingRequest,
) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if sig.args.len() != request.values.len() {
        out.push(Violation::Arity {
            expected: sig.args.len(),
            found: request.values.len(),
        });
        return Err(out);
    }
    for (arg, value) in sig.args.iter().zip(&request.values) {
        let mismatch = |expected| Violation::KindMismatch {
            arg: arg.name.clone(),
            expected,
            found: value.kind_label(),
        };
        match (&arg.kind, value) {
            (ArgKind::Discrete(allowed), ArgValue::Code(c)) => {
                if !allowed.contains(c) {
                    out.push(Violation::CodeNotAllowed {
                        arg: arg.name.clone(),
                        code: *c,
                        allowed: allowed.clone(),
                    });
                }
            }
            (ArgKind::Discrete(_), _) => out.push(mismatch("code")),
            (ArgKind::Size, ArgValue::Int(_)) => {}
            (ArgKind::Size, _) => out.push(mismatch("integer")),
            (ArgKind::Scalar, ArgValue::Real(_)) => {}
            (ArgKind::Scalar, _) => out.push(mismatch("real")),
            (ArgKind::MatrixData { .. }, ArgValue::Matrix(_)) => {}
            (ArgKind::MatrixData { .. }, _) => out.push(mismatch("matrix")),
            (ArgKind::LeadingDim(_), ArgValue::Int(_)) => {}
            (ArgKind::LeadingDim(_), _) => out.push(mismatch("integer")),
            (ArgKind::Increment, ArgValue::Int(0)) => out.push(Violation::NonPositiveIncrement {
                arg: arg.name.clone(),
            }),
            (ArgKind::Increment, ArgValue::Int(_)) => {}
            (ArgKind::Increment, _) => out.push(mismatch("integer")),
        }
    }
    // Leading-dimension bounds need well-typed sizes and codes.
    if out.is_empty() {
        for (arg, value) in sig.args.iter().zip(&request.values) {
            if let (ArgKind::LeadingDim(m), ArgValue::Int(ld)) = (&arg.kind, value) {
                if let Some((rows, _)) = request.matrix_dims(sig, m) {
                    if *ld < rows {
                        out.push(Violation::LeadingDimTooSmall {
                            arg: arg.name.clone(),
                            matrix: m.clone(),
                            ld: *ld,
                            rows,
                        });
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ArgValue::*;

    fn auto() -> ArgValue {
        Matrix(MatrixLoc::Auto)
    }

    pub(crate) fn gemm(m: usize, n: usize, k: usize, lda: usize) -> SamplingRequest {
        SamplingRequest::new(
            "dgemm",
            vec![
                Code('N'),
                Code('N'),
                Int(m),
                Int(n),
                Int(k),
                Real(1.0),
                auto(),
                Int(lda),
                auto(),
                Int(k),
                Real(1.0),
                auto(),
                Int(m),
            ],
        )
    }

    #[test]
    fn well_formed_gemm_is_ok() {
        assert_eq!(validate_request(&gemm(4, 4, 4, 4)), Ok(()));
    }

    #[test]
    fn leading_dimension_bound() {
        let errs = validate_request(&gemm(4, 3, 2, 2)).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "ldA < rows(A) (2 < 4)");
        assert!(errs[0].to_string().starts_with("ldA < rows(A)"));
    }

    #[test]
    fn bad_code_reported() {
        let req = SamplingRequest::new(
            "dtrsm",
            vec![
                Code('X'),
                Code('L'),
                Code('N'),
                Code('N'),
                Int(4),
                Int(4),
                Real(1.0),
                auto(),
                Int(4),
                auto(),
                Int(4),
            ],
        );
        let errs = validate_request(&req).unwrap_err();
        assert_eq!(errs[0].to_string(), "side not in {L,R}");
    }

    #[test]
    fn all_violations_reported() {
        let req = SamplingRequest::new(
            "dtrsm",
            vec![
                Code('X'),
                Code('Q'),
                Int(1),
                Code('N'),
                Int(4),
                Int(4),
                Real(1.0),
                auto(),
                Int(4),
                auto(),
                Int(4),
            ],
        );
        let errs = validate_request(&req).unwrap_err();
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn arity_and_unknown() {
        let req = SamplingRequest::new("dgemm", vec![Code('N')]);
        assert!(matches!(
            validate_request(&req).unwrap_err()[0],
            Violation::Arity { expected: 13, found: 1 }
        ));
        let req = SamplingRequest::new("dpotrf", vec![]);
        assert!(matches!(
            validate_request(&req).unwrap_err()[0],
            Violation::UnknownRoutine(_)
        ));
    }

    #[test]
    fn transposed_operand_rows() {
        let mut req = gemm(4, 3, 2, 2);
        req.values[0] = Code('T');
        // op(A) = A^T so A is k x m = 2 x 4.
        assert_eq!(validate_request(&req), Ok(()));
        let sig = lookup_signature("dgemm").unwrap();
        assert_eq!(req.matrix_dims(sig, "A"), Some((2, 4)));
    }

    #[test]
    fn display_uses_stream_syntax() {
        assert_eq!(
            gemm(8, 8, 8, 8).to_string(),
            "dgemm N N 8 8 8 1.0 ? 8 ? 8 1.0 ? 8"
        );
    }
}
