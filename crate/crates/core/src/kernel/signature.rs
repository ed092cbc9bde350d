//! Routine signatures: the argument list of each routine described by
//! semantic kind rather than by C type.

use std::collections::BTreeMap;
use std::fmt;

/// An expression for one dimension of a matrix operand.
///
/// Dimensions are either a size argument directly, or chosen between two
/// size arguments by the value of a discrete argument (e.g. `rows(A)` of
/// `dgemm` is `m` when `transA = N` and `k` otherwise).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DimExpr {
    Size(String),
    Pick {
        discrete: String,
        when: char,
        then: String,
        otherwise: String,
    },
}

impl DimExpr {
    pub fn size(name: &str) -> Self {
        DimExpr::Size(name.to_string())
    }

    pub fn pick(discrete: &str, when: char, then: &str, otherwise: &str) -> Self {
        DimExpr::Pick {
            discrete: discrete.to_string(),
            when,
            then: then.to_string(),
            otherwise: otherwise.to_string(),
        }
    }

    /// Size arguments this expression may evaluate to.
    pub fn size_refs(&self) -> Vec<&str> {
        match self {
            DimExpr::Size(s) => vec![s.as_str()],
            DimExpr::Pick { then, otherwise, .. } => vec![then.as_str(), otherwise.as_str()],
        }
    }

    pub fn discrete_ref(&self) -> Option<&str> {
        match self {
            DimExpr::Size(_) => None,
            DimExpr::Pick { discrete, .. } => Some(discrete.as_str()),
        }
    }
}

/// Semantic kind of a routine argument.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgKind {
    /// A flag argument taking one character out of a fixed set.
    Discrete(Vec<char>),
    /// A problem dimension.
    Size,
    /// A real scalar such as `alpha` or `beta`.
    Scalar,
    /// A column-major matrix operand.
    MatrixData { rows: DimExpr, cols: DimExpr },
    /// Leading dimension of the named matrix argument.
    LeadingDim(String),
    /// Vector stride.
    Increment,
}

impl ArgKind {
    pub fn label(&self) -> &'static str {
        match self {
            ArgKind::Discrete(_) => "discrete",
            ArgKind::Size => "size",
            ArgKind::Scalar => "scalar",
            ArgKind::MatrixData { .. } => "matrix",
            ArgKind::LeadingDim(_) => "leading dimension",
            ArgKind::Increment => "increment",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub name: String,
    pub kind: ArgKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutineSignature {
    pub name: String,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("{routine}: duplicate argument name {arg}")]
    DuplicateArg { routine: String, arg: String },
    #[error("{routine}: discrete argument {arg} has no allowed codes")]
    EmptyCodes { routine: String, arg: String },
    #[error("{routine}: argument {arg} references {target}, which is not a {expected} argument")]
    BadReference {
        routine: String,
        arg: String,
        target: String,
        expected: &'static str,
    },
}

impl RoutineSignature {
    pub fn new(name: &str, args: Vec<(&str, ArgKind)>) -> Result<Self, SignatureError> {
        let sig = RoutineSignature {
            name: name.to_string(),
            args: args
                .into_iter()
                .map(|(n, kind)| Arg {
                    name: n.to_string(),
                    kind,
                })
                .collect(),
        };
        sig.check()?;
        Ok(sig)
    }

    fn check(&self) -> Result<(), SignatureError> {
        let mut seen = BTreeMap::new();
        for (i, a) in self.args.iter().enumerate() {
            if seen.insert(a.name.as_str(), i).is_some() {
                return Err(SignatureError::DuplicateArg {
                    routine: self.name.clone(),
                    arg: a.name.clone(),
                });
            }
        }
        let bad = |arg: &str, target: &str, expected| SignatureError::BadReference {
            routine: self.name.clone(),
            arg: arg.to_string(),
            target: target.to_string(),
            expected,
        };
        for a in &self.args {
            match &a.kind {
                ArgKind::Discrete(codes) if codes.is_empty() => {
                    return Err(SignatureError::EmptyCodes {
                        routine: self.name.clone(),
                        arg: a.name.clone(),
                    })
                }
                ArgKind::MatrixData { rows, cols } => {
                    for e in [rows, cols] {
                        for s in e.size_refs() {
                            if !matches!(self.kind_of(s), Some(ArgKind::Size)) {
                                return Err(bad(&a.name, s, "size"));
                            }
                        }
                        if let Some(d) = e.discrete_ref() {
                            if !matches!(self.kind_of(d), Some(ArgKind::Discrete(_))) {
                                return Err(bad(&a.name, d, "discrete"));
                            }
                        }
                    }
                }
                ArgKind::LeadingDim(m)
                    if !matches!(self.kind_of(m), Some(ArgKind::MatrixData { .. })) =>
                {
                    return Err(bad(&a.name, m, "matrix"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn position(&self, arg: &str) -> Option<usize> {
        self.args.iter().position(|a| a.name == arg)
    }

    pub fn kind_of(&self, arg: &str) -> Option<&ArgKind> {
        self.args.iter().find(|a| a.name == arg).map(|a| &a.kind)
    }

    /// Names of the size arguments, in signature order. These are the
    /// dimensions of a performance model for this routine.
    pub fn size_args(&self) -> Vec<&str> {
        self.args
            .iter()
            .filter(|a| matches!(a.kind, ArgKind::Size))
            .map(|a| a.name.as_str())
            .collect()
    }

    /// Discrete arguments with their allowed codes, in signature order.
    pub fn discrete_args(&self) -> Vec<(&str, &[char])> {
        self.args
            .iter()
            .filter_map(|a| match &a.kind {
                ArgKind::Discrete(c) => Some((a.name.as_str(), c.as_slice())),
                _ => None,
            })
            .collect()
    }

    pub fn matrix_args(&self) -> Vec<&str> {
        self.args
            .iter()
            .filter(|a| matches!(a.kind, ArgKind::MatrixData { .. }))
            .map(|a| a.name.as_str())
            .collect()
    }

    /// Every combination of discrete codes, in lexicographic order of the
    /// signature's code lists.
    pub fn discrete_combos(&self) -> Vec<Vec<char>> {
        let mut combos: Vec<Vec<char>> = vec![Vec::new()];
        for (_, codes) in self.discrete_args() {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    codes.iter().map(move |&c| {
                        let mut next = prefix.clone();
                        next.push(c);
                        next
                    })
                })
                .collect();
        }
        combos
    }
}

impl fmt::Display for RoutineSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", a.name)?;
        }
        write!(f, ")")
    }
}
