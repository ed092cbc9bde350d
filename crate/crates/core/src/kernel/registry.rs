use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::signature::{ArgKind, DimExpr, RoutineSignature, SignatureError};
use super::KernelError;

/// The set of routines known to the sampler, modeler and predictor.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    routines: BTreeMap<String, RoutineSignature>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the built-in double precision routines.
    pub fn builtin() -> Self {
        let mut r = Registry::new();
        for sig in builtin_signatures() {
            r.register(sig).expect("built-in names are unique");
        }
        r
    }

    pub fn register(&mut self, sig: RoutineSignature) -> Result<(), KernelError> {
        if self.routines.contains_key(&sig.name) {
            return Err(KernelError::DuplicateRoutine(sig.name));
        }
        self.routines.insert(sig.name.clone(), sig);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<&RoutineSignature, KernelError> {
        self.routines
            .get(name)
            .ok_or_else(|| KernelError::UnknownRoutine(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.routines.keys().map(String::as_str)
    }
}

/// The process-wide built-in registry.
pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::builtin)
}

pub fn lookup_signature(name: &str) -> Result<&'static RoutineSignature, KernelError> {
    registry().lookup(name)
}

fn codes(c: &str) -> ArgKind {
    ArgKind::Discrete(c.chars().collect())
}

fn matrix(rows: DimExpr, cols: DimExpr) -> ArgKind {
    ArgKind::MatrixData { rows, cols }
}

fn ld(m: &str) -> ArgKind {
    ArgKind::LeadingDim(m.to_string())
}

fn builtin_signatures() -> Vec<RoutineSignature> {
    let s = DimExpr::size;
    let tri = || DimExpr::pick("side", 'L', "m", "n");
    let sigs: Vec<Result<RoutineSignature, SignatureError>> = vec![
        RoutineSignature::new(
            "dgemm",
            vec![
                ("transA", codes("NT")),
                ("transB", codes("NT")),
                ("m", ArgKind::Size),
                ("n", ArgKind::Size),
                ("k", ArgKind::Size),
                ("alpha", ArgKind::Scalar),
                (
                    "A",
                    matrix(
                        DimExpr::pick("transA", 'N', "m", "k"),
                        DimExpr::pick("transA", 'N', "k", "m"),
                    ),
                ),
                ("ldA", ld("A")),
                (
                    "B",
                    matrix(
                        DimExpr::pick("transB", 'N', "k", "n"),
                        DimExpr::pick("transB", 'N', "n", "k"),
                    ),
                ),
                ("ldB", ld("B")),
                ("beta", ArgKind::Scalar),
                ("C", matrix(s("m"), s("n"))),
                ("ldC", ld("C")),
            ],
        ),
        RoutineSignature::new(
            "dtrsm",
            vec![
                ("side", codes("LR")),
                ("uplo", codes("LU")),
                ("transA", codes("NT")),
                ("diag", codes("NU")),
                ("m", ArgKind::Size),
                ("n", ArgKind::Size),
                ("alpha", ArgKind::Scalar),
                ("A", matrix(tri(), tri())),
                ("ldA", ld("A")),
                ("B", matrix(s("m"), s("n"))),
                ("ldB", ld("B")),
            ],
        ),
        RoutineSignature::new(
            "dtrmm",
            vec![
                ("side", codes("LR")),
                ("uplo", codes("LU")),
                ("transA", codes("NT")),
                ("diag", codes("NU")),
                ("m", ArgKind::Size),
                ("n", ArgKind::Size),
                ("alpha", ArgKind::Scalar),
                ("A", matrix(tri(), tri())),
                ("ldA", ld("A")),
                ("B", matrix(s("m"), s("n"))),
                ("ldB", ld("B")),
            ],
        ),
        RoutineSignature::new(
            "dtrinv_unb",
            vec![
                ("diag", codes("NU")),
                ("n", ArgKind::Size),
                ("A", matrix(s("n"), s("n"))),
                ("ldA", ld("A")),
            ],
        ),
        RoutineSignature::new(
            "dgetrf_unb",
            vec![
                ("n", ArgKind::Size),
                ("A", matrix(s("n"), s("n"))),
                ("ldA", ld("A")),
            ],
        ),
        RoutineSignature::new(
            "dsylv_unb",
            vec![
                ("m", ArgKind::Size),
                ("n", ArgKind::Size),
                ("L", matrix(s("m"), s("m"))),
                ("ldL", ld("L")),
                ("U", matrix(s("n"), s("n"))),
                ("ldU", ld("U")),
                ("C", matrix(s("m"), s("n"))),
                ("ldC", ld("C")),
            ],
        ),
    ];
    sigs.into_iter()
        .map(|s| s.expect("built-in signatures are well formed"))
        .collect()
}
