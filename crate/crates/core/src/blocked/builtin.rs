//! Built-in variants for triangular inversion, LU factorization without
//! pivoting, and the triangular Sylvester equation `L X + X U = C`.
//!
//! All traversals run from the top-left. Triangular inversion works in
//! place on a lower triangular `L`; LU overwrites `A` with its unit lower
//! and upper factors; Sylvester overwrites `C` with `X`.

use super::algorithm::{
    AlgorithmError, ArgTemplate, BlockedAlgorithm, PartRef, Traversal, UpdateStatement,
};
use super::partition::Direction;

use ArgTemplate::{Code, Real};

fn rows(p: &str) -> ArgTemplate {
    ArgTemplate::Rows(PartRef::parse(p))
}

fn cols(p: &str) -> ArgTemplate {
    ArgTemplate::Cols(PartRef::parse(p))
}

fn mat(p: &str) -> [ArgTemplate; 2] {
    let r = PartRef::parse(p);
    let op = r.operand.clone();
    [ArgTemplate::Matrix(r), ArgTemplate::Ld(op)]
}

fn stmt(routine: &str, parts: Vec<Vec<ArgTemplate>>) -> UpdateStatement {
    UpdateStatement {
        routine: routine.to_string(),
        args: parts.into_iter().flatten().collect(),
    }
}

/// `C := alpha A B + C` on parts, with `k` taken from the columns of `A`.
fn gemm(alpha: f64, a: &str, b: &str, c: &str) -> UpdateStatement {
    stmt(
        "dgemm",
        vec![
            vec![Code('N'), Code('N'), rows(c), cols(c), cols(a), Real(alpha)],
            mat(a).into(),
            mat(b).into(),
            vec![Real(1.0)],
            mat(c).into(),
        ],
    )
}

/// Triangular solve or multiply updating part `b` with triangle `a`.
fn tri(routine: &str, codes: &str, alpha: f64, a: &str, b: &str) -> UpdateStatement {
    let mut head: Vec<ArgTemplate> = codes.chars().map(Code).collect();
    head.extend([rows(b), cols(b), Real(alpha)]);
    stmt(routine, vec![head, mat(a).into(), mat(b).into()])
}

fn trsm(codes: &str, alpha: f64, a: &str, b: &str) -> UpdateStatement {
    tri("dtrsm", codes, alpha, a, b)
}

fn trmm(codes: &str, alpha: f64, a: &str, b: &str) -> UpdateStatement {
    tri("dtrmm", codes, alpha, a, b)
}

fn trinv(a: &str) -> UpdateStatement {
    stmt("dtrinv_unb", vec![vec![Code('N'), rows(a)], mat(a).into()])
}

fn getrf(a: &str) -> UpdateStatement {
    stmt("dgetrf_unb", vec![vec![rows(a)], mat(a).into()])
}

fn sylv(l: &str, u: &str, c: &str) -> UpdateStatement {
    stmt(
        "dsylv_unb",
        vec![vec![rows(c), cols(c)], mat(l).into(), mat(u).into(), mat(c).into()],
    )
}

fn square(op: &str, size: &str, direction: Direction) -> Traversal {
    Traversal {
        operand: op.to_string(),
        rows: size.to_string(),
        cols: size.to_string(),
        direction,
    }
}

fn trinv_variant(v: usize) -> Vec<UpdateStatement> {
    match v {
        // L10 := L10 L00 ; L10 := -L11^-1 L10 ; L11 := L11^-1
        1 => vec![
            trmm("RLNN", 1.0, "L00", "L10"),
            trsm("LLNN", -1.0, "L11", "L10"),
            trinv("L11"),
        ],
        // L21 := L22^-1 L21 ; L21 := -L21 L11^-1 ; L11 := L11^-1
        2 => vec![
            trsm("LLNN", 1.0, "L22", "L21"),
            trsm("RLNN", -1.0, "L11", "L21"),
            trinv("L11"),
        ],
        // L21 := -L21 L11^-1 ; L20 := L21 L10 + L20 ; L10 := L11^-1 L10 ;
        // L11 := L11^-1
        3 => vec![
            trsm("RLNN", -1.0, "L11", "L21"),
            gemm(1.0, "L21", "L10", "L20"),
            trsm("LLNN", 1.0, "L11", "L10"),
            trinv("L11"),
        ],
        // L21 := -L22^-1 L21 ; L20 := L20 - L21 L10 ; L10 := L10 L00 ;
        // L11 := L11^-1
        4 => vec![
            trsm("LLNN", -1.0, "L22", "L21"),
            gemm(-1.0, "L21", "L10", "L20"),
            trmm("RLNN", 1.0, "L00", "L10"),
            trinv("L11"),
        ],
        _ => unreachable!(),
    }
}

fn lu_variant(v: usize) -> Vec<UpdateStatement> {
    match v {
        // Right-looking.
        1 => vec![
            getrf("A11"),
            trsm("LLNU", 1.0, "A11", "A12"),
            trsm("RUNN", 1.0, "A11", "A21"),
            gemm(-1.0, "A21", "A12", "A22"),
        ],
        // Left-looking.
        2 => vec![
            trsm("LLNU", 1.0, "A00", "A01"),
            gemm(-1.0, "A10", "A01", "A11"),
            gemm(-1.0, "A20", "A01", "A21"),
            getrf("A11"),
            trsm("RUNN", 1.0, "A11", "A21"),
        ],
        // Crout.
        3 => vec![
            gemm(-1.0, "A10", "A01", "A11"),
            gemm(-1.0, "A10", "A02", "A12"),
            gemm(-1.0, "A20", "A01", "A21"),
            getrf("A11"),
            trsm("LLNU", 1.0, "A11", "A12"),
            trsm("RUNN", 1.0, "A11", "A21"),
        ],
        _ => unreachable!(),
    }
}

fn sylv_algorithm(name: &str, v: usize) -> Result<BlockedAlgorithm, AlgorithmError> {
    let c = |direction| Traversal {
        operand: "C".into(),
        rows: "m".into(),
        cols: "n".into(),
        direction,
    };
    match v {
        // Block columns of X, left to right.
        1 => BlockedAlgorithm::new(
            name,
            &["m", "n"],
            vec![
                square("L", "m", Direction::None),
                square("U", "n", Direction::TOP_LEFT),
                c(Direction::LEFT_RIGHT),
            ],
            vec![gemm(-1.0, "C0", "U01", "C1"), sylv("L", "U11", "C1")],
        ),
        // Diagonal blocks of X, finishing one block row and one block
        // column per step.
        2 => BlockedAlgorithm::new(
            name,
            &["m", "n"],
            vec![
                square("L", "m", Direction::TOP_LEFT),
                square("U", "n", Direction::TOP_LEFT),
                c(Direction::TOP_LEFT),
            ],
            vec![
                gemm(-1.0, "L10", "C01", "C11"),
                gemm(-1.0, "C10", "U01", "C11"),
                sylv("L11", "U11", "C11"),
                gemm(-1.0, "L10", "C02", "C12"),
                gemm(-1.0, "C10", "U02", "C12"),
                gemm(-1.0, "C11", "U12", "C12"),
                sylv("L11", "U22", "C12"),
                gemm(-1.0, "L20", "C01", "C21"),
                gemm(-1.0, "C20", "U01", "C21"),
                gemm(-1.0, "L21", "C11", "C21"),
                sylv("L22", "U11", "C21"),
            ],
        ),
        _ => unreachable!(),
    }
}

/// Operations with built-in variants, and how many each has.
pub const OPERATIONS: [(&str, usize); 3] = [("trinv", 4), ("lu", 3), ("sylv", 2)];

/// The built-in variant `variant` (1-based) of `operation`.
pub fn builtin_algorithm(operation: &str, variant: usize) -> Result<BlockedAlgorithm, AlgorithmError> {
    let name = format!("{operation}{variant}");
    let count = OPERATIONS
        .iter()
        .find(|(op, _)| *op == operation)
        .map(|(_, n)| *n)
        .ok_or_else(|| AlgorithmError::UnknownAlgorithm(name.clone()))?;
    if variant == 0 || variant > count {
        return Err(AlgorithmError::UnknownAlgorithm(name));
    }
    match operation {
        "trinv" => BlockedAlgorithm::new(
            &name,
            &["n"],
            vec![square("L", "n", Direction::TOP_LEFT)],
            trinv_variant(variant),
        ),
        "lu" => BlockedAlgorithm::new(
            &name,
            &["n"],
            vec![square("A", "n", Direction::TOP_LEFT)],
            lu_variant(variant),
        ),
        _ => sylv_algorithm(&name, variant),
    }
}

/// Looks up an algorithm by id such as `trinv3`.
pub fn algorithm_by_id(id: &str) -> Result<BlockedAlgorithm, AlgorithmError> {
    let split = id
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| AlgorithmError::UnknownAlgorithm(id.to_string()))?;
    let variant = id[split..]
        .parse()
        .map_err(|_| AlgorithmError::UnknownAlgorithm(id.to_string()))?;
    builtin_algorithm(&id[..split], variant)
}

/// Ids of all built-in algorithms.
pub fn algorithm_ids() -> Vec<String> {
    OPERATIONS
        .iter()
        .flat_map(|(op, n)| (1..=*n).map(move |v| format!("{op}{v}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_construct() {
        let ids = algorithm_ids();
        assert_eq!(ids.len(), 9);
        for id in ids {
            algorithm_by_id(&id).unwrap();
        }
    }

    #[test]
    fn unknown_variants_rejected() {
        assert!(builtin_algorithm("trinv", 5).is_err());
        assert!(builtin_algorithm("trinv", 0).is_err());
        assert!(builtin_algorithm("chol", 1).is_err());
        assert!(algorithm_by_id("lu").is_err());
    }

    #[test]
    fn variant_bodies() {
        let v3 = builtin_algorithm("trinv", 3).unwrap();
        let names: Vec<_> = v3.body.iter().map(|s| s.routine.as_str()).collect();
        assert_eq!(names, ["dtrsm", "dgemm", "dtrsm", "dtrinv_unb"]);
        let v1 = builtin_algorithm("trinv", 1).unwrap();
        assert_eq!(v1.body[0].routine, "dtrmm");
    }
}
