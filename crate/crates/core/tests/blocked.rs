mod common;

use common::{rng, Mat};
use dlaperf::blocked::{
    algorithm_by_id, algorithm_ids, builtin_algorithm, execute_trace, Backend, OperandData,
    Operands, Trace,
};
use dlaperf::kernel::{lookup_signature, validate_against, ArgValue};
use proptest::prelude::*;

fn operand(m: &Mat) -> OperandData {
    OperandData::new(m.rows, m.cols, m.data.clone())
}

fn to_mat(o: &OperandData) -> Mat {
    Mat {
        rows: o.rows,
        cols: o.cols,
        data: o.data.clone(),
    }
}

fn flops(trace: &Trace) -> u64 {
    execute_trace(trace, Backend::Counting)
        .unwrap()
        .get("flops")
        .unwrap()
}

/// Short form of a call: routine, codes and sizes, and any scalars.
fn brief(trace: &Trace) -> Vec<String> {
    trace
        .iter()
        .map(|r| {
            let mut s = r.routine.clone();
            let sig = lookup_signature(&r.routine).unwrap();
            for (a, v) in sig.args.iter().zip(&r.values) {
                match (v, &a.kind) {
                    (ArgValue::Code(c), _) => s.push_str(&format!(" {c}")),
                    (ArgValue::Int(i), dlaperf::kernel::ArgKind::Size) => {
                        s.push_str(&format!(" {i}"))
                    }
                    (ArgValue::Real(x), _) => s.push_str(&format!(" {x}")),
                    _ => {}
                }
            }
            s
        })
        .collect()
}

/// Flops of the unblocked inversion of an n × n non-unit lower triangle:
/// `n` reciprocals plus, for column j, a (n-j-1)-sized trmv and scaling.
fn trinv_reference(n: u64) -> u64 {
    (n * n * n + 2 * n) / 3
}

/// `sum_{t<n} (t + 2 t^2)`, written with the power-sum formulas.
fn getrf_reference(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    n * (n - 1) / 2 + (n - 1) * n * (2 * n - 1) / 3
}

#[test]
fn single_block_is_one_unblocked_call() {
    let t = builtin_algorithm("trinv", 2).unwrap().generate_trace(&[8], 8).unwrap();
    assert_eq!(brief(&t), ["dtrinv_unb N 8"]);
    for id in algorithm_ids() {
        let alg = algorithm_by_id(&id).unwrap();
        let sizes: Vec<usize> = alg.sizes.iter().map(|_| 9).collect();
        for b in [9, 10, 100] {
            let t = alg.generate_trace(&sizes, b).unwrap();
            assert_eq!(t.len(), 1, "{id} b={b}: {t}");
            assert!(t.calls[0].routine.ends_with("_unb"));
        }
    }
}

#[test]
fn trinv3_hand_expansion() {
    let t = builtin_algorithm("trinv", 3).unwrap().generate_trace(&[8], 4).unwrap();
    assert_eq!(
        brief(&t),
        [
            "dtrsm R L N N 4 4 -1",
            "dtrinv_unb N 4",
            "dtrsm L L N N 4 4 1",
            "dtrinv_unb N 4",
        ]
    );
    // Leading dimensions are those of the full matrix.
    assert!(t.to_string().lines().all(|l| l.contains("? 8")));
}

#[test]
fn one_by_one_inversion_is_one_division() {
    for v in 1..=4 {
        let t = builtin_algorithm("trinv", v).unwrap().generate_trace(&[1], 3).unwrap();
        assert_eq!(flops(&t), 1);
    }
}

#[test]
fn trinv_and_lu_totals_match_reference_counts() {
    for n in [8usize, 16, 33] {
        for b in [1, 4, 7, n] {
            for v in 1..=3 {
                let t = builtin_algorithm("trinv", v).unwrap().generate_trace(&[n], b).unwrap();
                assert_eq!(flops(&t), trinv_reference(n as u64), "trinv{v} n={n} b={b}");
                let t = builtin_algorithm("lu", v).unwrap().generate_trace(&[n], b).unwrap();
                assert_eq!(flops(&t), getrf_reference(n as u64), "lu{v} n={n} b={b}");
            }
        }
    }
}

// The fourth inversion variant multiplies L10 by the already inverted L00
// and updates L20 with a general product; with more than one block that is
// more work than the other three variants.
#[test]
fn trinv4_costs_more_once_blocked() {
    let alg = builtin_algorithm("trinv", 4).unwrap();
    assert_eq!(flops(&alg.generate_trace(&[64], 64).unwrap()), trinv_reference(64));
    let blocked = flops(&alg.generate_trace(&[64], 16).unwrap());
    assert!(blocked > trinv_reference(64));
}

#[test]
fn kernel_backend_flops_match_counting_backend() {
    let mut r = rng(11);
    for id in algorithm_ids() {
        let alg = algorithm_by_id(&id).unwrap();
        let sizes: Vec<usize> = if alg.sizes.len() == 2 { vec![11, 6] } else { vec![13] };
        let mut ops = inputs(&id, &sizes, &mut r);
        let t = alg.generate_trace(&sizes, 4).unwrap();
        let run = execute_trace(&t, Backend::Kernel(&mut ops)).unwrap();
        assert_eq!(run, execute_trace(&t, Backend::Counting).unwrap(), "{id}");
    }
}

fn inputs(id: &str, sizes: &[usize], r: &mut rand::rngs::StdRng) -> Operands {
    let mut ops = Operands::new();
    if id.starts_with("trinv") {
        ops.insert("L".into(), operand(&Mat::lower_well_conditioned(sizes[0], r)));
    } else if id.starts_with("lu") {
        ops.insert("A".into(), operand(&Mat::diagonally_dominant(sizes[0], r)));
    } else {
        let (m, n) = (sizes[0], sizes[1]);
        ops.insert("L".into(), operand(&Mat::lower_well_conditioned(m, r)));
        ops.insert(
            "U".into(),
            operand(&Mat::lower_well_conditioned(n, r).t()),
        );
        ops.insert("C".into(), operand(&Mat::random(m, n, r)));
    }
    ops
}

#[test]
fn trinv_variants_invert() {
    let mut r = rng(3);
    let n = 16;
    let l = Mat::lower_well_conditioned(n, &mut r);
    let mut results = Vec::new();
    for v in 1..=4 {
        for b in [1, 3, 5, 16] {
            let mut ops: Operands = [("L".to_string(), operand(&l))].into_iter().collect();
            let t = builtin_algorithm("trinv", v).unwrap().generate_trace(&[n], b).unwrap();
            execute_trace(&t, Backend::Kernel(&mut ops)).unwrap();
            let inv = to_mat(&ops["L"]).triangle(true, false);
            let err = l.mul(&inv).max_diff(&Mat::identity(n));
            assert!(err <= 1e-10, "trinv{v} b={b}: {err}");
            results.push(inv);
        }
    }
    for m in &results[1..] {
        assert!(m.max_diff(&results[0]) <= 1e-8);
    }
}

#[test]
fn lu_variants_factor() {
    let mut r = rng(4);
    for n in [1usize, 10, 17] {
        let a = Mat::diagonally_dominant(n, &mut r);
        for v in 1..=3 {
            for b in [1, 4, 6, 32] {
                let mut ops: Operands = [("A".to_string(), operand(&a))].into_iter().collect();
                let t = builtin_algorithm("lu", v).unwrap().generate_trace(&[n], b).unwrap();
                execute_trace(&t, Backend::Kernel(&mut ops)).unwrap();
                let f = to_mat(&ops["A"]);
                let lu = f.triangle(true, true).mul(&f.triangle(false, false));
                let err = lu.max_diff(&a);
                assert!(err <= 1e-10 * n as f64 * 2.0 * n as f64, "lu{v} n={n} b={b}: {err}");
            }
        }
    }
}

#[test]
fn sylvester_variants_solve() {
    let mut r = rng(5);
    for (m, n) in [(9, 9), (13, 5), (4, 11), (1, 1)] {
        let l = Mat::lower_well_conditioned(m, &mut r);
        let u = Mat::lower_well_conditioned(n, &mut r).t();
        let c = Mat::random(m, n, &mut r);
        for v in 1..=2 {
            for b in [1, 2, 4, 20] {
                let mut ops: Operands = [
                    ("L".to_string(), operand(&l)),
                    ("U".to_string(), operand(&u)),
                    ("C".to_string(), operand(&c)),
                ]
                .into_iter()
                .collect();
                let t = builtin_algorithm("sylv", v).unwrap().generate_trace(&[m, n], b).unwrap();
                execute_trace(&t, Backend::Kernel(&mut ops)).unwrap();
                let x = to_mat(&ops["C"]);
                let res = l.mul(&x).add(&x.mul(&u)).max_diff(&c);
                assert!(res <= 1e-10, "sylv{v} {m}x{n} b={b}: {res}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn traces_are_valid_nonempty_and_deterministic(
        idx in 0usize..9,
        m in 1usize..40,
        n in 1usize..40,
        b in 1usize..50,
    ) {
        let id = &algorithm_ids()[idx];
        let alg = algorithm_by_id(id).unwrap();
        let sizes: Vec<usize> = if alg.sizes.len() == 2 { vec![m, n] } else { vec![n] };
        let t = alg.generate_trace(&sizes, b).unwrap();
        prop_assert!(!t.is_empty());
        for call in t.iter() {
            let sig = lookup_signature(&call.routine).unwrap();
            prop_assert!(validate_against(sig, call).is_ok());
            prop_assert!(call.size_point(sig).iter().all(|&s| s > 0), "{}", call);
        }
        prop_assert_eq!(&t, &alg.generate_trace(&sizes, b).unwrap());
    }

    #[test]
    fn inversion_and_lu_work_is_block_size_invariant(n in 1usize..48, b in 1usize..48, v in 1usize..=3) {
        let inv = builtin_algorithm("trinv", v).unwrap().generate_trace(&[n], b).unwrap();
        prop_assert_eq!(flops(&inv), trinv_reference(n as u64));
        let lu = builtin_algorithm("lu", v).unwrap().generate_trace(&[n], b).unwrap();
        prop_assert_eq!(flops(&lu), getrf_reference(n as u64));
    }
}
