use std::io::{Cursor, Write};
use std::process::{Command, Stdio};

use dlaperf::sampler::{main_loop, Counter, MemoryPolicy, Sampler, SamplerConfig};

fn cfg() -> SamplerConfig {
    SamplerConfig {
        memory_bytes: 1 << 20,
        ..SamplerConfig::default()
    }
}

fn run(config: SamplerConfig, input: &str) -> (String, String, dlaperf::sampler::LoopStats) {
    let mut s = Sampler::new(config);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let stats = main_loop(&mut s, Cursor::new(input), &mut out, &mut err).unwrap();
    (
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
        stats,
    )
}

// Values from a separate implementation of splitmix64-seeded xorshift64*.
#[test]
fn arena_golden_values_seed_42() {
    let s = Sampler::new(cfg());
    let expected = [
        0.1941059175341826,
        0.5626318272656207,
        0.4861061377100522,
        0.2711055606027185,
        0.8036678357064859,
        0.5820215125654452,
        0.3020369937753191,
        0.7953647999557572,
    ];
    assert_eq!(&s.arena()[..8], &expected);
}

#[test]
fn go_flushes_one_result() {
    let (out, err, stats) = run(cfg(), "dgemm N N 4 4 4 1.0 ? 4 ? 4 0.0 ? 4\ngo\n");
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("dgemm "));
    assert_eq!(out.split_whitespace().nth(2), Some("128"));
    assert!(err.is_empty());
    assert_eq!(stats.batches, [1]);
}

#[test]
fn empty_input_no_output() {
    let (out, err, stats) = run(cfg(), "");
    assert!(out.is_empty() && err.is_empty());
    assert!(stats.batches.is_empty());
}

#[test]
fn batches_split_at_max_batch() {
    let input = "dgemm N N 2 2 2 1.0 ? 2 ? 2 0.0 ? 2\n".repeat(1500);
    let mut c = cfg();
    c.counters = vec![Counter::Flops];
    let (out, _, stats) = run(c, &input);
    assert_eq!(stats.batches, [1000, 500]);
    assert_eq!(out.lines().count(), 1500);
    assert!(out.lines().all(|l| l == "dgemm 16"));
}

#[test]
fn malformed_lines_are_skipped_with_diagnostic() {
    let input = "dgemm N N 8\ndtrsm L L N N 4 4 1.0 ? 2 ? 4\ndtrsm L L N N 4 4 1.0 ? 4 ? 4\n";
    let (out, err, stats) = run(cfg(), input);
    assert_eq!(out.lines().collect::<Vec<_>>().len(), 1);
    assert_eq!(err.lines().count(), 2);
    assert!(err.lines().all(|l| l.starts_with('!')));
    assert_eq!(stats.skipped, 2);
}

#[test]
fn flops_only_output_is_deterministic() {
    let input = "dtrsm L L N N 16 8 1.0 ? 16 ? 16\ndtrmm R U T U 5 7 2.5 ? 7 ? 5\ngo\ndgetrf_unb 9 ? 9\ndsylv_unb 6 4 ? 6 ? 4 ? 6\n";
    let mut c = cfg();
    c.counters = vec![Counter::Flops];
    let a = run(c.clone(), input).0;
    let b = run(c.clone(), input).0;
    c.policy = MemoryPolicy::InCache;
    let d = run(c, input).0;
    assert_eq!(a, b);
    assert_eq!(a, d);
    assert_eq!(a.lines().count(), 4);
}

#[test]
fn results_follow_request_order() {
    let input = "dgetrf_unb 3 ? 3\ndgemm N N 1 1 1 1.0 ? 1 ? 1 0.0 ? 1\ndtrsm L L N N 1 1 1.0 ? 1 ? 1\n";
    let (out, _, _) = run(cfg(), input);
    let names: Vec<_> = out.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(names, ["dgetrf_unb", "dgemm", "dtrsm"]);
}

#[test]
fn binary_reads_stdin_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("s.conf");
    std::fs::write(&conf, "memory_bytes = 65536\ncounters = flops\n").unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_sampler"))
        .arg("--config")
        .arg(&conf)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"dgemm N N 4 4 4 1.0 ? 4 ? 4 0.0 ? 4\ngo\nbogus\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "dgemm 128\n");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with('!'));

    std::fs::write(&conf, "policy = l2\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_sampler"))
        .arg("--config")
        .arg(&conf)
        .stdin(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .unwrap();
    assert!(!status.success());
}
