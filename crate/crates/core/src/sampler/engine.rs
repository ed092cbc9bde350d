//! Batch execution and the stream main loop.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};
use std::time::Instant;

use log::debug;

use crate::kernel::{
    execute_kernel, flop_count, lookup_signature, validate_against, KernelError, SamplingRequest,
    Violation,
};

use super::arena::{ArenaState, CapacityError};
use super::config::{Counter, SamplerConfig};
use super::protocol::{format_result_line, parse_request_line, CounterSet, Line};
use super::rng::XorShift64Star;

/// Source of the `ticks` counter.
pub trait TickSource {
    fn now(&mut self) -> u64;
}

/// Nanoseconds since construction, from the OS monotonic clock.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        MonotonicClock {
            origin: Instant::now(),
        }
    }
}

impl TickSource for MonotonicClock {
    fn now(&mut self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("invalid request: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A validated request with operands placed in the arena.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub request: SamplingRequest,
    /// Element offsets of the matrix operands, in signature order.
    pub offsets: Vec<usize>,
    pub flops: u64,
}

pub struct Sampler {
    config: SamplerConfig,
    arena: Vec<f64>,
    state: ArenaState,
    rng: XorShift64Star,
    clock: Box<dyn TickSource + Send>,
    warmed: HashSet<String>,
}

impl Sampler {
    /// Allocates the arena and fills it from the configured seed.
    pub fn new(config: SamplerConfig) -> Self {
        Self::with_clock(config, Box::new(MonotonicClock::default()))
    }

    pub fn with_clock(config: SamplerConfig, clock: Box<dyn TickSource + Send>) -> Self {
        let words = config.memory_bytes / 8;
        let mut rng = XorShift64Star::new(config.seed);
        let mut arena = vec![0.0; words];
        rng.fill(&mut arena);
        Sampler {
            state: ArenaState::new(words * 8),
            config,
            arena,
            rng,
            clock,
            warmed: HashSet::new(),
        }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn arena(&self) -> &[f64] {
        &self.arena
    }

    pub fn arena_state(&self) -> &ArenaState {
        &self.state
    }

    /// Validates `request` and places its operands.
    pub fn prepare(&mut self, request: &SamplingRequest) -> Result<Prepared, SampleError> {
        let sig = lookup_signature(&request.routine)?;
        validate_against(sig, request).map_err(SampleError::Invalid)?;
        let footprints: Vec<usize> = request
            .matrix_extents(sig)
            .into_iter()
            .map(|(rows, cols, ld)| if rows == 0 || cols == 0 { 0 } else { ld.max(rows) * cols * 8 })
            .collect();
        let placement = self.state.place(&footprints, self.config.policy)?;
        if placement.wrapped && self.config.refill_on_wrap {
            debug!("arena wrapped (generation {}), refilling", self.state.generation);
            self.rng.fill(&mut self.arena);
        }
        Ok(Prepared {
            flops: flop_count(request)?,
            offsets: placement.offsets.into_iter().map(|b| b / 8).collect(),
            request: request.clone(),
        })
    }

    /// Executes prepared requests back to back and returns their counters
    /// in order.
    pub fn run_batch(&mut self, batch: &[Prepared]) -> Result<Vec<CounterSet>, SampleError> {
        let timed = self.config.counters.contains(&Counter::Ticks);
        let mut out = Vec::with_capacity(batch.len());
        for p in batch {
            if self.config.warmup > 0 && self.warmed.insert(p.request.to_string()) {
                for _ in 0..self.config.warmup {
                    execute_kernel(&p.request, &mut self.arena, &p.offsets)?;
                }
            }
            let t0 = if timed { self.clock.now() } else { 0 };
            execute_kernel(&p.request, &mut self.arena, &p.offsets)?;
            let t1 = if timed { self.clock.now() } else { 0 };
            let mut set = CounterSet::new();
            for c in &self.config.counters {
                match c {
                    Counter::Ticks => set.insert(c.name(), t1.saturating_sub(t0)),
                    Counter::Flops => set.insert(c.name(), p.flops),
                }
            }
            out.push(set);
        }
        Ok(out)
    }

    /// Prepares and runs `requests` as one batch.
    pub fn sample(&mut self, requests: &[SamplingRequest]) -> Result<Vec<CounterSet>, SampleError> {
        let batch = requests
            .iter()
            .map(|r| self.prepare(r))
            .collect::<Result<Vec<_>, _>>()?;
        self.run_batch(&batch)
    }
}

/// What the main loop did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopStats {
    /// Size of each executed batch, in order.
    pub batches: Vec<usize>,
    /// Lines rejected with a diagnostic.
    pub skipped: usize,
}

/// Reads requests until `go`, `max_batch` pending requests or end of
/// input, runs the batch, writes one result line per request and repeats.
/// Bad lines produce a `!` diagnostic on `diag` and are skipped.
pub fn main_loop<R: BufRead, W: Write, E: Write>(
    sampler: &mut Sampler,
    input: R,
    output: &mut W,
    diag: &mut E,
) -> io::Result<LoopStats> {
    let mut stats = LoopStats::default();
    let mut pending: Vec<Prepared> = Vec::new();
    let counters = sampler.config.counters.clone();

    let flush = |sampler: &mut Sampler,
                     pending: &mut Vec<Prepared>,
                     stats: &mut LoopStats,
                     output: &mut W,
                     diag: &mut E|
     -> io::Result<()> {
        if pending.is_empty() {
            return Ok(());
        }
        match sampler.run_batch(pending) {
            Ok(results) => {
                for (p, c) in pending.iter().zip(&results) {
                    writeln!(output, "{}", format_result_line(&p.request, c, &counters))?;
                }
                stats.batches.push(pending.len());
            }
            Err(e) => {
                writeln!(diag, "! batch failed: {e}")?;
                stats.skipped += pending.len();
            }
        }
        output.flush()?;
        pending.clear();
        Ok(())
    };

    for (i, line) in input.lines().enumerate() {
        let line = line?;
        match parse_request_line(&line) {
            Ok(Line::Comment) => {}
            Ok(Line::Go) => flush(sampler, &mut pending, &mut stats, output, diag)?,
            Ok(Line::Request(req)) => match sampler.prepare(&req) {
                Ok(p) => {
                    pending.push(p);
                    if pending.len() >= sampler.config.max_batch {
                        flush(sampler, &mut pending, &mut stats, output, diag)?;
                    }
                }
                Err(e) => {
                    writeln!(diag, "! line {}: {e}", i + 1)?;
                    stats.skipped += 1;
                }
            },
            Err(e) => {
                writeln!(diag, "! line {}: {e}", i + 1)?;
                stats.skipped += 1;
            }
        }
    }
    flush(sampler, &mut pending, &mut stats, output, diag)?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::config::MemoryPolicy;

    struct Step(u64);
    impl TickSource for Step {
        fn now(&mut self) -> u64 {
            self.0 += 7;
            self.0
        }
    }

    fn small(policy: MemoryPolicy) -> SamplerConfig {
        SamplerConfig {
            memory_bytes: 1 << 16,
            policy,
            ..SamplerConfig::default()
        }
    }

    fn req(line: &str) -> SamplingRequest {
        match parse_request_line(line).unwrap() {
            Line::Request(r) => r,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gemm_flops_and_fake_ticks() {
        let mut s = Sampler::with_clock(small(MemoryPolicy::Trash), Box::new(Step(0)));
        let out = s.sample(&[req("dgemm N N 4 4 4 1.0 ? 4 ? 4 0.0 ? 4")]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get("flops"), Some(128));
        assert_eq!(out[0].get("ticks"), Some(7));
        assert!(s.sample(&[]).unwrap().is_empty());
    }

    #[test]
    fn incache_reuses_offsets_trash_advances() {
        let r = req("dgemm N N 8 8 8 1.0 ? 8 ? 8 0.0 ? 8");
        let mut s = Sampler::new(small(MemoryPolicy::InCache));
        let a = s.prepare(&r).unwrap();
        let b = s.prepare(&r).unwrap();
        assert_eq!(a.offsets, [0, 64, 128]);
        assert_eq!(a.offsets, b.offsets);

        let mut s = Sampler::new(small(MemoryPolicy::Trash));
        let a = s.prepare(&r).unwrap();
        let b = s.prepare(&r).unwrap();
        assert!(b.offsets[0] > a.offsets[2]);
    }

    #[test]
    fn refill_on_wrap_rerandomizes() {
        let mut cfg = small(MemoryPolicy::Trash);
        cfg.memory_bytes = 3 * 512;
        let r = req("dgemm N N 8 8 8 1.0 ? 8 ? 8 0.0 ? 8");
        let mut s = Sampler::new(cfg.clone());
        let before = s.arena().to_vec();
        s.prepare(&r).unwrap();
        s.prepare(&r).unwrap();
        assert_eq!(s.arena_state().generation, 1);
        assert_ne!(s.arena(), &before[..]);

        cfg.refill_on_wrap = false;
        let mut s = Sampler::new(cfg);
        s.prepare(&r).unwrap();
        s.prepare(&r).unwrap();
        assert_eq!(s.arena(), &before[..]);
    }

    #[test]
    fn invalid_and_oversized_requests_rejected() {
        let mut s = Sampler::new(small(MemoryPolicy::Trash));
        assert!(matches!(
            s.prepare(&req("dtrsm L L N N 4 4 1.0 ? 2 ? 4")),
            Err(SampleError::Invalid(_))
        ));
        assert!(matches!(
            s.prepare(&req("dgemm N N 100 100 100 1.0 ? 100 ? 100 0.0 ? 100")),
            Err(SampleError::Capacity(_))
        ));
    }

    #[test]
    fn warmup_runs_are_not_reported() {
        let mut cfg = small(MemoryPolicy::InCache);
        cfg.warmup = 3;
        let mut s = Sampler::with_clock(cfg, Box::new(Step(0)));
        let r = req("dgemm N N 2 2 2 1.0 ? 2 ? 2 0.0 ? 2");
        let out = s.sample(&[r.clone(), r]).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].get("ticks"), Some(7));
    }
}
