//! Measurement of individual kernel invocations.
//!
//! A [`Sampler`] owns one large arena of pseudo-random doubles. Requests
//! are validated and placed into the arena as they are read, then executed
//! in batches with counters read around each kernel call.

mod arena;
mod config;
mod engine;
mod protocol;
mod rng;

pub use arena::{ArenaState, CapacityError, Placement};
pub use config::{parse_entries, ConfigError, Counter, Entry, MemoryPolicy, SamplerConfig, SAMPLER_KEYS};
pub(crate) use config::{parse_list, parse_value};
pub use engine::{main_loop, LoopStats, MonotonicClock, Prepared, SampleError, Sampler, TickSource};
pub use protocol::{
    format_result_line, parse_request_line, parse_result_line, CounterSet, Line, ProtocolError,
};
pub use rng::XorShift64Star;
