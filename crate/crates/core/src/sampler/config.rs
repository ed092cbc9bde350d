//! The `key = value` configuration dialect shared by the sampler and the
//! modeler.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value {value:?} for key {key:?}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: key {key:?} given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key {0:?}")]
    Missing(String),
}

impl ConfigError {
    pub fn invalid(key: &str, value: &str, reason: impl Into<String>) -> Self {
        ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}

/// One `key = value` entry with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Splits a configuration document into entries. `#` starts a comment;
/// blank lines are ignored; repeated keys are an error.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        };
        let key = k.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        }
        if out.iter().any(|e| e.key == key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        out.push(Entry {
            line,
            key: key.to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

pub(crate) fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| ConfigError::invalid(key, value, e.to_string()))
}

pub(crate) fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::invalid(key, value, "expected true or false")),
    }
}

pub(crate) fn parse_list(value: &str) -> Vec<String> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Memory placement policy for matrix operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryPolicy {
    /// Every invocation gets fresh arena memory, so operands start cold.
    Trash,
    /// Every invocation reuses the same small window at the arena start.
    InCache,
}

impl FromStr for MemoryPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trash" => Ok(MemoryPolicy::Trash),
            "incache" => Ok(MemoryPolicy::InCache),
            _ => Err("expected trash or incache".into()),
        }
    }
}

impl fmt::Display for MemoryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryPolicy::Trash => "trash",
            MemoryPolicy::InCache => "incache",
        })
    }
}

/// A counter the sampler knows how to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Counter {
    /// Elapsed nanoseconds of the monotonic clock.
    Ticks,
    /// Analytic floating-point operation count.
    Flops,
}

impl Counter {
    pub fn name(self) -> &'static str {
        match self {
            Counter::Ticks => "ticks",
            Counter::Flops => "flops",
        }
    }
}

impl FromStr for Counter {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ticks" => Ok(Counter::Ticks),
            "flops" => Ok(Counter::Flops),
            _ => Err(format!("no counter backend named {s}")),
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerConfig {
    pub memory_bytes: usize,
    pub policy: MemoryPolicy,
    pub counters: Vec<Counter>,
    pub max_batch: usize,
    pub seed: u64,
    pub refill_on_wrap: bool,
    /// Unmeasured executions before the first measured one of each
    /// distinct request.
    pub warmup: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            memory_bytes: 256 << 20,
            policy: MemoryPolicy::Trash,
            counters: vec![Counter::Ticks, Counter::Flops],
            max_batch: 1000,
            seed: 42,
            refill_on_wrap: true,
            warmup: 0,
        }
    }
}

pub const SAMPLER_KEYS: &[&str] = &[
    "memory_bytes",
    "policy",
    "counters",
    "max_batch",
    "seed",
    "refill_on_wrap",
    "warmup",
];

impl SamplerConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SamplerConfig::default();
        for e in parse_entries(text)? {
            cfg.set(&e.key, &e.value).map_err(|err| match err {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: e.line, key },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Applies one entry; unknown keys yield [`ConfigError::UnknownKey`]
    /// with line 0.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "memory_bytes" => self.memory_bytes = parse_value(key, value)?,
            "policy" => self.policy = parse_value(key, value)?,
            "counters" => {
                let names = parse_list(value);
                if names.is_empty() {
                    return Err(ConfigError::invalid(key, value, "no counters given"));
                }
                let mut counters = Vec::new();
                for n in names {
                    let c: Counter = parse_value(key, &n)?;
                    if counters.contains(&c) {
                        return Err(ConfigError::invalid(key, value, "counter listed twice"));
                    }
                    counters.push(c);
                }
                self.counters = counters;
            }
            "max_batch" => {
                let v: usize = parse_value(key, value)?;
                if v == 0 {
                    return Err(ConfigError::invalid(key, value, "must be at least 1"));
                }
                self.max_batch = v;
            }
            "seed" => self.seed = parse_value(key, value)?,
            "refill_on_wrap" => self.refill_on_wrap = parse_bool(key, value)?,
            "warmup" => self.warmup = parse_value(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Renders the configuration in the dialect [`SamplerConfig::parse`]
    /// reads.
    pub fn to_text(&self) -> String {
        let counters: Vec<_> = self.counters.iter().map(|c| c.name()).collect();
        format!(
            "memory_bytes = {}\npolicy = {}\ncounters = {}\nmax_batch = {}\nseed = {}\nrefill_on_wrap = {}\nwarmup = {}\n",
            self.memory_bytes,
            self.policy,
            counters.join(","),
            self.max_batch,
            self.seed,
            self.refill_on_wrap,
            self.warmup
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(SamplerConfig::parse("").unwrap(), SamplerConfig::default());
        let d = SamplerConfig::default();
        assert_eq!(d.memory_bytes, 256 * 1024 * 1024);
        assert_eq!(d.counters, [Counter::Ticks, Counter::Flops]);
        assert_eq!((d.max_batch, d.seed, d.refill_on_wrap), (1000, 42, true));
    }

    #[test]
    fn policy_override_keeps_other_defaults() {
        let cfg = SamplerConfig::parse("policy = incache\n").unwrap();
        assert_eq!(cfg.policy, MemoryPolicy::InCache);
        assert_eq!(
            SamplerConfig {
                policy: MemoryPolicy::Trash,
                ..cfg
            },
            SamplerConfig::default()
        );
    }

    #[test]
    fn invalid_policy_names_key() {
        match SamplerConfig::parse("policy = l2").unwrap_err() {
            ConfigError::InvalidValue { key, value, .. } => {
                assert_eq!(key, "policy");
                assert_eq!(value, "l2");
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn comments_unknown_keys_and_syntax() {
        let cfg = SamplerConfig::parse("# header\n\ncounters = flops # only flops\n").unwrap();
        assert_eq!(cfg.counters, [Counter::Flops]);
        assert_eq!(
            SamplerConfig::parse("seed = 1\nfoo = 2").unwrap_err(),
            ConfigError::UnknownKey {
                line: 2,
                key: "foo".into()
            }
        );
        assert!(matches!(
            SamplerConfig::parse("\n\nseed 3").unwrap_err(),
            ConfigError::Syntax { line: 3, .. }
        ));
        assert!(SamplerConfig::parse("max_batch = 0").is_err());
        assert!(SamplerConfig::parse("counters = l1misses").is_err());
        assert!(SamplerConfig::parse("seed = 1\nseed = 2").is_err());
    }

    #[test]
    fn text_round_trip() {
        let cfg = SamplerConfig {
            memory_bytes: 4096,
            policy: MemoryPolicy::InCache,
            counters: vec![Counter::Flops],
            max_batch: 3,
            seed: 7,
            refill_on_wrap: false,
            warmup: 2,
        };
        assert_eq!(SamplerConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
