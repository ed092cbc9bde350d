use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::kernel::{lookup_signature, ArgKind, RoutineSignature};
use crate::model::{Bounds, Statistic};
use crate::sampler::{parse_entries, parse_list, parse_value, ConfigError, SamplerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Expansion,
    Refinement,
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expansion" => Ok(Strategy::Expansion),
            "refinement" => Ok(Strategy::Refinement),
            _ => Err("expected expansion or refinement".into()),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Expansion => "expansion",
            Strategy::Refinement => "refinement",
        })
    }
}

/// How leading dimensions are chosen for sampled calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdPolicy {
    /// Each leading dimension equals the rows of its matrix.
    Tight,
    Fixed(usize),
}

impl LdPolicy {
    pub fn ld(self, rows: usize) -> usize {
        match self {
            LdPolicy::Tight => rows.max(1),
            LdPolicy::Fixed(v) => v,
        }
    }
}

impl fmt::Display for LdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LdPolicy::Tight => f.write_str("tight"),
            LdPolicy::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelerConfig {
    pub routine: String,
    /// Half-open interval of each size argument, in signature order.
    pub domain: Bounds,
    /// Discrete combinations to model.
    pub combos: Vec<Vec<char>>,
    pub scalars: BTreeMap<String, f64>,
    pub ld: LdPolicy,
    pub counters: Vec<String>,
    pub statistics: Vec<Statistic>,
    /// Counter whose median decides the region layout.
    pub target: String,
    pub degree: u32,
    pub epsilon: f64,
    pub floors: BTreeMap<String, f64>,
    pub repetitions: usize,
    pub strategy: Strategy,
    pub growth: usize,
    pub seed_width: usize,
    pub min_width: usize,
    pub sampler: SamplerConfig,
}

pub const MODELER_KEYS: &[&str] = &[
    "routine",
    "domain",
    "domain.<arg>",
    "combos",
    "scalar.<arg>",
    "ld",
    "counters",
    "statistics",
    "target",
    "degree",
    "epsilon",
    "floor.<counter>",
    "repetitions",
    "strategy",
    "growth",
    "seed_width",
    "min_width",
    "sampler.<key>",
];

fn parse_interval(key: &str, value: &str) -> Result<(usize, usize), ConfigError> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| ConfigError::invalid(key, value, "expected lo..hi"))?;
    let lo: usize = parse_value(key, lo.trim())?;
    let hi: usize = parse_value(key, hi.trim())?;
    if lo < 1 || lo >= hi {
        return Err(ConfigError::invalid(key, value, "need 1 <= lo < hi"));
    }
    Ok((lo, hi))
}

impl ModelerConfig {
    /// Defaults for `routine` over `domain`.
    pub fn new(routine: &str, domain: Bounds) -> Result<Self, ConfigError> {
        let sig = signature(routine)?;
        if domain.len() != sig.size_args().len() {
            return Err(ConfigError::invalid(
                "domain",
                &format!("{domain:?}"),
                format!("{routine} has {} size arguments", sig.size_args().len()),
            ));
        }
        let scalars = sig
            .args
            .iter()
            .filter(|a| a.kind == ArgKind::Scalar)
            .map(|a| (a.name.clone(), 1.0))
            .collect();
        let sampler = SamplerConfig::default();
        let counters: Vec<String> = sampler.counters.iter().map(|c| c.name().to_string()).collect();
        Ok(ModelerConfig {
            routine: routine.to_string(),
            domain,
            combos: sig.discrete_combos(),
            scalars,
            ld: LdPolicy::Tight,
            target: counters[0].clone(),
            counters,
            statistics: vec![Statistic::Min, Statistic::Median, Statistic::Avg, Statistic::Max],
            degree: 3,
            epsilon: 0.05,
            floors: BTreeMap::new(),
            repetitions: 10,
            strategy: Strategy::Expansion,
            growth: 2,
            seed_width: 8,
            min_width: 8,
            sampler,
        })
    }

    /// Reads a configuration document. `routine` overrides the document's
    /// `routine` key.
    pub fn parse(text: &str, routine: Option<&str>) -> Result<Self, ConfigError> {
        let entries = parse_entries(text)?;
        let routine = match routine {
            Some(r) => r.to_string(),
            None => entries
                .iter()
                .find(|e| e.key == "routine")
                .map(|e| e.value.clone())
                .ok_or_else(|| ConfigError::Missing("routine".into()))?,
        };
        let sig = signature(&routine)?;
        let dims = sig.size_args();
        let mut domain: Vec<Option<(usize, usize)>> = vec![None; dims.len()];
        if let Some(e) = entries.iter().find(|e| e.key == "domain") {
            let iv = parse_interval(&e.key, &e.value)?;
            domain.iter_mut().for_each(|d| *d = Some(iv));
        }
        for e in entries.iter().filter(|e| e.key.starts_with("domain.")) {
            let arg = &e.key["domain.".len()..];
            let i = dims.iter().position(|d| *d == arg).ok_or_else(|| ConfigError::UnknownKey {
                line: e.line,
                key: e.key.clone(),
            })?;
            domain[i] = Some(parse_interval(&e.key, &e.value)?);
        }
        let domain = domain
            .into_iter()
            .zip(&dims)
            .map(|(d, name)| d.ok_or_else(|| ConfigError::Missing(format!("domain.{name}"))))
            .collect::<Result<Bounds, _>>()?;

        let mut cfg = ModelerConfig::new(&routine, domain)?;
        let mut sampler_counters_set = false;
        let mut target_set = false;
        for e in &entries {
            let (key, value) = (e.key.as_str(), e.value.as_str());
            match key {
                "routine" => {}
                "domain" => {}
                k if k.starts_with("domain.") => {}
                "combos" => {
                    if value != "all" {
                        let combos: Vec<Vec<char>> =
                            parse_list(value).iter().map(|c| c.chars().collect()).collect();
                        let valid = sig.discrete_combos();
                        if let Some(bad) = combos.iter().find(|c| !valid.contains(c)) {
                            return Err(ConfigError::invalid(
                                key,
                                value,
                                format!("{} is not a combination of {}", bad.iter().collect::<String>(), routine),
                            ));
                        }
                        if combos.is_empty() {
                            return Err(ConfigError::invalid(key, value, "no combinations given"));
                        }
                        cfg.combos = combos;
                    }
                }
                k if k.starts_with("scalar.") => {
                    let name = &k["scalar.".len()..];
                    if !cfg.scalars.contains_key(name) {
                        return Err(ConfigError::UnknownKey {
                            line: e.line,
                            key: k.to_string(),
                        });
                    }
                    cfg.scalars.insert(name.to_string(), parse_value(key, value)?);
                }
                "ld" => {
                    cfg.ld = if value == "tight" {
                        LdPolicy::Tight
                    } else {
                        LdPolicy::Fixed(parse_value(key, value)?)
                    }
                }
                "counters" => {
                    cfg.counters = parse_list(value);
                    if cfg.counters.is_empty() {
                        return Err(ConfigError::invalid(key, value, "no counters given"));
                    }
                }
                "statistics" => {
                    cfg.statistics = parse_list(value)
                        .iter()
                        .map(|s| parse_value(key, s))
                        .collect::<Result<_, _>>()?;
                    if cfg.statistics.is_empty() {
                        return Err(ConfigError::invalid(key, value, "no statistics given"));
                    }
                }
                "target" => {
                    cfg.target = value.to_string();
                    target_set = true;
                }
                "degree" => cfg.degree = parse_value(key, value)?,
                "epsilon" => cfg.epsilon = parse_value(key, value)?,
                k if k.starts_with("floor.") => {
                    cfg.floors
                        .insert(k["floor.".len()..].to_string(), parse_value(key, value)?);
                }
                "repetitions" => cfg.repetitions = parse_value(key, value)?,
                "strategy" => cfg.strategy = parse_value(key, value)?,
                "growth" => cfg.growth = parse_value(key, value)?,
                "seed_width" => cfg.seed_width = parse_value(key, value)?,
                "min_width" => cfg.min_width = parse_value(key, value)?,
                k if k.starts_with("sampler.") => {
                    let sk = &k["sampler.".len()..];
                    sampler_counters_set |= sk == "counters";
                    cfg.sampler.set(sk, value).map_err(|err| match err {
                        ConfigError::UnknownKey { .. } => ConfigError::UnknownKey {
                            line: e.line,
                            key: k.to_string(),
                        },
                        other => other,
                    })?;
                }
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: e.line,
                        key: key.to_string(),
                    })
                }
            }
        }
        if !target_set {
            cfg.target = cfg.counters[0].clone();
        }
        if !sampler_counters_set {
            // Counters the sampler cannot read are left to other sources.
            let known: Vec<_> = cfg.counters.iter().filter_map(|c| c.parse().ok()).collect();
            if !known.is_empty() {
                cfg.sampler.counters = known;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |k: &str, v: String, why: &str| Err(ConfigError::invalid(k, &v, why));
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon", self.epsilon.to_string(), "must be positive");
        }
        if self.repetitions < 1 {
            return bad("repetitions", self.repetitions.to_string(), "must be at least 1");
        }
        if self.growth < 2 {
            return bad("growth", self.growth.to_string(), "must be at least 2");
        }
        if self.seed_width < 1 {
            return bad("seed_width", self.seed_width.to_string(), "must be at least 1");
        }
        if self.min_width < 1 {
            return bad("min_width", self.min_width.to_string(), "must be at least 1");
        }
        if !self.counters.contains(&self.target) {
            return bad("target", self.target.clone(), "not among the counters");
        }
        if self.domain.iter().any(|&(lo, hi)| lo < 1 || lo >= hi) {
            return bad("domain", format!("{:?}", self.domain), "need 1 <= lo < hi");
        }
        Ok(())
    }

    /// Error floor of a counter.
    pub fn floor(&self, counter: &str) -> f64 {
        self.floors.get(counter).copied().unwrap_or(match counter {
            "ticks" => 1e3,
            _ => 1e-9,
        })
    }
}

fn signature(routine: &str) -> Result<&'static RoutineSignature, ConfigError> {
    lookup_signature(routine).map_err(|_| ConfigError::invalid("routine", routine, "unknown routine"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Counter;

    #[test]
    fn defaults() {
        let c = ModelerConfig::parse("routine = dgemm\ndomain = 1..64\n", None).unwrap();
        assert_eq!(c.domain, [(1, 64); 3]);
        assert_eq!(c.combos.len(), 4);
        assert_eq!((c.degree, c.epsilon, c.repetitions), (3, 0.05, 10));
        assert_eq!((c.growth, c.seed_width, c.min_width), (2, 8, 8));
        assert_eq!(c.scalars["alpha"], 1.0);
        assert_eq!(c.scalars["beta"], 1.0);
        assert_eq!(c.ld, LdPolicy::Tight);
        assert_eq!(c.strategy, Strategy::Expansion);
        assert_eq!(c.target, "ticks");
        assert_eq!(c.floor("flops"), 1e-9);
        assert_eq!(c.floor("ticks"), 1e3);
    }

    #[test]
    fn overrides() {
        let text = "\
routine = dtrsm
domain = 1..129
domain.n = 1..33
combos = LLNN RLNN
counters = flops
statistics = median, stddev
strategy = refinement
epsilon = 1e-6
ld = 200
floor.flops = 0.5
sampler.policy = incache
";
        let c = ModelerConfig::parse(text, None).unwrap();
        assert_eq!(c.domain, [(1, 129), (1, 33)]);
        assert_eq!(c.combos, [vec!['L', 'L', 'N', 'N'], vec!['R', 'L', 'N', 'N']]);
        assert_eq!(c.target, "flops");
        assert_eq!(c.sampler.counters, [Counter::Flops]);
        assert_eq!(c.statistics, [Statistic::Median, Statistic::Stddev]);
        assert_eq!(c.ld, LdPolicy::Fixed(200));
        assert_eq!(c.floor("flops"), 0.5);
        assert_eq!(c.strategy, Strategy::Refinement);
    }

    #[test]
    fn errors() {
        assert!(ModelerConfig::parse("domain = 1..9", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm\ndomain = 0..9", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm\ndomain = 1..9\ngrowth = 1", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm\ndomain = 1..9\ncombos = XX", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm\ndomain = 1..9\nfoo = 1", None).is_err());
        assert!(ModelerConfig::parse("routine = dgemm\ndomain = 1..9\nsampler.foo = 1", None).is_err());
        assert!(ModelerConfig::parse("domain = 1..9", Some("dgetrf_unb")).is_ok());
    }
}
