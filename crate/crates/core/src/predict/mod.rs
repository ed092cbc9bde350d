//! Performance prediction of blocked algorithms from routine models.
//!
//! A trace's invocations are evaluated against the models of their
//! routines and the per-invocation estimates are summed per statistic.
//! On top of that sit efficiency, variant ranking and block-size sweeps.

mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use crate::blocked::{algorithm_by_id, AlgorithmError, Trace, OPERATIONS};
use crate::kernel::{flop_count, lookup_signature, SamplingRequest};
use crate::model::{deserialize, FormatError, ModelError, RoutineModel, Statistic};

pub use report::{emit_csv, parse_csv, parse_grid, CsvError, GridError};

/// Routine models keyed by routine name.
pub type ModelSet = BTreeMap<String, RoutineModel>;

#[derive(Debug, thiserror::Error)]
pub enum PredictError {
    #[error("invocation {index}: no model for {routine}")]
    MissingModel { index: usize, routine: String },
    #[error("invocation {index} ({routine}): {source}")]
    Model {
        index: usize,
        routine: String,
        #[source]
        source: ModelError,
    },
    #[error("invocation {index} ({routine}) at {point:?} lies outside the modeled domain")]
    OutsideDomain {
        index: usize,
        routine: String,
        point: Vec<usize>,
    },
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error("ticks must be positive, got {0}")]
    NonPositiveTicks(f64),
    #[error("unknown operation {0}")]
    UnknownOperation(String),
    #[error("models lack counter {0}")]
    MissingCounter(String),
    #[error("empty block-size grid")]
    EmptyGrid,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: String,
        #[source]
        source: FormatError,
    },
    #[error("two models for {0}")]
    Duplicate(String),
}

/// Reads every `*.pm` file in `dir`.
pub fn load_models(dir: &Path) -> Result<ModelSet, LoadError> {
    let io_err = |source| LoadError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pm"))
        .collect();
    paths.sort();
    let mut models = ModelSet::new();
    for p in paths {
        let path = p.display().to_string();
        let text = fs::read_to_string(&p).map_err(|source| LoadError::Io {
            path: path.clone(),
            source,
        })?;
        let model = deserialize(&text).map_err(|source| LoadError::Format { path, source })?;
        if models.contains_key(&model.routine) {
            return Err(LoadError::Duplicate(model.routine));
        }
        models.insert(model.routine.clone(), model);
    }
    Ok(models)
}

/// Summed estimates of a trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Prediction {
    pub totals: BTreeMap<(String, Statistic), f64>,
    /// Evaluations that fell outside a model's domain.
    pub extrapolated: usize,
    pub invocations: usize,
}

impl Prediction {
    /// Total of `counter` under `stat`; zero when nothing was summed.
    pub fn total(&self, counter: &str, stat: Statistic) -> f64 {
        self.totals
            .get(&(counter.to_string(), stat))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Puts one invocation's estimates in order: nothing negative, and min,
/// median, avg within [min, max]. Separately fitted polynomials can
/// violate this slightly, mostly when extrapolating.
fn repair(values: &mut BTreeMap<Statistic, f64>) {
    for v in values.values_mut() {
        *v = v.max(0.0);
    }
    let (lo, hi) = match (values.get(&Statistic::Min), values.get(&Statistic::Max)) {
        (Some(&a), Some(&b)) => (a.min(b), a.max(b)),
        (Some(&a), None) => (a, f64::INFINITY),
        (None, Some(&b)) => (0.0, b),
        (None, None) => return,
    };
    for (s, v) in values.iter_mut() {
        *v = match s {
            Statistic::Min => lo,
            Statistic::Max if hi.is_finite() => hi,
            Statistic::Median | Statistic::Avg => v.clamp(lo, hi),
            _ => *v,
        };
    }
}

/// Sums the estimates of every invocation of `trace`.
///
/// Counters are those of the first invocation's model; every other model
/// must provide them too. With `strict_domain`, an evaluation outside a
/// model's domain is an error instead of being counted.
pub fn predict(
    trace: &Trace,
    models: &ModelSet,
    statistics: &[Statistic],
    strict_domain: bool,
) -> Result<Prediction, PredictError> {
    let mut out = Prediction::default();
    let mut counters: Option<Vec<String>> = None;
    for (index, call) in trace.iter().enumerate() {
        let model = models.get(&call.routine).ok_or_else(|| PredictError::MissingModel {
            index,
            routine: call.routine.clone(),
        })?;
        let model_err = |source| PredictError::Model {
            index,
            routine: call.routine.clone(),
            source,
        };
        let sig = lookup_signature(&call.routine)
            .map_err(|_| PredictError::MissingModel {
                index,
                routine: call.routine.clone(),
            })?;
        let combo = call.discrete_combo(sig);
        let point = call.size_point(sig);
        let pw = model
            .combos
            .get(&combo)
            .ok_or_else(|| model_err(ModelError::UnknownCombo(combo.iter().collect())))?;
        let counters = counters.get_or_insert_with(|| pw.counters.clone());
        let mut outside = false;
        for counter in counters.iter() {
            let mut values = BTreeMap::new();
            for &stat in statistics {
                let e = pw.evaluate(&point, counter, stat).map_err(model_err)?;
                outside |= !e.in_domain;
                values.insert(stat, e.value);
            }
            repair(&mut values);
            for (stat, v) in values {
                *out.totals.entry((counter.clone(), stat)).or_insert(0.0) += v;
            }
        }
        if outside {
            if strict_domain {
                return Err(PredictError::OutsideDomain {
                    index,
                    routine: call.routine.clone(),
                    point,
                });
            }
            out.extrapolated += 1;
        }
        out.invocations += 1;
    }
    Ok(out)
}

/// Operation part of an algorithm id, e.g. `lu` for `lu2`.
pub fn operation_of(id: &str) -> &str {
    id.trim_end_matches(|c: char| c.is_ascii_digit())
}

/// Flops that count as useful work for `operation` at size `n`.
pub fn useful_flops(operation: &str, n: usize) -> Result<f64, PredictError> {
    let unblocked = |routine: &str| -> f64 {
        let sig = lookup_signature(routine).expect("built-in routine");
        let req = SamplingRequest::assemble(sig, &[], &vec![n; sig.size_args().len()], |_| 1.0, |r| r.max(1));
        flop_count(&req).expect("valid request") as f64
    };
    match operation {
        "trinv" => {
            let n = n as f64;
            Ok(n * n * n / 6.0 + n * n / 2.0 + n / 3.0)
        }
        "lu" => Ok(unblocked("dgetrf_unb")),
        "sylv" => Ok(unblocked("dsylv_unb")),
        _ => Err(PredictError::UnknownOperation(operation.to_string())),
    }
}

/// Fraction of peak: useful flops over `peak_flops_per_tick * ticks`.
pub fn efficiency(operation: &str, n: usize, ticks: f64, peak_flops_per_tick: f64) -> Result<f64, PredictError> {
    if ticks.is_nan() || ticks <= 0.0 {
        return Err(PredictError::NonPositiveTicks(ticks));
    }
    Ok(useful_flops(operation, n)? / (peak_flops_per_tick * ticks))
}

/// Settings shared by ranking and sweeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOptions {
    pub statistics: Vec<Statistic>,
    /// Statistic the table is ordered by.
    pub order_by: Statistic,
    pub peak_flops_per_tick: f64,
    pub strict_domain: bool,
    /// Counter holding execution time.
    pub ticks: String,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            statistics: vec![Statistic::Min, Statistic::Median, Statistic::Avg, Statistic::Max],
            order_by: Statistic::Median,
            peak_flops_per_tick: 2.0,
            strict_domain: false,
            ticks: "ticks".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingRow {
    pub algorithm: String,
    pub n: usize,
    pub b: usize,
    pub ticks: BTreeMap<Statistic, f64>,
    pub efficiency: BTreeMap<Statistic, f64>,
    pub extrapolated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingTable {
    pub statistics: Vec<Statistic>,
    pub rows: Vec<RankingRow>,
}

/// Relative difference below which two predictions count as equal.
pub const TIE_TOLERANCE: f64 = 1e-9;

fn ties(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

fn row_for(
    id: &str,
    n: usize,
    b: usize,
    models: &ModelSet,
    opts: &RankOptions,
) -> Result<RankingRow, PredictError> {
    let alg = algorithm_by_id(id)?;
    let trace = alg.generate_trace(&vec![n; alg.sizes.len()], b)?;
    let mut stats = opts.statistics.clone();
    if !stats.contains(&opts.order_by) {
        stats.push(opts.order_by);
    }
    let p = predict(&trace, models, &stats, opts.strict_domain)?;
    if !trace.is_empty() && !p.totals.keys().any(|(c, _)| *c == opts.ticks) {
        return Err(PredictError::MissingCounter(opts.ticks.clone()));
    }
    let op = operation_of(id);
    let mut ticks = BTreeMap::new();
    let mut eff = BTreeMap::new();
    for &s in &stats {
        let t = p.total(&opts.ticks, s);
        ticks.insert(s, t);
        // An empty trace takes no time; its efficiency is reported as 0.
        eff.insert(
            s,
            if t > 0.0 {
                efficiency(op, n, t, opts.peak_flops_per_tick)?
            } else {
                0.0
            },
        );
    }
    Ok(RankingRow {
        algorithm: id.to_string(),
        n,
        b,
        ticks,
        efficiency: eff,
        extrapolated: p.extrapolated,
    })
}

/// Orders rows by the chosen statistic, treating near-equal values as
/// ties broken by algorithm id.
fn order_rows(rows: &mut [RankingRow], by: Statistic) {
    rows.sort_by(|a, b| a.ticks[&by].total_cmp(&b.ticks[&by]).then_with(|| a.algorithm.cmp(&b.algorithm)));
    let mut start = 0;
    while start < rows.len() {
        let head = rows[start].ticks[&by];
        let mut end = start + 1;
        while end < rows.len() && ties(head, rows[end].ticks[&by]) {
            end += 1;
        }
        rows[start..end].sort_by(|a, b| a.algorithm.cmp(&b.algorithm));
        start = end;
    }
}

/// Predicts every algorithm at every size with block size `b`. Rows are
/// grouped by `n` in grid order and ranked within each group.
pub fn rank(
    ids: &[String],
    ns: &[usize],
    b: usize,
    models: &ModelSet,
    opts: &RankOptions,
) -> Result<RankingTable, PredictError> {
    let mut rows = Vec::new();
    for &n in ns {
        let mut group = ids
            .iter()
            .map(|id| row_for(id, n, b, models, opts))
            .collect::<Result<Vec<_>, _>>()?;
        order_rows(&mut group, opts.order_by);
        rows.extend(group);
    }
    Ok(RankingTable {
        statistics: table_stats(opts),
        rows,
    })
}

fn table_stats(opts: &RankOptions) -> Vec<Statistic> {
    let mut s = opts.statistics.clone();
    if !s.contains(&opts.order_by) {
        s.push(opts.order_by);
    }
    s
}

/// Ids of the variants of `operation`.
pub fn variants(operation: &str) -> Result<Vec<String>, PredictError> {
    OPERATIONS
        .iter()
        .find(|(op, _)| *op == operation)
        .map(|(op, count)| (1..=*count).map(|v| format!("{op}{v}")).collect())
        .ok_or_else(|| PredictError::UnknownOperation(operation.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// One row per block size, in grid order.
    pub table: RankingTable,
    /// Best block size per statistic; near-ties go to the smaller size.
    pub best: BTreeMap<Statistic, usize>,
}

impl Sweep {
    pub fn argmin(&self, stat: Statistic) -> Option<usize> {
        self.best.get(&stat).copied()
    }
}

pub fn sweep_blocksize(
    id: &str,
    n: usize,
    bs: &[usize],
    models: &ModelSet,
    opts: &RankOptions,
) -> Result<Sweep, PredictError> {
    if bs.is_empty() {
        return Err(PredictError::EmptyGrid);
    }
    let rows = bs
        .iter()
        .map(|&b| row_for(id, n, b, models, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let stats = table_stats(opts);
    let mut best = BTreeMap::new();
    for &s in &stats {
        let mut pick = &rows[0];
        for r in &rows[1..] {
            let (t, bt) = (r.ticks[&s], pick.ticks[&s]);
            if if ties(t, bt) { r.b < pick.b } else { t < bt } {
                pick = r;
            }
        }
        best.insert(s, pick.b);
    }
    Ok(Sweep {
        table: RankingTable {
            statistics: stats,
            rows,
        },
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trinv_useful_flops() {
        assert!((useful_flops("trinv", 2).unwrap() - 4.0).abs() < 1e-12);
        assert!((efficiency("trinv", 2, 2.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((efficiency("trinv", 1, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(efficiency("trinv", 4, 0.0, 2.0).is_err());
        assert!(useful_flops("qr", 4).is_err());
    }

    #[test]
    fn repair_orders_statistics() {
        let mut v: BTreeMap<_, _> = [
            (Statistic::Min, 5.0),
            (Statistic::Median, 4.0),
            (Statistic::Avg, 9.0),
            (Statistic::Max, 8.0),
        ]
        .into_iter()
        .collect();
        repair(&mut v);
        assert_eq!(v[&Statistic::Median], 5.0);
        assert_eq!(v[&Statistic::Avg], 8.0);
        let mut neg: BTreeMap<_, _> = [(Statistic::Median, -3.0)].into_iter().collect();
        repair(&mut neg);
        assert_eq!(neg[&Statistic::Median], 0.0);
    }

    #[test]
    fn operation_names() {
        assert_eq!(operation_of("trinv3"), "trinv");
        assert_eq!(variants("lu").unwrap(), ["lu1", "lu2", "lu3"]);
        assert!(variants("qr").is_err());
    }

    #[test]
    fn near_ties_break_by_id() {
        let row = |id: &str, t: f64| RankingRow {
            algorithm: id.into(),
            n: 1,
            b: 1,
            ticks: [(Statistic::Median, t)].into_iter().collect(),
            efficiency: BTreeMap::new(),
            extrapolated: 0,
        };
        let mut rows = vec![
            row("trinv4", 2.0),
            row("trinv3", 1.0),
            row("trinv2", 1.0 + 1e-13),
            row("trinv1", 1.0 + 2e-13),
        ];
        order_rows(&mut rows, Statistic::Median);
        let ids: Vec<_> = rows.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(ids, ["trinv1", "trinv2", "trinv3", "trinv4"]);
    }
}
