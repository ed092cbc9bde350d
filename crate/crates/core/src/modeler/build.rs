use std::collections::BTreeMap;

use log::{debug, info, warn};

use crate::kernel::{lookup_signature, RoutineSignature, SamplingRequest};
use crate::model::{
    contains, subtract, Bounds, CoverViolation, PiecewiseModel, Polynomial, Region, RoutineModel,
    Statistic,
};

use super::config::{ModelerConfig, Strategy};
use super::fit::{fit_error, fit_polynomial};
use super::plan::plan_samples;
use super::source::{SampleSource, SourceError};
use super::stats::{summarize, StatisticsSummary, SummaryError};

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("unknown routine {0}")]
    UnknownRoutine(String),
    #[error("sampling {combo}: {source}")]
    Source {
        combo: String,
        #[source]
        source: SourceError,
    },
    #[error("expected {expected} measurements, got {found}")]
    ShortRead { expected: usize, found: usize },
    #[error(transparent)]
    Summary(#[from] SummaryError),
    #[error("model for {combo} does not cover its domain: {violations:?}")]
    Cover {
        combo: String,
        violations: Vec<CoverViolation>,
    },
}

/// What a build cost and how well it did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuildReport {
    /// Distinct points sampled, summed over combinations.
    pub points: usize,
    /// Requests sent to the sample source.
    pub requests: usize,
    pub warnings: Vec<String>,
    /// Relative error of the final target model at every region's check
    /// points.
    pub check_errors: Vec<f64>,
}

/// Measured summaries of one combination, keyed by size point.
struct Collector<'a> {
    cfg: &'a ModelerConfig,
    sig: &'static RoutineSignature,
    combo: &'a [char],
    source: &'a mut dyn SampleSource,
    cache: BTreeMap<Vec<usize>, BTreeMap<String, StatisticsSummary>>,
    requests: usize,
}

impl Collector<'_> {
    fn request(&self, point: &[usize]) -> SamplingRequest {
        let cfg = self.cfg;
        SamplingRequest::assemble(
            self.sig,
            self.combo,
            point,
            |name| cfg.scalars.get(name).copied().unwrap_or(1.0),
            |rows| cfg.ld.ld(rows),
        )
    }

    /// Samples every point not yet in the cache, `r` times each. The
    /// repetitions are interleaved so that no point is measured twice in a
    /// row.
    fn ensure(&mut self, points: &[Vec<usize>]) -> Result<(), BuildError> {
        let mut fresh: Vec<&Vec<usize>> = Vec::new();
        for p in points {
            if !self.cache.contains_key(p) && !fresh.contains(&p) {
                fresh.push(p);
            }
        }
        if fresh.is_empty() {
            return Ok(());
        }
        let r = self.cfg.repetitions;
        let base: Vec<SamplingRequest> = fresh.iter().map(|p| self.request(p)).collect();
        let requests: Vec<SamplingRequest> =
            (0..r).flat_map(|_| base.iter().cloned()).collect();
        let results = self.source.measure(&requests).map_err(|source| BuildError::Source {
            combo: self.combo.iter().collect(),
            source,
        })?;
        if results.len() != requests.len() {
            return Err(BuildError::ShortRead {
                expected: requests.len(),
                found: results.len(),
            });
        }
        self.requests += requests.len();
        let n = fresh.len();
        for (i, p) in fresh.into_iter().enumerate() {
            let reps: Vec<_> = (0..r).map(|k| results[k * n + i].clone()).collect();
            self.cache.insert(p.clone(), summarize(&reps, &self.cfg.counters)?);
        }
        Ok(())
    }

    fn value(&self, point: &[usize], counter: &str, stat: Statistic) -> f64 {
        self.cache[point][counter].get(stat)
    }

    fn samples(&self, points: &[Vec<usize>], counter: &str, stat: Statistic) -> Vec<(Vec<usize>, f64)> {
        points
            .iter()
            .map(|p| (p.clone(), self.value(p, counter, stat)))
            .collect()
    }

    /// Fits the target on `fit` and measures it on `fit` and `check`.
    fn target_fit(&self, fit: &[Vec<usize>], check: &[Vec<usize>]) -> (Polynomial, f64) {
        let t = &self.cfg.target;
        let poly = fit_polynomial(
            &self.samples(fit, t, Statistic::Median),
            self.cfg.degree,
            self.cfg.domain.len(),
        );
        let mut pts = fit.to_vec();
        pts.extend(check.iter().cloned());
        let err = fit_error(&poly, &self.samples(&pts, t, Statistic::Median), self.cfg.floor(t));
        (poly, err)
    }

    /// Plans, samples and fits the target on `bounds`.
    fn try_region(&mut self, bounds: &[(usize, usize)]) -> Result<Trial, BuildError> {
        let plan = plan_samples(bounds, self.cfg.degree);
        let mut all = plan.fit.clone();
        all.extend(plan.check.iter().cloned());
        self.ensure(&all)?;
        let (_, err) = self.target_fit(&plan.fit, &plan.check);
        Ok(Trial {
            fit: plan.fit,
            check: plan.check,
            err,
        })
    }
}

struct Trial {
    fit: Vec<Vec<usize>>,
    check: Vec<Vec<usize>>,
    err: f64,
}

/// A finished region with the error its target fit reached.
struct Placed {
    bounds: Bounds,
    err: f64,
}

fn fmt_bounds(b: &[(usize, usize)]) -> String {
    b.iter()
        .map(|(lo, hi)| format!("[{lo},{hi})"))
        .collect::<Vec<_>>()
        .join("x")
}

/// Grows regions from seeds until the target error bound fails, then seeds
/// again in the space left uncovered.
fn expand(c: &mut Collector) -> Result<Vec<Placed>, BuildError> {
    let cfg = c.cfg;
    let dim = cfg.domain.len();
    let mut uncovered: Vec<Bounds> = vec![cfg.domain.clone()];
    let mut placed = Vec::new();
    while let Some(space) = uncovered.first().cloned() {
        let mut region: Bounds = space
            .iter()
            .map(|&(lo, hi)| (lo, (lo + cfg.seed_width).min(hi)))
            .collect();
        let seed = c.try_region(&region)?;
        let (mut fit, mut check, mut err) = (seed.fit, seed.check, seed.err);
        debug!("seed {} error {err:.3e}", fmt_bounds(&region));
        // A seed that already misses the bound is kept as is.
        let mut open: Vec<bool> = (0..dim)
            .map(|d| err <= cfg.epsilon && region[d].1 < space[d].1)
            .collect();
        while open.iter().any(|&o| o) {
            for d in 0..dim {
                if !open[d] {
                    continue;
                }
                let (lo, hi) = region[d];
                let grown = (lo + (hi - lo) * cfg.growth).min(space[d].1);
                let mut slab = region.clone();
                slab[d] = (hi, grown);
                let ext = c.try_region(&slab)?;
                let mut f = fit.clone();
                f.extend(ext.fit);
                let mut k = check.clone();
                k.extend(ext.check);
                let (_, e) = c.target_fit(&f, &k);
                if e <= cfg.epsilon {
                    region[d].1 = grown;
                    (fit, check, err) = (f, k, e);
                    open[d] = grown < space[d].1;
                    debug!("grew to {} error {e:.3e}", fmt_bounds(&region));
                } else {
                    open[d] = false;
                    debug!("growth of dimension {d} to {grown} rejected, error {e:.3e}");
                }
            }
        }
        uncovered = uncovered
            .iter()
            .flat_map(|u| subtract(u, &region))
            .collect();
        placed.push(Placed { bounds: region, err });
    }
    Ok(placed)
}

/// Bisects regions along their widest dimension until the target error
/// bound holds or they reach the minimum width.
fn refine(c: &mut Collector, bounds: Bounds, out: &mut Vec<Placed>) -> Result<(), BuildError> {
    let trial = c.try_region(&bounds)?;
    let (d, w) = bounds
        .iter()
        .enumerate()
        .map(|(d, &(lo, hi))| (d, hi - lo))
        .fold((0, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
    debug!("region {} error {:.3e}", fmt_bounds(&bounds), trial.err);
    if trial.err > c.cfg.epsilon && w > c.cfg.min_width {
        let (lo, hi) = bounds[d];
        let mid = lo + (hi - lo) / 2;
        let mut left = bounds.clone();
        left[d].1 = mid;
        let mut right = bounds;
        right[d].0 = mid;
        refine(c, left, out)?;
        refine(c, right, out)
    } else {
        out.push(Placed {
            bounds,
            err: trial.err,
        });
        Ok(())
    }
}

/// Builds the piecewise model of one combination.
fn build_combo(
    cfg: &ModelerConfig,
    sig: &'static RoutineSignature,
    combo: &[char],
    source: &mut dyn SampleSource,
    report: &mut BuildReport,
) -> Result<PiecewiseModel, BuildError> {
    let name: String = combo.iter().collect();
    let mut c = Collector {
        cfg,
        sig,
        combo,
        source,
        cache: BTreeMap::new(),
        requests: 0,
    };
    let placed = match cfg.strategy {
        Strategy::Expansion => expand(&mut c)?,
        Strategy::Refinement => {
            let mut out = Vec::new();
            refine(&mut c, cfg.domain.clone(), &mut out)?;
            out
        }
    };

    let mut regions = Vec::with_capacity(placed.len());
    for p in placed {
        if p.err > cfg.epsilon {
            let w = format!(
                "{} region {} error {:.3e} exceeds {}",
                if name.is_empty() { "-" } else { &name },
                fmt_bounds(&p.bounds),
                p.err,
                cfg.epsilon
            );
            warn!("{w}");
            report.warnings.push(w);
        }
        let plan = plan_samples(&p.bounds, cfg.degree);
        c.ensure(&plan.fit)?;
        c.ensure(&plan.check)?;
        let inside: Vec<Vec<usize>> = c
            .cache
            .keys()
            .filter(|k| contains(&p.bounds, k))
            .cloned()
            .collect();
        let mut region = Region::new(p.bounds.clone());
        for counter in &cfg.counters {
            for &stat in &cfg.statistics {
                let poly = fit_polynomial(&c.samples(&inside, counter, stat), cfg.degree, cfg.domain.len());
                region.polys.insert((counter.clone(), stat), poly);
            }
        }
        let target = fit_polynomial(
            &c.samples(&inside, &cfg.target, Statistic::Median),
            cfg.degree,
            cfg.domain.len(),
        );
        let floor = cfg.floor(&cfg.target);
        for q in &plan.check {
            let v = c.value(q, &cfg.target, Statistic::Median);
            report.check_errors.push((target.eval_at(q) - v).abs() / v.abs().max(floor));
        }
        regions.push(region);
    }

    report.points += c.cache.len();
    report.requests += c.requests;
    let model = PiecewiseModel {
        domain: cfg.domain.clone(),
        regions,
        statistics: cfg.statistics.clone(),
        counters: cfg.counters.clone(),
    };
    model.validate_cover().map_err(|violations| BuildError::Cover {
        combo: name.clone(),
        violations,
    })?;
    info!(
        "{} {}: {} regions from {} points",
        cfg.routine,
        name,
        model.regions.len(),
        c.cache.len()
    );
    Ok(model)
}

/// Builds models of every configured combination of `cfg.routine`.
pub fn build_routine_model(
    cfg: &ModelerConfig,
    source: &mut dyn SampleSource,
) -> Result<(RoutineModel, BuildReport), BuildError> {
    let sig = lookup_signature(&cfg.routine).map_err(|_| BuildError::UnknownRoutine(cfg.routine.clone()))?;
    let mut report = BuildReport::default();
    let mut combos = BTreeMap::new();
    for combo in &cfg.combos {
        let model = build_combo(cfg, sig, combo, source, &mut report)?;
        combos.insert(combo.clone(), model);
    }

    let mut fixed = BTreeMap::new();
    for (name, v) in &cfg.scalars {
        fixed.insert(name.clone(), format!("{v:?}"));
    }
    fixed.insert("ld".to_string(), cfg.ld.to_string());

    let mut meta = BTreeMap::new();
    meta.insert("strategy".into(), cfg.strategy.to_string());
    meta.insert("degree".into(), cfg.degree.to_string());
    meta.insert("epsilon".into(), format!("{:?}", cfg.epsilon));
    meta.insert("target".into(), format!("{} median", cfg.target));
    meta.insert("repetitions".into(), cfg.repetitions.to_string());
    meta.insert("points".into(), report.points.to_string());
    meta.insert("requests".into(), report.requests.to_string());
    meta.insert("warnings".into(), report.warnings.len().to_string());
    for (i, w) in report.warnings.iter().enumerate() {
        meta.insert(format!("warning.{i}"), w.clone());
    }

    Ok((
        RoutineModel {
            routine: cfg.routine.clone(),
            dims: sig.size_args().iter().map(|s| s.to_string()).collect(),
            combos,
            fixed,
            meta,
        },
        report,
    ))
}
