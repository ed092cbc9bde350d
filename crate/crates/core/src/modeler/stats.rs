use std::collections::BTreeMap;

use crate::model::Statistic;
use crate::sampler::CounterSet;

/// Summary of repeated measurements of one counter at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticsSummary {
    pub min: f64,
    pub median: f64,
    pub avg: f64,
    pub max: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

impl StatisticsSummary {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::Min => self.min,
            Statistic::Median => self.median,
            Statistic::Avg => self.avg,
            Statistic::Max => self.max,
            Statistic::Stddev => self.stddev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummaryError {
    #[error("no measurements to summarize")]
    Empty,
    #[error("counter {0} missing from a measurement")]
    MissingCounter(String),
}

pub fn summarize_values(values: &[f64]) -> Result<StatisticsSummary, SummaryError> {
    if values.is_empty() {
        return Err(SummaryError::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let (min, max) = (v[0], v[n - 1]);
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        v[n / 2 - 1] + (v[n / 2] - v[n / 2 - 1]) / 2.0
    };
    let sum = v.iter().sum::<f64>();
    let mean = if sum.is_finite() {
        sum / n as f64
    } else {
        v.iter().map(|x| x / n as f64).sum()
    };
    // Rounding in the sum can push the mean just outside [min, max].
    let avg = mean.clamp(min, max);
    // Deviations are scaled before squaring so huge values do not overflow.
    let scale = v.iter().map(|x| (x - avg).abs()).fold(0.0, f64::max);
    let stddev = if scale > 0.0 {
        let var = v.iter().map(|x| ((x - avg) / scale).powi(2)).sum::<f64>() / n as f64;
        scale * var.sqrt()
    } else {
        0.0
    };
    Ok(StatisticsSummary {
        min,
        median,
        avg,
        max,
        stddev,
    })
}

/// Summarizes each of `counters` over a list of measurements.
pub fn summarize(
    measurements: &[CounterSet],
    counters: &[String],
) -> Result<BTreeMap<String, StatisticsSummary>, SummaryError> {
    counters
        .iter()
        .map(|c| {
            let vals = measurements
                .iter()
                .map(|m| {
                    m.get(c)
                        .map(|v| v as f64)
                        .ok_or_else(|| SummaryError::MissingCounter(c.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((c.clone(), summarize_values(&vals)?))
        })
        .collect()
}
