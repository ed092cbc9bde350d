use std::collections::BTreeMap;

use crate::model::Statistic;

use super::{RankingRow, RankingTable};

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header: {0}")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Columns: `algorithm,n,b`, then `ticks_<stat>` and `efficiency_<stat>`
/// for each statistic of the table, then `extrapolated`. Reals are written
/// in the shortest form that reads back to the same value.
pub fn emit_csv(table: &RankingTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["algorithm".to_string(), "n".into(), "b".into()];
    header.extend(table.statistics.iter().map(|s| format!("ticks_{s}")));
    header.extend(table.statistics.iter().map(|s| format!("efficiency_{s}")));
    header.push("extrapolated".into());
    w.write_record(&header).expect("writing to memory");
    for r in &table.rows {
        let mut rec = vec![r.algorithm.clone(), r.n.to_string(), r.b.to_string()];
        rec.extend(table.statistics.iter().map(|s| r.ticks[s].to_string()));
        rec.extend(table.statistics.iter().map(|s| r.efficiency[s].to_string()));
        rec.push(r.extrapolated.to_string());
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

/// Reads what [`emit_csv`] writes.
pub fn parse_csv(text: &str) -> Result<RankingTable, CsvError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let bad = || CsvError::Header(header.join(","));
    if header.len() < 4 || header[..3] != ["algorithm", "n", "b"] || header.last().map(String::as_str) != Some("extrapolated") {
        return Err(bad());
    }
    let mid = &header[3..header.len() - 1];
    if !mid.len().is_multiple_of(2) {
        return Err(bad());
    }
    let k = mid.len() / 2;
    let stats = mid[..k]
        .iter()
        .map(|h| h.strip_prefix("ticks_").and_then(|s| s.parse().ok()))
        .collect::<Option<Vec<Statistic>>>()
        .ok_or_else(bad)?;
    for (h, s) in mid[k..].iter().zip(&stats) {
        if *h != format!("efficiency_{s}") {
            return Err(bad());
        }
    }

    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| -> Result<f64, CsvError> {
            field(j).parse().map_err(|_| CsvError::Row {
                row,
                message: format!("{} is not a number: {:?}", header[j], field(j)),
            })
        };
        let int = |j: usize| -> Result<usize, CsvError> {
            field(j).parse().map_err(|_| CsvError::Row {
                row,
                message: format!("{} is not an integer: {:?}", header[j], field(j)),
            })
        };
        let mut ticks = BTreeMap::new();
        let mut efficiency = BTreeMap::new();
        for (j, &s) in stats.iter().enumerate() {
            ticks.insert(s, num(3 + j)?);
            efficiency.insert(s, num(3 + k + j)?);
        }
        rows.push(RankingRow {
            algorithm: field(0).to_string(),
            n: int(1)?,
            b: int(2)?,
            ticks,
            efficiency,
            extrapolated: int(3 + 2 * k)?,
        });
    }
    Ok(RankingTable {
        statistics: stats,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad grid {text:?}: {reason}")]
pub struct GridError {
    pub text: String,
    pub reason: String,
}

/// Parses `lo:hi:step` (hi included when reached), `lo:hi` (step 1), a
/// single value, or a comma-separated list of those.
pub fn parse_grid(text: &str) -> Result<Vec<usize>, GridError> {
    let err = |reason: &str| GridError {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim) {
        let nums = part
            .split(':')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err("expected non-negative integers"))?;
        match nums[..] {
            [v] => out.push(v),
            [lo, hi] | [lo, hi, _] => {
                let step = nums.get(2).copied().unwrap_or(1);
                if step == 0 {
                    return Err(err("step must be positive"));
                }
                if lo > hi {
                    return Err(err("lo exceeds hi"));
                }
                out.extend((lo..=hi).step_by(step));
            }
            _ => return Err(err("expected lo:hi:step")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("8:32:8").unwrap(), [8, 16, 24, 32]);
        assert_eq!(parse_grid("8:30:8").unwrap(), [8, 16, 24]);
        assert_eq!(parse_grid("1016").unwrap(), [1016]);
        assert_eq!(parse_grid("3:5").unwrap(), [3, 4, 5]);
        assert_eq!(parse_grid("8,16:32:16").unwrap(), [8, 16, 32]);
        assert!(parse_grid("8:4:1").is_err());
        assert!(parse_grid("8:16:0").is_err());
        assert!(parse_grid("x").is_err());
        assert!(parse_grid("1:2:3:4").is_err());
    }

    fn table(rows: usize) -> RankingTable {
        let stats = vec![Statistic::Min, Statistic::Median];
        RankingTable {
            rows: (0..rows)
                .map(|i| RankingRow {
                    algorithm: format!("trinv{}", i + 1),
                    n: 64,
                    b: 16,
                    ticks: stats.iter().map(|&s| (s, 0.1 + i as f64 / 3.0)).collect(),
                    efficiency: stats.iter().map(|&s| (s, 1.0 / 7.0)).collect(),
                    extrapolated: i,
                })
                .collect(),
            statistics: stats,
        }
    }

    #[test]
    fn csv_shapes_and_round_trip() {
        let empty = emit_csv(&table(0));
        assert_eq!(
            empty,
            "algorithm,n,b,ticks_min,ticks_median,efficiency_min,efficiency_median,extrapolated\n"
        );
        assert_eq!(parse_csv(&empty).unwrap(), table(0));
        assert_eq!(emit_csv(&table(1)).lines().count(), 2);
        let t = table(3);
        assert_eq!(parse_csv(&emit_csv(&t)).unwrap(), t);
        assert!(parse_csv("a,b\n").is_err());
    }
}
