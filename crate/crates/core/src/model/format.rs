//! The `.pm` text format.
//!
//! ```text
//! pmodel-version 1
//! routine dtrsm
//! dims m n
//! domain 1..257 1..257
//! counters ticks flops
//! statistics min median
//! fixed alpha 1.0
//! combo L L N N
//! region 1..257 1..257
//! poly flops median 3 1
//! 1 2 1.0
//! end
//! ```
//!
//! `fixed` and `meta` lines may repeat; their value is the rest of the
//! line. Each `combo` is followed by its regions, each region by one
//! `poly` block per (counter, statistic). A `poly` header gives the degree
//! bound and the number of `e1 .. ed coefficient` term lines that follow.
//! Coefficients use the shortest decimal form that parses back to the same
//! double.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Bounds, PiecewiseModel, Polynomial, Region, RoutineModel, Statistic};

pub const FORMAT_VERSION: u32 = 1;
const HEADER: &str = "pmodel-version";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("unsupported model format version {0:?}")]
    Version(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn bounds_text(b: &[(usize, usize)]) -> String {
    b.iter()
        .map(|(lo, hi)| format!("{lo}..{hi}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize(model: &RoutineModel) -> String {
    let mut s = String::new();
    let first = model.combos.values().next();
    let _ = writeln!(s, "{HEADER} {FORMAT_VERSION}");
    let _ = writeln!(s, "routine {}", model.routine);
    let _ = writeln!(s, "dims {}", model.dims.join(" "));
    if let Some(pw) = first {
        let _ = writeln!(s, "domain {}", bounds_text(&pw.domain));
        let _ = writeln!(s, "counters {}", pw.counters.join(" "));
        let stats: Vec<_> = pw.statistics.iter().map(|t| t.name()).collect();
        let _ = writeln!(s, "statistics {}", stats.join(" "));
    }
    for (k, v) in &model.fixed {
        let _ = writeln!(s, "fixed {k} {v}");
    }
    for (k, v) in &model.meta {
        let _ = writeln!(s, "meta {k} {v}");
    }
    for (combo, pw) in &model.combos {
        let codes: Vec<String> = combo.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "combo {}", codes.join(" "));
        for r in &pw.regions {
            let _ = writeln!(s, "region {}", bounds_text(&r.bounds));
            for ((counter, stat), p) in &r.polys {
                let _ = writeln!(s, "poly {counter} {stat} {} {}", p.degree(), p.len());
                for (e, c) in p.terms() {
                    for x in e {
                        let _ = write!(s, "{x} ");
                    }
                    let _ = writeln!(s, "{c:?}");
                }
            }
        }
    }
    s.push_str("end\n");
    s
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.lines.by_ref() {
            self.last = i + 1;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn bad(&self, line: usize, message: impl Into<String>) -> FormatError {
        FormatError::Malformed {
            line,
            message: message.into(),
        }
    }

    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>), FormatError> {
        match self.next() {
            Some((n, t)) if t[0] == key => Ok((n, t[1..].to_vec())),
            Some((n, t)) => Err(self.bad(n, format!("expected `{key}`, found `{}`", t[0]))),
            None => Err(self.bad(self.last + 1, format!("expected `{key}`, found end of file"))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, FormatError> {
    tok.parse().map_err(|_| FormatError::Malformed {
        line,
        message: format!("bad {what} {tok:?}"),
    })
}

fn parse_bounds(line: usize, toks: &[&str], dim: usize) -> Result<Bounds, FormatError> {
    if toks.len() != dim {
        return Err(FormatError::Malformed {
            line,
            message: format!("expected {dim} intervals, found {}", toks.len()),
        });
    }
    toks.iter()
        .map(|t| {
            let (lo, hi) = t.split_once("..").ok_or_else(|| FormatError::Malformed {
                line,
                message: format!("bad interval {t:?}"),
            })?;
            let lo = parse_num(line, lo, "bound")?;
            let hi = parse_num(line, hi, "bound")?;
            if lo >= hi {
                return Err(FormatError::Malformed {
                    line,
                    message: format!("empty interval {t:?}"),
                });
            }
            Ok((lo, hi))
        })
        .collect()
}

pub fn deserialize(text: &str) -> Result<RoutineModel, FormatError> {
    let mut r = Reader {
        lines: text.lines().enumerate().peekable(),
        last: 0,
    };
    match r.next() {
        Some((_, t)) if t.len() == 2 && t[0] == HEADER => {
            if t[1] != FORMAT_VERSION.to_string() {
                return Err(FormatError::Version(t[1].to_string()));
            }
        }
        Some((n, _)) => return Err(r.bad(n, format!("missing `{HEADER}` header"))),
        None => return Err(r.bad(1, "empty model file")),
    }
    let (n, t) = r.expect("routine")?;
    let [routine] = t[..] else {
        return Err(r.bad(n, "expected one routine name"));
    };
    let (_, t) = r.expect("dims")?;
    let dims: Vec<String> = t.iter().map(|s| s.to_string()).collect();
    let dim = dims.len();

    let mut domain = None;
    let mut counters = Vec::new();
    let mut statistics = Vec::new();
    let mut fixed = BTreeMap::new();
    let mut meta = BTreeMap::new();
    let mut combos: BTreeMap<Vec<char>, PiecewiseModel> = BTreeMap::new();
    let mut current: Option<(Vec<char>, PiecewiseModel)> = None;

    loop {
        let Some((n, t)) = r.next() else {
            return Err(r.bad(r.last + 1, "missing `end`"));
        };
        match t[0] {
            "end" => break,
            "domain" => domain = Some(parse_bounds(n, &t[1..], dim)?),
            "counters" => counters = t[1..].iter().map(|s| s.to_string()).collect(),
            "statistics" => {
                statistics = t[1..]
                    .iter()
                    .map(|s| s.parse().map_err(|e: String| r.bad(n, e)))
                    .collect::<Result<_, _>>()?
            }
            "fixed" | "meta" => {
                if t.len() < 3 {
                    return Err(r.bad(n, format!("expected `{} <name> <value>`", t[0])));
                }
                let map = if t[0] == "fixed" { &mut fixed } else { &mut meta };
                map.insert(t[1].to_string(), t[2..].join(" "));
            }
            "combo" => {
                let domain = domain.clone().ok_or_else(|| r.bad(n, "combo before domain"))?;
                let combo = t[1..]
                    .iter()
                    .map(|c| {
                        let mut cs = c.chars();
                        match (cs.next(), cs.next()) {
                            (Some(ch), None) => Ok(ch),
                            _ => Err(r.bad(n, format!("bad discrete code {c:?}"))),
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some((k, pw)) = current.take() {
                    combos.insert(k, pw);
                }
                if combos.contains_key(&combo) {
                    return Err(r.bad(n, "combination listed twice"));
                }
                current = Some((
                    combo,
                    PiecewiseModel {
                        domain,
                        regions: Vec::new(),
                        statistics: statistics.clone(),
                        counters: counters.clone(),
                    },
                ));
            }
            "region" => {
                let bounds = parse_bounds(n, &t[1..], dim)?;
                let (_, pw) = current.as_mut().ok_or_else(|| r.bad(n, "region outside combo"))?;
                pw.regions.push(Region::new(bounds));
            }
            "poly" => {
                let region = current
                    .as_mut()
                    .and_then(|(_, pw)| pw.regions.last_mut())
                    .ok_or_else(|| r.bad(n, "poly outside region"))?;
                if t.len() != 5 {
                    return Err(r.bad(n, "expected `poly <counter> <stat> <degree> <nterms>`"));
                }
                let stat: Statistic = t[2].parse().map_err(|e: String| r.bad(n, e))?;
                let degree: u32 = parse_num(n, t[3], "degree")?;
                let nterms: usize = parse_num(n, t[4], "term count")?;
                let mut p = Polynomial::zero(dim, degree);
                for _ in 0..nterms {
                    let Some((m, term)) = r.next() else {
                        return Err(r.bad(r.last + 1, "truncated term list"));
                    };
                    if term.len() != dim + 1 {
                        return Err(r.bad(m, format!("expected {} fields", dim + 1)));
                    }
                    let exps = term[..dim]
                        .iter()
                        .map(|e| parse_num(m, e, "exponent"))
                        .collect::<Result<Vec<u32>, _>>()?;
                    let coef: f64 = parse_num(m, term[dim], "coefficient")?;
                    p.add_term(exps, coef).map_err(|e| r.bad(m, e.to_string()))?;
                }
                region.polys.insert((t[1].to_string(), stat), p);
            }
            other => return Err(r.bad(n, format!("unknown keyword `{other}`"))),
        }
    }
    if let Some((k, pw)) = current {
        combos.insert(k, pw);
    }
    Ok(RoutineModel {
        routine: routine.to_string(),
        dims,
        combos,
        fixed,
        meta,
    })
}
