//! Request and result line syntax.
//!
//! A request line is the routine name followed by one whitespace-separated
//! token per argument: a single character for discrete arguments, a
//! decimal integer for sizes, leading dimensions and increments, a decimal
//! real for scalars, and `?` for matrices. `go` flushes the pending batch.
//! Blank lines and text after `#` are ignored.
//!
//! A result line is the routine name followed by one decimal integer per
//! configured counter, in configuration order.

use std::collections::BTreeMap;

use crate::kernel::{lookup_signature, ArgKind, ArgValue, MatrixLoc, SamplingRequest};

use super::config::Counter;

#[derive(Debug, Clone, PartialEq)]
pub enum Line {
    Request(SamplingRequest),
    Go,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("unknown routine {0}")]
    UnknownRoutine(String),
    #[error("{routine} takes {expected} arguments, got {found}")]
    TokenCount {
        routine: String,
        expected: usize,
        found: usize,
    },
    #[error("column {column}: {token:?} is not a valid {expected} for {arg}")]
    BadToken {
        column: usize,
        arg: String,
        token: String,
        expected: &'static str,
    },
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, t)| (line[..byte].chars().count() + 1, t))
        .collect()
}

pub fn parse_request_line(line: &str) -> Result<Line, ProtocolError> {
    let body = line.split('#').next().unwrap_or("");
    let toks = tokens(body);
    let Some(&(_, name)) = toks.first() else {
        return Ok(Line::Comment);
    };
    if name == "go" && toks.len() == 1 {
        return Ok(Line::Go);
    }
    let sig =
        lookup_signature(name).map_err(|_| ProtocolError::UnknownRoutine(name.to_string()))?;
    let args = &toks[1..];
    if args.len() != sig.args.len() {
        return Err(ProtocolError::TokenCount {
            routine: name.to_string(),
            expected: sig.args.len(),
            found: args.len(),
        });
    }
    let mut values = Vec::with_capacity(args.len());
    for (arg, &(column, tok)) in sig.args.iter().zip(args) {
        let bad = |expected| ProtocolError::BadToken {
            column,
            arg: arg.name.clone(),
            token: tok.to_string(),
            expected,
        };
        let v = match &arg.kind {
            ArgKind::Discrete(_) => {
                let mut cs = tok.chars();
                match (cs.next(), cs.next()) {
                    (Some(c), None) => ArgValue::Code(c),
                    _ => return Err(bad("single character")),
                }
            }
            ArgKind::Size | ArgKind::LeadingDim(_) | ArgKind::Increment => {
                ArgValue::Int(tok.parse().map_err(|_| bad("non-negative integer"))?)
            }
            ArgKind::Scalar => {
                let r: f64 = tok.parse().map_err(|_| bad("real number"))?;
                ArgValue::Real(r)
            }
            ArgKind::MatrixData { .. } => {
                if tok != "?" {
                    return Err(bad("matrix placeholder `?`"));
                }
                ArgValue::Matrix(MatrixLoc::Auto)
            }
        };
        values.push(v);
    }
    Ok(Line::Request(SamplingRequest::new(name, values)))
}

/// Measured counters of one execution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CounterSet {
    values: BTreeMap<String, u64>,
}

impl CounterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, counter: &str, value: u64) {
        self.values.insert(counter.to_string(), value);
    }

    pub fn get(&self, counter: &str) -> Option<u64> {
        self.values.get(counter).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for CounterSet {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        CounterSet {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

pub fn format_result_line(request: &SamplingRequest, counters: &CounterSet, order: &[Counter]) -> String {
    let mut line = request.routine.clone();
    for c in order {
        line.push(' ');
        line.push_str(&counters.get(c.name()).unwrap_or(0).to_string());
    }
    line
}

/// Parses a result line into the routine name and counter values, given
/// the counter order the sampler was configured with.
pub fn parse_result_line(line: &str, order: &[String]) -> Option<(String, CounterSet)> {
    let mut toks = line.split_whitespace();
    let routine = toks.next()?.to_string();
    let mut set = CounterSet::new();
    for name in order {
        set.insert(name, toks.next()?.parse().ok()?);
    }
    if toks.next().is_some() {
        return None;
    }
    Some((routine, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_trsm_request() {
        let Line::Request(r) = parse_request_line("dtrsm L L N N 96 96 1.0 ? 96 ? 96").unwrap()
        else {
            panic!("not a request")
        };
        assert_eq!(r.routine, "dtrsm");
        assert_eq!(r.int(4), 96);
        assert_eq!(r.int(5), 96);
        assert_eq!(r.int(8), 96);
        assert_eq!(r.int(10), 96);
        assert_eq!(r.real(6), 1.0);
    }

    #[test]
    fn go_blank_and_comment_lines() {
        assert_eq!(parse_request_line("go").unwrap(), Line::Go);
        assert_eq!(parse_request_line("  go  ").unwrap(), Line::Go);
        assert_eq!(parse_request_line("").unwrap(), Line::Comment);
        assert_eq!(parse_request_line("   # dgemm").unwrap(), Line::Comment);
    }

    #[test]
    fn token_count_mismatch() {
        assert_eq!(
            parse_request_line("dgemm N N 8").unwrap_err(),
            ProtocolError::TokenCount {
                routine: "dgemm".into(),
                expected: 13,
                found: 3
            }
        );
    }

    #[test]
    fn bad_token_reports_column() {
        let err = parse_request_line("dtrsm L L N N -4 96 1.0 ? 96 ? 96").unwrap_err();
        assert_eq!(
            err,
            ProtocolError::BadToken {
                column: 15,
                arg: "m".into(),
                token: "-4".into(),
                expected: "non-negative integer"
            }
        );
        assert!(matches!(
            parse_request_line("dtrsm LL L N N 4 4 1.0 ? 4 ? 4"),
            Err(ProtocolError::BadToken { column: 7, .. })
        ));
        assert!(matches!(
            parse_request_line("dtrsm L L N N 4 4 x ? 4 ? 4"),
            Err(ProtocolError::BadToken { column: 19, .. })
        ));
        assert!(matches!(
            parse_request_line("dtrsm L L N N 4 4 1 A 4 ? 4"),
            Err(ProtocolError::BadToken { .. })
        ));
        assert!(matches!(
            parse_request_line("dfoo 1"),
            Err(ProtocolError::UnknownRoutine(_))
        ));
    }

    #[test]
    fn display_round_trips_through_parser() {
        let text = "dgemm N T 8 4 2 -0.5 ? 8 ? 4 2.0 ? 8";
        let Line::Request(r) = parse_request_line(text).unwrap() else {
            panic!()
        };
        assert_eq!(r.to_string(), text);
    }

    #[test]
    fn result_lines() {
        let req = match parse_request_line("dgemm N N 4 4 4 1.0 ? 4 ? 4 0.0 ? 4").unwrap() {
            Line::Request(r) => r,
            _ => unreachable!(),
        };
        let set: CounterSet = [("ticks", 1234u64), ("flops", 128)].into_iter().collect();
        assert_eq!(
            format_result_line(&req, &set, &[Counter::Ticks, Counter::Flops]),
            "dgemm 1234 128"
        );
        assert_eq!(format_result_line(&req, &set, &[Counter::Flops]), "dgemm 128");
        let order = vec!["ticks".to_string(), "flops".to_string()];
        let (name, parsed) = parse_result_line("dgemm 1234 128", &order).unwrap();
        assert_eq!((name.as_str(), parsed), ("dgemm", set));
        assert!(parse_result_line("dgemm 1234", &order).is_none());
    }
}
