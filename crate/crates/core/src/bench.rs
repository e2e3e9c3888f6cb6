//! Per-backend timing of a query suite on a loaded workspace.
//!
//! Every bound slot able to run a query is timed, not only the routed ones,
//! so the output shows how the routing choice compares. Only the ordering of
//! backends is meaningful at this scale.

use std::fmt;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::dispatch::DispatchError;
use crate::routing::{select_backends, SlotId};
use crate::shape::label_query;
use crate::sparql::parse_query;
use crate::workspace::Workspace;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedQuery {
    pub name: String,
    pub text: String,
}

/// Splits a query file into blank-line separated blocks. Leading `#` lines
/// of a block are comments; the first one names the query.
pub fn read_query_suite(text: &str) -> Vec<NamedQuery> {
    let mut out = Vec::new();
    let mut name = None;
    let mut body = String::new();
    let flush = |name: &mut Option<String>, body: &mut String, out: &mut Vec<NamedQuery>| {
        if !body.trim().is_empty() {
            let n = name.take().unwrap_or_else(|| format!("q{}", out.len() + 1));
            out.push(NamedQuery {
                name: n,
                text: body.trim().to_string(),
            });
        }
        *name = None;
        body.clear();
    };
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() {
            flush(&mut name, &mut body, &mut out);
        } else if t.starts_with('#') && body.is_empty() {
            if name.is_none() {
                name = Some(t.trim_start_matches('#').trim().to_string());
            }
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    flush(&mut name, &mut body, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    pub repeat: usize,
    /// Rebuild engines from the graph before every repeat.
    pub cold: bool,
    /// Run repeats concurrently.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            repeat: 5,
            cold: false,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("--repeat must be at least 1")]
    ZeroRepeat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendTiming {
    pub slot: SlotId,
    /// The policy routes this query here.
    pub routed: bool,
    pub rows: usize,
    pub min: Duration,
    pub median: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchStatus {
    Timed(Vec<BackendTiming>),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchLine {
    pub name: String,
    pub label: String,
    pub rule: String,
    pub status: BenchStatus,
}

impl BenchLine {
    /// Slots from fastest to slowest by median.
    pub fn ranking(&self) -> Vec<&SlotId> {
        match &self.status {
            BenchStatus::Timed(ts) => {
                let mut v: Vec<&BackendTiming> = ts.iter().collect();
                v.sort_by_key(|t| t.median);
                v.into_iter().map(|t| &t.slot).collect()
            }
            BenchStatus::Skipped(_) => Vec::new(),
        }
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl fmt::Display for BenchLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<16} {:<22} {:<3}", self.name, self.label, self.rule)?;
        match &self.status {
            BenchStatus::Skipped(why) => write!(f, " skipped: {why}"),
            BenchStatus::Timed(ts) => {
                for t in ts {
                    let mark = if t.routed { "*" } else { "" };
                    write!(f, " {}{mark}={:.3}/{:.3}ms", t.slot, ms(t.min), ms(t.median))?;
                }
                let order: Vec<&str> = self.ranking().into_iter().map(SlotId::as_str).collect();
                write!(f, " order: {}", order.join(" < "))
            }
        }
    }
}

fn time_slot(ws: &Workspace, q: &str, slot: &SlotId, cold: bool) -> Result<(usize, Duration), DispatchError> {
    let fresh;
    let ws = if cold {
        fresh = ws.rebuild();
        &fresh
    } else {
        ws
    };
    ws.dispatcher().execute_on(q, slot).map(|(rs, d)| (rs.len(), d))
}

fn median(sorted: &[Duration]) -> Duration {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2
    }
}

pub fn bench_query(ws: &Workspace, q: &NamedQuery, opts: &BenchOptions) -> Result<BenchLine, BenchError> {
    if opts.repeat == 0 {
        return Err(BenchError::ZeroRepeat);
    }
    let mut line = BenchLine {
        name: q.name.clone(),
        label: String::new(),
        rule: String::new(),
        status: BenchStatus::Skipped(String::new()),
    };
    let ast = match parse_query(&q.text) {
        Ok(a) => a,
        Err(e) => {
            line.status = BenchStatus::Skipped(e.to_string());
            return Ok(line);
        }
    };
    let label = match label_query(&ast) {
        Ok(l) => l,
        Err(e) => {
            line.status = BenchStatus::Skipped(e.to_string());
            return Ok(line);
        }
    };
    let decision = select_backends(&label, ws.policy());
    line.label = label.summary(&ast);
    line.rule = decision.rationale.clone();

    let mut timings = Vec::new();
    for slot in ws.dispatcher().bound_slots() {
        let runs: Vec<Result<(usize, Duration), DispatchError>> = if opts.parallel {
            thread::scope(|s| {
                let hs: Vec<_> = (0..opts.repeat)
                    .map(|_| s.spawn(|| time_slot(ws, &q.text, &slot, opts.cold)))
                    .collect();
                hs.into_iter()
                    .map(|h| h.join().expect("bench worker panicked"))
                    .collect()
            })
        } else {
            (0..opts.repeat)
                .map(|_| time_slot(ws, &q.text, &slot, opts.cold))
                .collect()
        };
        let Ok(runs) = runs.into_iter().collect::<Result<Vec<_>, _>>() else {
            log::debug!("{} cannot run {}", slot, q.name);
            continue;
        };
        let mut ds: Vec<Duration> = runs.iter().map(|r| r.1).collect();
        ds.sort();
        timings.push(BackendTiming {
            routed: decision.targets.iter().any(|t| t.slot.id == slot),
            rows: runs[0].0,
            min: ds[0],
            median: median(&ds),
            slot,
        });
    }
    line.status = if timings.is_empty() {
        BenchStatus::Skipped("no backend could run the query".into())
    } else {
        BenchStatus::Timed(timings)
    };
    Ok(line)
}

pub fn run_bench(ws: &Workspace, queries: &[NamedQuery], opts: &BenchOptions) -> Result<Vec<BenchLine>, BenchError> {
    queries.iter().map(|q| bench_query(ws, q, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::ParseMode;
    use crate::routing::default_policy;

    #[test]
    fn suite_blocks_and_names() {
        let text = "# first\n# more words\nSELECT ?x\nWHERE { ?x p o . }\n\n\nSELECT ?y WHERE { ?y p o . }\n";
        let qs = read_query_suite(text);
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[0].name, "first");
        assert_eq!(qs[0].text, "SELECT ?x\nWHERE { ?x p o . }");
        assert_eq!(qs[1].name, "q2");
    }

    #[test]
    fn timings_per_backend() {
        let ws = Workspace::from_ntriples("a p o .\nb p o .\na q 1 .\n", ParseMode::Strict, default_policy()).unwrap();
        let qs = read_query_suite("SELECT ?x WHERE { ?x p o . ?x q ?n . }\n\nSELECT ?x WHERE { ?x p ?y . ?y p ?x . }");
        let opts = BenchOptions {
            repeat: 3,
            cold: true,
            parallel: true,
        };
        let lines = run_bench(&ws, &qs, &opts).unwrap();
        let BenchStatus::Timed(ts) = &lines[0].status else {
            panic!("{}", lines[0])
        };
        assert_eq!(ts.len(), 4);
        assert!(ts.iter().all(|t| t.rows == 1 && t.min <= t.median));
        assert_eq!(ts.iter().filter(|t| t.routed).count(), 2);
        assert_eq!(lines[0].ranking().len(), 4);
        assert!(matches!(lines[1].status, BenchStatus::Skipped(_)));
        assert_eq!(
            run_bench(&ws, &qs, &BenchOptions { repeat: 0, ..opts }),
            Err(BenchError::ZeroRepeat)
        );
    }
}
