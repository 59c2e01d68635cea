//! Synchronization-log analysis: twinning rate, change propagation, applying
//! updates to a twin's descriptive parts, and the twin's lifecycle span.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde_json::Value;
use thiserror::Error;

use crate::granularity::{GranularityError, Partition};
use crate::graph::{Assertion, Graph};
use crate::parser::synclog::{rational_json, record_to_json};
use crate::parser::{RecordKind, SyncLogRecord};
use crate::reasoner::Reasoner;
use crate::schema::vocab;
use crate::term::{Literal, Node, Rational, Term, TimeInterval};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncError {
    #[error("window {0} must be bounded with start < end")]
    DegenerateWindow(TimeInterval),
    #[error("{0} is not a digital twin instance")]
    NotADTI(Term),
    #[error("{0} shares no synchronizing process or log record with a represented entity")]
    NoSharedProcesses(Term),
    #[error(transparent)]
    Granularity(#[from] GranularityError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinningRateMeasure {
    pub twin: Term,
    pub window: TimeInterval,
    pub update_count: usize,
    /// Updates per second.
    pub rate: Rational,
}

impl fmt::Display for TwinningRateMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "twinning rate of {} over {}: {} updates, {} updates/s",
            self.twin, self.window, self.update_count, self.rate
        )
    }
}

/// Counts updates for `twin` with `t` in `[start, end)`.
pub fn twinning_rate(
    log: &[SyncLogRecord],
    twin: &Term,
    window: &TimeInterval,
) -> Result<TwinningRateMeasure, SyncError> {
    let end = match window.end() {
        Some(end) if end > window.start() => end,
        _ => return Err(SyncError::DegenerateWindow(window.clone())),
    };
    let update_count = log
        .iter()
        .filter(|r| matches!(&r.kind, RecordKind::Update { twin: w, .. } if w == twin))
        .filter(|r| &r.t >= window.start() && &r.t < end)
        .count();
    let width = end - window.start();
    let rate = &Rational::from_integer(update_count as i64) / &width;
    Ok(TwinningRateMeasure {
        twin: twin.clone(),
        window: window.clone(),
        update_count,
        rate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagation {
    pub change: SyncLogRecord,
    pub update: SyncLogRecord,
    pub lag: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncReport {
    pub twin: Term,
    pub max_lag: Rational,
    pub propagated: Vec<Propagation>,
    pub missed: Vec<SyncLogRecord>,
    pub out_of_scope: Vec<SyncLogRecord>,
    /// Signals to or from the twin, reported for context only.
    pub signals: Vec<SyncLogRecord>,
    /// Updates for the twin that no change claimed.
    pub unmatched_updates: Vec<SyncLogRecord>,
    pub max_observed_lag: Rational,
}

impl SyncReport {
    pub fn in_scope(&self) -> usize {
        self.propagated.len() + self.missed.len()
    }

    /// Human-readable summary followed by one line per finding.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "twin {}: {} propagated, {} missed, {} out of scope (max lag {}, max observed lag {})",
            self.twin,
            self.propagated.len(),
            self.missed.len(),
            self.out_of_scope.len(),
            self.max_lag,
            self.max_observed_lag
        );
        for p in &self.propagated {
            let _ = writeln!(out, "propagated  {}  <- {}  lag {}", p.change, p.update, p.lag);
        }
        for r in &self.missed {
            let _ = writeln!(out, "missed      {r}");
        }
        for r in &self.out_of_scope {
            let _ = writeln!(out, "out-of-scope {r}");
        }
        for r in &self.unmatched_updates {
            let _ = writeln!(out, "unmatched   {r}");
        }
        for r in &self.signals {
            let _ = writeln!(out, "signal      {r}");
        }
        out
    }

    /// The analyzed records in log format, in `t` order, each with a
    /// `verdict` field (and `lag` for propagated changes).
    pub fn to_json_lines(&self) -> String {
        let mut rows: Vec<(&SyncLogRecord, &str, Option<&Rational>)> = Vec::new();
        for p in &self.propagated {
            rows.push((&p.change, "propagated", Some(&p.lag)));
            rows.push((&p.update, "matched", None));
        }
        rows.extend(self.missed.iter().map(|r| (r, "missed", None)));
        rows.extend(self.out_of_scope.iter().map(|r| (r, "out-of-scope", None)));
        rows.extend(self.unmatched_updates.iter().map(|r| (r, "unmatched", None)));
        rows.extend(self.signals.iter().map(|r| (r, "context", None)));
        rows.sort_by(|a, b| (&a.0.t, a.0.line).cmp(&(&b.0.t, b.0.line)));
        let mut out = String::new();
        for (record, verdict, lag) in rows {
            let mut obj = record_to_json(record);
            obj.insert("verdict".into(), Value::String(verdict.into()));
            if let Some(lag) = lag {
                obj.insert("lag".into(), rational_json(lag));
            }
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }
}

fn closure_with_dti(graph: &Graph, twin: &Term) -> Result<Graph, SyncError> {
    let closure = Reasoner::default().materialize(graph);
    if closure.has_type(twin, &vocab::digital_twin_instance()) {
        Ok(closure)
    } else {
        Err(SyncError::NotADTI(twin.clone()))
    }
}

/// What a change is about: `(entity, quality type)`, with part changes keyed
/// by the part-presence marker.
fn change_key(kind: &RecordKind) -> Option<(Term, Term)> {
    match kind {
        RecordKind::ChangeQuality {
            entity, quality_type, ..
        } => Some((entity.clone(), quality_type.clone())),
        RecordKind::ChangePart { entity, .. } => Some((entity.clone(), vocab::part_presence())),
        _ => None,
    }
}

/// Matches each in-scope change, in time order, to the earliest unclaimed
/// update for `twin` on the same entity and quality type no earlier than the
/// change and within `max_lag` of it.
pub fn check_propagation(
    log: &[SyncLogRecord],
    graph: &Graph,
    twin: &Term,
    partition: &Partition,
    max_lag: &Rational,
) -> Result<SyncReport, SyncError> {
    closure_with_dti(graph, twin)?;
    let coverage = partition.coverage(graph)?;
    let mut records: Vec<&SyncLogRecord> = log.iter().collect();
    records.sort_by(|a, b| a.t.cmp(&b.t));

    let updates: Vec<(&SyncLogRecord, (Term, Term))> = records
        .iter()
        .filter_map(|r| match &r.kind {
            RecordKind::Update {
                twin: w,
                describes,
                quality_type,
                ..
            } if w == twin => Some((*r, (describes.clone(), quality_type.clone()))),
            _ => None,
        })
        .collect();
    let mut claimed = vec![false; updates.len()];

    let mut report = SyncReport {
        twin: twin.clone(),
        max_lag: max_lag.clone(),
        propagated: Vec::new(),
        missed: Vec::new(),
        out_of_scope: Vec::new(),
        signals: Vec::new(),
        unmatched_updates: Vec::new(),
        max_observed_lag: Rational::zero(),
    };
    for record in &records {
        if let RecordKind::Signal { source, target } = &record.kind {
            if source == twin || target == twin {
                report.signals.push((*record).clone());
            }
            continue;
        }
        let Some(key) = change_key(&record.kind) else {
            continue;
        };
        if !coverage.items.contains(&key) {
            report.out_of_scope.push((*record).clone());
            continue;
        }
        let found = updates
            .iter()
            .enumerate()
            .find(|(i, (u, k))| !claimed[*i] && *k == key && u.t >= record.t && &(&u.t - &record.t) <= max_lag);
        match found {
            Some((i, (update, _))) => {
                claimed[i] = true;
                let lag = &update.t - &record.t;
                if lag > report.max_observed_lag {
                    report.max_observed_lag = lag.clone();
                }
                report.propagated.push(Propagation {
                    change: (*record).clone(),
                    update: (*update).clone(),
                    lag,
                });
            }
            None => report.missed.push((*record).clone()),
        }
    }
    report.unmatched_updates = updates
        .iter()
        .zip(&claimed)
        .filter(|(_, c)| !**c)
        .map(|((u, _), _)| (*u).clone())
        .collect();
    Ok(report)
}

/// Current descriptive part of `twin` for `(entity, quality_type)`, with the
/// start of its part interval.
fn current_part(graph: &Graph, twin: &Term, entity: &Term, quality_type: &Literal) -> Option<(Assertion, Term)> {
    let part_of = vocab::has_continuant_part();
    let describes = vocab::describes();
    let has_type = vocab::has_quality_type();
    let found = graph
        .outgoing_with(twin, &part_of)
        .filter(|a| a.interval.as_ref().is_some_and(|i| i.end().is_none()))
        .filter_map(|a| a.object.as_term().map(|d| (a, d)))
        .find(|(_, d)| {
            graph
                .outgoing_with(d, &describes)
                .any(|x| x.object.as_term() == Some(entity))
                && graph
                    .outgoing_with(d, &has_type)
                    .any(|x| x.object == Node::Literal(quality_type.clone()))
        })
        .map(|(a, d)| (a.clone(), d.clone()));
    found
}

fn put(graph: &mut Graph, a: Assertion) {
    graph.assert(a).expect("update assertions use builtin vocabulary");
}

/// Records each update for `twin` as a descriptive part of the twin, retiring
/// the previous part for the same entity and quality type.
pub fn apply_updates(graph: &Graph, log: &[SyncLogRecord], twin: &Term) -> Result<Graph, SyncError> {
    closure_with_dti(graph, twin)?;
    let mut out = graph.clone();
    let mut records: Vec<&SyncLogRecord> = log.iter().collect();
    records.sort_by(|a, b| a.t.cmp(&b.t));
    let bearers: Vec<Term> = graph
        .outgoing_with(twin, &vocab::generically_depends_on())
        .filter_map(|a| a.object.as_term().cloned())
        .collect();
    for record in records {
        let RecordKind::Update {
            twin: w,
            describes,
            quality_type,
            value,
        } = &record.kind
        else {
            continue;
        };
        if w != twin {
            continue;
        }
        let qt = Literal::String(quality_type.to_string());
        if let Some((old, _)) = current_part(&out, twin, describes, &qt) {
            out.retract(&old);
            let start = old
                .interval
                .as_ref()
                .expect("current parts are open intervals")
                .start()
                .clone();
            let retired = TimeInterval::bounded(start, record.t.clone()).expect("log is in time order");
            put(
                &mut out,
                Assertion {
                    interval: Some(retired),
                    ..old
                },
            );
        }
        let d = out.fresh_term("d");
        put(&mut out, Assertion::type_of(d.clone(), vocab::descriptive_ice()));
        put(
            &mut out,
            Assertion::new(twin.clone(), vocab::has_continuant_part(), d.clone())
                .during(TimeInterval::from_start(record.t.clone())),
        );
        put(
            &mut out,
            Assertion::new(d.clone(), vocab::describes(), describes.clone()),
        );
        put(
            &mut out,
            Assertion::new(d.clone(), vocab::has_quality_type(), Node::Literal(qt)),
        );
        put(
            &mut out,
            Assertion::new(d.clone(), vocab::has_value(), Node::string(value.clone())),
        );
        for h in &bearers {
            put(
                &mut out,
                Assertion::new(d.clone(), vocab::generically_depends_on(), h.clone()),
            );
        }
    }
    Ok(out)
}

/// Records each change in the log as a change process in the graph:
/// quality changes produce a new quality of the changed type, part
/// replacements name the removed and added parts.
pub fn materialize_changes(graph: &Graph, log: &[SyncLogRecord]) -> Graph {
    let mut out = graph.clone();
    let mut records: Vec<&SyncLogRecord> = log.iter().collect();
    records.sort_by(|a, b| a.t.cmp(&b.t));
    for record in records {
        let instant = TimeInterval::bounded(record.t.clone(), record.t.clone()).expect("point interval");
        match &record.kind {
            RecordKind::ChangeQuality {
                entity,
                quality_type,
                new,
                ..
            } => {
                let c = out.fresh_term("change");
                put(
                    &mut out,
                    Assertion::type_of(c.clone(), vocab::quality_change()).during(instant),
                );
                put(
                    &mut out,
                    Assertion::new(entity.clone(), vocab::participates_in(), c.clone()),
                );
                let q = out.fresh_term("quality");
                put(&mut out, Assertion::type_of(q.clone(), quality_type.clone()));
                put(
                    &mut out,
                    Assertion::new(entity.clone(), vocab::bears_quality(), q.clone())
                        .during(TimeInterval::from_start(record.t.clone())),
                );
                put(&mut out, Assertion::new(c, vocab::produces_quality(), q.clone()));
                put(
                    &mut out,
                    Assertion::new(q, vocab::has_value(), Node::string(new.clone())),
                );
            }
            RecordKind::ChangePart {
                entity,
                removed_part,
                added_part,
            } => {
                let c = out.fresh_term("change");
                put(
                    &mut out,
                    Assertion::type_of(c.clone(), vocab::part_replacement()).during(instant),
                );
                put(
                    &mut out,
                    Assertion::new(entity.clone(), vocab::participates_in(), c.clone()),
                );
                put(
                    &mut out,
                    Assertion::new(c.clone(), vocab::removed_part(), removed_part.clone()),
                );
                put(&mut out, Assertion::new(c, vocab::added_part(), added_part.clone()));
            }
            _ => {}
        }
    }
    out
}

/// Hull of the synchronizing processes shared by `twin` and something it
/// represents, and of log records naming both.
pub fn lifecycle_interval(graph: &Graph, log: &[SyncLogRecord], twin: &Term) -> Result<TimeInterval, SyncError> {
    let closure = closure_with_dti(graph, twin)?;
    let participates = vocab::participates_in();
    let sp = vocab::synchronizing_process();
    let type_of = vocab::type_of();
    let represented: BTreeSet<Term> = closure
        .outgoing_with(twin, &vocab::represents())
        .filter_map(|a| a.object.as_term().cloned())
        .collect();

    let mut spans: Vec<TimeInterval> = Vec::new();
    for process in closure
        .outgoing_with(twin, &participates)
        .filter_map(|a| a.object.as_term())
    {
        let shared = represented.iter().any(|y| {
            closure
                .outgoing_with(y, &participates)
                .any(|a| a.object.as_term() == Some(process))
        });
        if !shared {
            continue;
        }
        spans.extend(
            closure
                .outgoing_with(process, &type_of)
                .filter(|a| a.object.as_term().is_some_and(|c| closure.ancestors(c).contains(&sp)))
                .map(|a| a.interval.clone().unwrap_or_else(TimeInterval::unbounded)),
        );
    }
    for record in log {
        let pair = match &record.kind {
            RecordKind::Update { twin: w, describes, .. } => w == twin && represented.contains(describes),
            RecordKind::Signal { source, target } => {
                (source == twin && represented.contains(target)) || (target == twin && represented.contains(source))
            }
            _ => false,
        };
        if pair {
            spans.push(TimeInterval::bounded(record.t.clone(), record.t.clone()).expect("point interval"));
        }
    }
    spans
        .into_iter()
        .reduce(|a, b| a.hull(&b))
        .ok_or_else(|| SyncError::NoSharedProcesses(twin.clone()))
}
