//! Synchronization event logs: one JSON object per line.
//!
//! ```text
//! {"t": 0.0, "kind": "change-quality", "entity": "ex:vehicle1", "qualityType": "dto:Temperature", "old": "20C", "new": "25C"}
//! {"t": 0.1, "kind": "signal", "source": "ex:vehicle1", "target": "ex:dt1"}
//! {"t": 0.2, "kind": "update", "twin": "ex:dt1", "describes": "ex:vehicle1", "qualityType": "dto:Temperature", "value": "25C"}
//! ```

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::term::{Rational, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RecordKind {
    ChangeQuality {
        entity: Term,
        quality_type: Term,
        old: String,
        new: String,
    },
    ChangePart {
        entity: Term,
        removed_part: Term,
        added_part: Term,
    },
    Signal {
        source: Term,
        target: Term,
    },
    Update {
        twin: Term,
        describes: Term,
        quality_type: Term,
        value: String,
    },
}

impl RecordKind {
    pub fn name(&self) -> &'static str {
        match self {
            RecordKind::ChangeQuality { .. } => "change-quality",
            RecordKind::ChangePart { .. } => "change-part",
            RecordKind::Signal { .. } => "signal",
            RecordKind::Update { .. } => "update",
        }
    }

    pub fn is_change(&self) -> bool {
        matches!(self, RecordKind::ChangeQuality { .. } | RecordKind::ChangePart { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyncLogRecord {
    pub t: Rational,
    pub kind: RecordKind,
    /// 1-based source line; 0 for records built in code.
    pub line: usize,
}

impl SyncLogRecord {
    pub fn new(t: Rational, kind: RecordKind) -> Self {
        SyncLogRecord { t, kind, line: 0 }
    }
}

impl fmt::Display for SyncLogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} {}", self.t, self.kind.name())?;
        match &self.kind {
            RecordKind::ChangeQuality {
                entity,
                quality_type,
                old,
                new,
            } => write!(f, " {entity} {quality_type} {old:?} -> {new:?}"),
            RecordKind::ChangePart {
                entity,
                removed_part,
                added_part,
            } => write!(f, " {entity} -{removed_part} +{added_part}"),
            RecordKind::Signal { source, target } => write!(f, " {source} -> {target}"),
            RecordKind::Update {
                twin,
                describes,
                quality_type,
                value,
            } => write!(f, " {twin} {describes} {quality_type} = {value:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyncLogError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown record kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: field `{field}`: {message}")]
    InvalidField {
        line: usize,
        field: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncLogWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SyncLogWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Records in non-decreasing `t` order (stable for ties) plus parse warnings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SyncLog {
    pub records: Vec<SyncLogRecord>,
    pub warnings: Vec<SyncLogWarning>,
}

const COMMON_FIELDS: &[&str] = &["t", "kind"];

fn fields_for(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "change-quality" => &["entity", "qualityType", "old", "new"],
        "change-part" => &["entity", "removedPart", "addedPart"],
        "signal" => &["source", "target"],
        "update" => &["twin", "describes", "qualityType", "value"],
        _ => return None,
    })
}

struct Fields<'a> {
    obj: &'a Map<String, Value>,
    line: usize,
}

impl Fields<'_> {
    fn get(&self, field: &str) -> Result<&Value, SyncLogError> {
        self.obj.get(field).ok_or_else(|| SyncLogError::MissingField {
            line: self.line,
            field: field.to_string(),
        })
    }

    fn invalid(&self, field: &str, message: impl Into<String>) -> SyncLogError {
        SyncLogError::InvalidField {
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn term(&self, field: &str) -> Result<Term, SyncLogError> {
        match self.get(field)? {
            Value::String(s) => Term::from_str(s).map_err(|e| self.invalid(field, e.to_string())),
            _ => Err(self.invalid(field, "expected a prefixed name string")),
        }
    }

    /// Strings as-is; numbers by their exact text.
    fn text(&self, field: &str) -> Result<String, SyncLogError> {
        match self.get(field)? {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(self.invalid(field, "expected a string or number")),
        }
    }

    fn time(&self) -> Result<Rational, SyncLogError> {
        match self.get("t")? {
            Value::Number(n) => n
                .to_string()
                .parse()
                .map_err(|e: crate::term::NumberError| self.invalid("t", e.to_string())),
            // non-terminating times are written as `"n/d"` strings
            Value::String(s) if s.contains('/') => s
                .parse()
                .map_err(|e: crate::term::NumberError| self.invalid("t", e.to_string())),
            _ => Err(self.invalid("t", "expected a number")),
        }
    }
}

fn parse_line(text: &str, line: usize, warnings: &mut Vec<SyncLogWarning>) -> Result<SyncLogRecord, SyncLogError> {
    let value: Value = serde_json::from_str(text).map_err(|e| SyncLogError::Syntax {
        line,
        message: e.to_string(),
    })?;
    let Value::Object(obj) = value else {
        return Err(SyncLogError::Syntax {
            line,
            message: "expected a JSON object".into(),
        });
    };
    let fields = Fields { obj: &obj, line };
    let kind_name = match fields.get("kind")? {
        Value::String(s) => s.clone(),
        _ => return Err(fields.invalid("kind", "expected a string")),
    };
    let expected = fields_for(&kind_name).ok_or_else(|| SyncLogError::UnknownKind {
        line,
        kind: kind_name.clone(),
    })?;
    let t = fields.time()?;
    let kind = match kind_name.as_str() {
        "change-quality" => RecordKind::ChangeQuality {
            entity: fields.term("entity")?,
            quality_type: fields.term("qualityType")?,
            old: fields.text("old")?,
            new: fields.text("new")?,
        },
        "change-part" => RecordKind::ChangePart {
            entity: fields.term("entity")?,
            removed_part: fields.term("removedPart")?,
            added_part: fields.term("addedPart")?,
        },
        "signal" => RecordKind::Signal {
            source: fields.term("source")?,
            target: fields.term("target")?,
        },
        _ => RecordKind::Update {
            twin: fields.term("twin")?,
            describes: fields.term("describes")?,
            quality_type: fields.term("qualityType")?,
            value: fields.text("value")?,
        },
    };
    for key in obj.keys() {
        if !COMMON_FIELDS.contains(&key.as_str()) && !expected.contains(&key.as_str()) {
            warnings.push(SyncLogWarning {
                line,
                message: format!("ignoring unknown field `{key}`"),
            });
        }
    }
    Ok(SyncLogRecord { t, kind, line })
}

pub fn parse_sync_log(text: &str) -> Result<SyncLog, SyncLogError> {
    let mut log = SyncLog::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_line(line, i + 1, &mut log.warnings)?;
        log.records.push(record);
    }
    log.records.sort_by(|a, b| a.t.cmp(&b.t));
    Ok(log)
}

/// JSON number for terminating decimals, string otherwise.
pub fn rational_json(r: &Rational) -> Value {
    if r.is_terminating() {
        if let Ok(n) = Number::from_str(&r.to_string()) {
            return Value::Number(n);
        }
    }
    Value::String(r.to_string())
}

pub fn record_to_json(record: &SyncLogRecord) -> Map<String, Value> {
    let mut obj = Map::new();
    let s = |t: &Term| Value::String(t.to_string());
    obj.insert("t".into(), rational_json(&record.t));
    obj.insert("kind".into(), Value::String(record.kind.name().into()));
    match &record.kind {
        RecordKind::ChangeQuality {
            entity,
            quality_type,
            old,
            new,
        } => {
            obj.insert("entity".into(), s(entity));
            obj.insert("qualityType".into(), s(quality_type));
            obj.insert("old".into(), Value::String(old.clone()));
            obj.insert("new".into(), Value::String(new.clone()));
        }
        RecordKind::ChangePart {
            entity,
            removed_part,
            added_part,
        } => {
            obj.insert("entity".into(), s(entity));
            obj.insert("removedPart".into(), s(removed_part));
            obj.insert("addedPart".into(), s(added_part));
        }
        RecordKind::Signal { source, target } => {
            obj.insert("source".into(), s(source));
            obj.insert("target".into(), s(target));
        }
        RecordKind::Update {
            twin,
            describes,
            quality_type,
            value,
        } => {
            obj.insert("twin".into(), s(twin));
            obj.insert("describes".into(), s(describes));
            obj.insert("qualityType".into(), s(quality_type));
            obj.insert("value".into(), Value::String(value.clone()));
        }
    }
    obj
}

pub fn write_sync_log(records: &[SyncLogRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&Value::Object(record_to_json(r)).to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn change_quality_line() {
        let log = parse_sync_log(
            r#"{"t": 0.0, "kind": "change-quality", "entity": "ex:vehicle1", "qualityType": "dto:Temperature", "old": "20C", "new": "25C"}"#,
        )
        .unwrap();
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.records[0].t, Rational::zero());
        assert!(matches!(&log.records[0].kind, RecordKind::ChangeQuality { new, .. } if new == "25C"));
        assert!(log.warnings.is_empty());
    }

    #[test]
    fn empty_log() {
        assert_eq!(parse_sync_log("").unwrap().records, vec![]);
        assert_eq!(parse_sync_log("\n  \n").unwrap().records, vec![]);
    }

    #[test]
    fn unknown_kind() {
        let err = parse_sync_log(r#"{"t": 1, "kind": "teleport"}"#).unwrap_err();
        assert_eq!(
            err,
            SyncLogError::UnknownKind {
                line: 1,
                kind: "teleport".into()
            }
        );
    }

    #[test]
    fn missing_field_is_named() {
        let err = parse_sync_log("\n{\"t\": 1, \"kind\": \"signal\", \"source\": \"ex:a\"}").unwrap_err();
        assert_eq!(
            err,
            SyncLogError::MissingField {
                line: 2,
                field: "target".into()
            }
        );
    }

    #[test]
    fn bad_json_is_a_syntax_error() {
        assert!(matches!(
            parse_sync_log("{\"t\": 1,").unwrap_err(),
            SyncLogError::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn records_are_stably_sorted() {
        let text = [
            r#"{"t": 2, "kind": "signal", "source": "ex:a", "target": "ex:b"}"#,
            r#"{"t": 1, "kind": "signal", "source": "ex:first", "target": "ex:b"}"#,
            r#"{"t": 1, "kind": "signal", "source": "ex:second", "target": "ex:b"}"#,
        ]
        .join("\n");
        let log = parse_sync_log(&text).unwrap();
        let lines: Vec<_> = log.records.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 1]);
    }

    #[test]
    fn extra_fields_warn() {
        let log = parse_sync_log(r#"{"t": 1, "kind": "signal", "source": "ex:a", "target": "ex:b", "verdict": "x"}"#)
            .unwrap();
        assert_eq!(log.warnings.len(), 1);
        assert!(log.warnings[0].message.contains("verdict"));
    }

    #[test]
    fn exact_decimal_times() {
        let log = parse_sync_log(r#"{"t": 0.1, "kind": "signal", "source": "ex:a", "target": "ex:b"}"#).unwrap();
        assert_eq!(log.records[0].t, Rational::new(1, 10));
        let written = write_sync_log(&log.records);
        assert!(written.starts_with("{\"t\":0.1,"), "{written}");
        let mut back = parse_sync_log(&written).unwrap().records;
        back[0].line = log.records[0].line;
        assert_eq!(back, log.records);
    }
}
