//! Readers and writers for the graph exchange format and sync event logs.

mod lexer;
pub mod synclog;
pub mod turtle;

use thiserror::Error;

pub use synclog::{parse_sync_log, write_sync_log, RecordKind, SyncLog, SyncLogError, SyncLogRecord};
pub use turtle::{
    load_graph, parse_document, parse_document_bytes, serialize_document, serialize_with, Document, DocumentError,
    LoadError, SerializeOptions, Statement,
};

pub(crate) use turtle::{parse_raw, RawObject, RawSubject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: undeclared prefix in `{name}`")]
    UndeclaredPrefix { name: String, line: usize, column: usize },
}

impl ParseError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::UndeclaredPrefix { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}
