//! Knowledge-graph engine for digital twin ontologies.
//!
//! The crate bundles a typed assertion store ([`graph`]), the built-in twin
//! ontology and its closed-world constraints ([`schema`], [`validate`]), a
//! Turtle-subset and sync-log reader/writer ([`parser`]), a forward-chaining
//! rule engine with derivation trees ([`reasoner`]), granular partitions for
//! fidelity ([`granularity`]), and synchronization-log analysis ([`sync`]).

#![allow(clippy::result_large_err)]

pub mod granularity;
pub mod graph;
pub mod parser;
pub mod reasoner;
pub mod schema;
pub mod sync;
pub mod term;
pub mod validate;

pub use graph::{Assertion, Graph, GraphError, Provenance, RuleId, SchemaClass, SchemaRelation};
pub use term::{Literal, Node, Rational, Term, TimeInterval};
