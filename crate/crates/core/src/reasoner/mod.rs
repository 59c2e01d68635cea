//! Forward-chaining closure under the twin ontology's rules, derivation
//! explanations, and prototype arrangement checks.

mod arrangement;
mod engine;
mod explain;
mod rules;

use std::collections::BTreeMap;

use thiserror::Error;

pub use arrangement::{
    check_arrangement, parse_arrangement_spec, ArrangementError, ArrangementSpec, SatisfactionResult, SpecEdge,
};
pub use explain::DerivationTree;
pub use rules::{compile as compile_rules, Atom, Rule, Slot};

use crate::graph::{Assertion, Graph, Provenance};
use crate::term::Term;
use crate::validate::{domain_range_violations, Violation};

/// How declared domains and ranges are used.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Mode {
    /// Domains and ranges are checked against the closure; a clash is an error.
    #[default]
    Strict,
    /// Domains and ranges type the subjects and objects of relations (R3).
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("{} domain/range violation(s), first: {}", .0.len(), .0[0])]
    DomainRangeViolation(Vec<Violation>),
    #[error("`{0}` is not derivable")]
    NotDerivable(Box<Assertion>),
}

#[derive(Debug, Clone, Default)]
pub struct Reasoner {
    pub mode: Mode,
    /// Specs by id, consulted when a prototype `prescribesArrangement` one.
    pub arrangements: BTreeMap<Term, ArrangementSpec>,
}

impl Reasoner {
    pub fn new(mode: Mode) -> Self {
        Reasoner {
            mode,
            arrangements: BTreeMap::new(),
        }
    }

    pub fn with_arrangement(mut self, spec: ArrangementSpec) -> Self {
        self.arrangements.insert(spec.id.clone(), spec);
        self
    }

    /// The closure without the strict-mode check.
    pub fn materialize(&self, graph: &Graph) -> Graph {
        let rules = rules::compile(graph, self.mode == Mode::Lenient);
        engine::saturate(graph, &rules, &self.arrangements).graph
    }

    /// The least superset of `graph` closed under the rules.
    pub fn infer_closure(&self, graph: &Graph) -> Result<Graph, ReasonerError> {
        let closure = self.materialize(graph);
        if self.mode == Mode::Strict {
            let violations = domain_range_violations(&closure);
            if !violations.is_empty() {
                return Err(ReasonerError::DomainRangeViolation(violations));
            }
        }
        Ok(closure)
    }

    /// A minimal-depth derivation of `target` from the asserted facts of `graph`.
    pub fn explain(&self, graph: &Graph, target: &Assertion) -> Result<DerivationTree, ReasonerError> {
        let mut base = graph.clone();
        for (a, p) in graph.assertions() {
            if p != Provenance::Asserted {
                base.retract(a);
            }
        }
        let rules = rules::compile(&base, self.mode == Mode::Lenient);
        let run = engine::saturate(&base, &rules, &self.arrangements);
        let id = run
            .store
            .id_of(target)
            .ok_or_else(|| ReasonerError::NotDerivable(Box::new(target.clone())))?;
        Ok(DerivationTree::from_store(&run.store, id))
    }
}

/// Strict-mode closure without arrangement specs.
pub fn infer_closure(graph: &Graph) -> Result<Graph, ReasonerError> {
    Reasoner::default().infer_closure(graph)
}

pub fn explain(graph: &Graph, target: &Assertion) -> Result<DerivationTree, ReasonerError> {
    Reasoner::default().explain(graph, target)
}
