use std::collections::BTreeMap;
use std::fmt;

use super::engine::{fire_once, Store};
use super::rules::compile;
use super::{Mode, Reasoner};
use crate::graph::{Assertion, Graph, Provenance};

/// Why an assertion holds: either it was asserted, or a rule fired over the
/// conclusions of the children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    pub conclusion: Assertion,
    pub rule: Provenance,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub(crate) fn from_store(store: &Store, id: usize) -> Self {
        match &store.derivations[id] {
            None => DerivationTree {
                conclusion: store.facts[id].clone(),
                rule: Provenance::Asserted,
                children: Vec::new(),
            },
            Some(d) => {
                let mut premises = d.premises.clone();
                premises.dedup();
                DerivationTree {
                    conclusion: store.facts[id].clone(),
                    rule: Provenance::Inferred(d.rule),
                    children: premises.iter().map(|&p| Self::from_store(store, p)).collect(),
                }
            }
        }
    }

    /// Number of rule applications on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self.rule {
            Provenance::Asserted => 0,
            Provenance::Inferred(_) => 1 + self.children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    pub fn leaves(&self) -> Vec<&Assertion> {
        if self.children.is_empty() {
            return vec![&self.conclusion];
        }
        self.children.iter().flat_map(Self::leaves).collect()
    }

    /// Re-derives the tree bottom-up: every leaf must be asserted in `graph`,
    /// and every inner node's rule, fired once over a graph holding only the
    /// schema and the children's conclusions, must produce its conclusion.
    pub fn replay(&self, reasoner: &Reasoner, graph: &Graph) -> bool {
        let Provenance::Inferred(rule) = self.rule else {
            return graph.provenance(&self.conclusion) == Some(Provenance::Asserted) && self.children.is_empty();
        };
        if !self.children.iter().all(|c| c.replay(reasoner, graph)) {
            return false;
        }
        let mut mini = graph.clone();
        for a in graph.assertion_set() {
            mini.retract(&a);
        }
        for c in &self.children {
            if mini.assert(c.conclusion.clone()).is_err() {
                return false;
            }
        }
        let rules: Vec<_> = compile(&mini, reasoner.mode == Mode::Lenient)
            .into_iter()
            .filter(|r| r.id == rule)
            .collect();
        let none = BTreeMap::new();
        let arrangements = if rule == crate::graph::RuleId::R9 {
            &reasoner.arrangements
        } else {
            &none
        };
        fire_once(&mini, &rules, arrangements).contains(&self.conclusion)
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        let rule = match self.rule {
            Provenance::Asserted => "asserted".to_string(),
            Provenance::Inferred(r) => r.to_string(),
        };
        writeln!(f, "{:indent$}{} [{rule}]", "", self.conclusion, indent = indent)?;
        for c in &self.children {
            c.write(f, indent + 2)?;
        }
        Ok(())
    }
}

impl fmt::Display for DerivationTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}
