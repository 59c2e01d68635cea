//! Rule instances compiled from a graph's schema.
//!
//! Schema-parametric rules (R1 per subclass edge, R2 per subrelation edge, R3
//! per relation) are expanded into one ground-predicate rule each, so every
//! premise has a fixed predicate and the engine can use predicate indexes.
//! R9 needs the arrangement checker and is evaluated separately.
//!
//! A typing premise `?v a C` is a class filter: it matches a typing of `?v`
//! with `C` or any declared subclass of `C`.

use std::fmt;

use crate::graph::{Graph, RuleId};
use crate::schema::vocab;
use crate::term::{Node, Term};

const VAR_NAMES: [&str; 3] = ["x", "y", "s"];
const X: usize = 0;
const Y: usize = 1;
const S: usize = 2;
pub(crate) const VARS: usize = VAR_NAMES.len();

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Var(usize),
    Const(Node),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Var(i) => write!(f, "?{}", VAR_NAMES[*i]),
            Slot::Const(n) => n.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub subject: Slot,
    pub predicate: Term,
    pub object: Slot,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicate == vocab::type_of() {
            write!(f, "{} a {}", self.subject, self.object)
        } else {
            write!(f, "{} {} {}", self.subject, self.predicate, self.object)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub premises: Vec<Atom>,
    pub conclusion: Atom,
    /// Premise whose interval the conclusion keeps; otherwise atemporal.
    pub inherit_interval: Option<usize>,
    /// Premises whose intervals must overlap (missing intervals are unbounded).
    pub overlap: Option<(usize, usize)>,
}

impl Rule {
    fn new(id: RuleId, premises: Vec<Atom>, conclusion: Atom) -> Self {
        Rule {
            id,
            premises,
            conclusion,
            inherit_interval: None,
            overlap: None,
        }
    }

    fn inheriting(mut self, premise: usize) -> Self {
        self.inherit_interval = Some(premise);
        self
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.id)?;
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str(" , ")?;
            }
            p.fmt(f)?;
        }
        write!(f, " -> {}", self.conclusion)
    }
}

fn var(i: usize) -> Slot {
    Slot::Var(i)
}

fn typed(subject: Slot, class: Term) -> Atom {
    Atom {
        subject,
        predicate: vocab::type_of(),
        object: Slot::Const(Node::Term(class)),
    }
}

fn related(subject: Slot, predicate: Term, object: Slot) -> Atom {
    Atom {
        subject,
        predicate,
        object,
    }
}

/// All join rules for `graph`'s schema; R3 instances only when `with_r3`.
pub fn compile(graph: &Graph, with_r3: bool) -> Vec<Rule> {
    let mut rules = Vec::new();
    for class in graph.classes() {
        for sup in &class.superclasses {
            rules.push(
                Rule::new(
                    RuleId::R1,
                    vec![typed(var(X), class.id.clone())],
                    typed(var(X), sup.clone()),
                )
                .inheriting(0),
            );
        }
    }
    for rel in graph.relations() {
        for sup in &rel.superrelations {
            rules.push(
                Rule::new(
                    RuleId::R2,
                    vec![related(var(X), rel.id.clone(), var(Y))],
                    related(var(X), sup.clone(), var(Y)),
                )
                .inheriting(0),
            );
        }
    }
    if with_r3 {
        let literal = vocab::literal();
        for rel in graph.relations() {
            let premise = || vec![related(var(X), rel.id.clone(), var(Y))];
            rules.push(Rule::new(RuleId::R3, premise(), typed(var(X), rel.domain.clone())));
            if !graph.ancestors(&rel.range).contains(&literal) {
                rules.push(Rule::new(RuleId::R3, premise(), typed(var(Y), rel.range.clone())));
            }
        }
    }

    let represents = || related(var(X), vocab::represents(), var(Y));
    let participates = |who: usize| related(var(who), vocab::participates_in(), var(S));
    for (id, target) in [(RuleId::R4, vocab::material_entity()), (RuleId::R5, vocab::process())] {
        rules.push(Rule::new(
            id,
            vec![
                typed(var(X), vocab::digital_twin()),
                represents(),
                typed(var(Y), target),
            ],
            typed(var(X), vocab::digital_twin_instance()),
        ));
    }
    rules.push(
        Rule::new(
            RuleId::R6,
            vec![typed(var(X), vocab::digital_twin_instance())],
            typed(var(X), vocab::representational_ice()),
        )
        .inheriting(0),
    );
    rules.push(Rule::new(
        RuleId::R7,
        vec![
            typed(var(X), vocab::digital_twin_instance()),
            represents(),
            typed(var(Y), vocab::material_entity()),
            typed(var(S), vocab::synchronizing_process()),
            participates(X),
            participates(Y),
        ],
        related(var(X), vocab::is_counterpart_material_entity(), var(Y)),
    ));
    let mut r8 = Rule::new(
        RuleId::R8,
        vec![
            typed(var(X), vocab::digital_twin_instance()),
            represents(),
            typed(var(Y), vocab::process()),
            typed(var(S), vocab::synchronizing_process()),
            participates(X),
        ],
        related(var(X), vocab::is_counterpart_process(), var(Y)),
    );
    r8.overlap = Some((2, 3));
    rules.push(r8);
    rules
}
