//! Typed assertion store with class and relation hierarchies.
//!
//! Iteration over classes, relations and assertions always follows the
//! lexicographic order of terms, so every derived artifact (serializations,
//! reports, derivations) is reproducible byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::schema::vocab;
use crate::term::{Node, Term, TimeInterval};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("subsumption cycle through `{0}`")]
    Cycle(Term),
    #[error("`{referenced}` referenced by `{by}` is not declared")]
    DanglingReference { by: Term, referenced: Term },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(Term),
    #[error("unknown class `{0}`")]
    UnknownClass(Term),
    #[error("conflicting declaration of `{term}`: {detail}")]
    ConflictingDeclaration { term: Term, detail: String },
    #[error("prefix `{prefix}` is already bound to <{existing}>, cannot rebind to <{requested}>")]
    PrefixConflict {
        prefix: String,
        existing: String,
        requested: String,
    },
    #[error("type-of assertion on `{0}` needs a class term as object")]
    LiteralType(Term),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaClass {
    pub id: Term,
    pub superclasses: BTreeSet<Term>,
    /// Declared pairwise disjointness; inherited by every subclass on both sides.
    pub disjoint_with: BTreeSet<Term>,
    pub definition: String,
}

impl SchemaClass {
    pub fn new(id: Term) -> Self {
        SchemaClass {
            id,
            superclasses: BTreeSet::new(),
            disjoint_with: BTreeSet::new(),
            definition: String::new(),
        }
    }

    pub fn subclass_of(mut self, parent: Term) -> Self {
        self.superclasses.insert(parent);
        self
    }

    pub fn defined_as(mut self, definition: impl Into<String>) -> Self {
        self.definition = definition.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaRelation {
    pub id: Term,
    pub superrelations: BTreeSet<Term>,
    pub domain: Term,
    pub range: Term,
    pub definition: String,
}

impl SchemaRelation {
    pub fn new(id: Term, domain: Term, range: Term) -> Self {
        SchemaRelation {
            id,
            superrelations: BTreeSet::new(),
            domain,
            range,
            definition: String::new(),
        }
    }

    pub fn subrelation_of(mut self, parent: Term) -> Self {
        self.superrelations.insert(parent);
        self
    }

    pub fn defined_as(mut self, definition: impl Into<String>) -> Self {
        self.definition = definition.into();
        self
    }
}

/// Identifier of an inference rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
}

impl RuleId {
    pub const ALL: [RuleId; 9] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for RuleId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL.into_iter().find(|r| r.to_string() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Asserted,
    Inferred(RuleId),
}

/// A subject–predicate–object statement, optionally holding only during an interval.
///
/// Identity (and therefore deduplication) covers all four fields; provenance
/// is stored alongside in the graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assertion {
    pub subject: Term,
    pub predicate: Term,
    pub object: Node,
    pub interval: Option<TimeInterval>,
}

impl Assertion {
    pub fn new(subject: Term, predicate: Term, object: impl Into<Node>) -> Self {
        Assertion {
            subject,
            predicate,
            object: object.into(),
            interval: None,
        }
    }

    pub fn type_of(subject: Term, class: Term) -> Self {
        Assertion::new(subject, vocab::type_of(), class)
    }

    pub fn during(mut self, interval: TimeInterval) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn is_type_of(&self) -> bool {
        self.predicate == vocab::type_of()
    }

    fn lower_bound(subject: &Term, predicate: Option<&Term>) -> Self {
        let min = Term::builtin("", "");
        Assertion {
            subject: subject.clone(),
            predicate: predicate.cloned().unwrap_or_else(|| min.clone()),
            object: Node::Term(min),
            interval: None,
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let predicate = if self.is_type_of() {
            "a".to_string()
        } else {
            self.predicate.to_string()
        };
        write!(f, "{} {} {}", self.subject, predicate, self.object)?;
        if let Some(interval) = &self.interval {
            write!(f, " @{interval}")?;
        }
        Ok(())
    }
}

/// Position of a triple pattern: a wildcard, a named variable, or a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternItem {
    Any,
    Var(String),
    Const(Node),
}

impl PatternItem {
    pub fn var(name: &str) -> Self {
        PatternItem::Var(name.to_string())
    }

    pub fn term(t: &Term) -> Self {
        PatternItem::Const(Node::Term(t.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: PatternItem,
    pub predicate: PatternItem,
    pub object: PatternItem,
}

impl TriplePattern {
    pub fn new(subject: PatternItem, predicate: PatternItem, object: PatternItem) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }
}

pub type Binding = BTreeMap<String, Node>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    prefixes: BTreeMap<String, String>,
    classes: BTreeMap<Term, SchemaClass>,
    relations: BTreeMap<Term, SchemaRelation>,
    assertions: BTreeMap<Assertion, Provenance>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    /// An empty graph with the standard namespace prefixes bound.
    pub fn new() -> Self {
        let prefixes = vocab::STANDARD_PREFIXES
            .iter()
            .map(|(p, iri)| (p.to_string(), iri.to_string()))
            .collect();
        Graph {
            prefixes,
            classes: BTreeMap::new(),
            relations: BTreeMap::new(),
            assertions: BTreeMap::new(),
        }
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn bind_prefix(&mut self, prefix: &str, iri: &str) -> Result<(), GraphError> {
        match self.prefixes.get(prefix) {
            Some(existing) if existing != iri => Err(GraphError::PrefixConflict {
                prefix: prefix.to_string(),
                existing: existing.clone(),
                requested: iri.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                self.prefixes.insert(prefix.to_string(), iri.to_string());
                Ok(())
            }
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = &SchemaClass> {
        self.classes.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &SchemaRelation> {
        self.relations.values()
    }

    pub fn class(&self, id: &Term) -> Option<&SchemaClass> {
        self.classes.get(id)
    }

    pub fn relation(&self, id: &Term) -> Option<&SchemaRelation> {
        self.relations.get(id)
    }

    pub fn has_class(&self, id: &Term) -> bool {
        self.classes.contains_key(id)
    }

    /// Adds (or merges into) class and relation declarations.
    ///
    /// Redeclaring a known term unions its parents; a relation's domain and
    /// range must agree with the existing declaration. The graph is left
    /// untouched when an error is returned.
    pub fn extend_schema(
        &mut self,
        classes: impl IntoIterator<Item = SchemaClass>,
        relations: impl IntoIterator<Item = SchemaRelation>,
    ) -> Result<(), GraphError> {
        let mut new_classes = self.classes.clone();
        let mut new_relations = self.relations.clone();
        for class in classes {
            match new_classes.get_mut(&class.id) {
                Some(existing) => {
                    existing.superclasses.extend(class.superclasses);
                    existing.disjoint_with.extend(class.disjoint_with);
                    if !class.definition.is_empty() {
                        existing.definition = class.definition;
                    }
                }
                None => {
                    new_classes.insert(class.id.clone(), class);
                }
            }
        }
        for relation in relations {
            match new_relations.get_mut(&relation.id) {
                Some(existing) => {
                    if existing.domain != relation.domain || existing.range != relation.range {
                        return Err(GraphError::ConflictingDeclaration {
                            term: relation.id.clone(),
                            detail: format!(
                                "declared {} -> {}, redeclared {} -> {}",
                                existing.domain, existing.range, relation.domain, relation.range
                            ),
                        });
                    }
                    existing.superrelations.extend(relation.superrelations);
                    if !relation.definition.is_empty() {
                        existing.definition = relation.definition;
                    }
                }
                None => {
                    new_relations.insert(relation.id.clone(), relation);
                }
            }
        }

        for class in new_classes.values() {
            for referenced in class.superclasses.iter().chain(&class.disjoint_with) {
                if !new_classes.contains_key(referenced) {
                    return Err(GraphError::DanglingReference {
                        by: class.id.clone(),
                        referenced: referenced.clone(),
                    });
                }
            }
        }
        for relation in new_relations.values() {
            for referenced in &relation.superrelations {
                if !new_relations.contains_key(referenced) {
                    return Err(GraphError::DanglingReference {
                        by: relation.id.clone(),
                        referenced: referenced.clone(),
                    });
                }
            }
            for referenced in [&relation.domain, &relation.range] {
                if !new_classes.contains_key(referenced) {
                    return Err(GraphError::DanglingReference {
                        by: relation.id.clone(),
                        referenced: referenced.clone(),
                    });
                }
            }
        }
        find_cycle(new_classes.iter().map(|(k, c)| (k, &c.superclasses)))
            .map_or(Ok(()), |t| Err(GraphError::Cycle(t)))?;
        find_cycle(new_relations.iter().map(|(k, r)| (k, &r.superrelations)))
            .map_or(Ok(()), |t| Err(GraphError::Cycle(t)))?;

        self.classes = new_classes;
        self.relations = new_relations;
        Ok(())
    }

    fn check_assertion(&self, a: &Assertion) -> Result<(), GraphError> {
        if a.is_type_of() {
            match &a.object {
                Node::Term(class) if self.has_class(class) => Ok(()),
                Node::Term(class) => Err(GraphError::UnknownClass(class.clone())),
                Node::Literal(_) => Err(GraphError::LiteralType(a.subject.clone())),
            }
        } else if self.relations.contains_key(&a.predicate) {
            Ok(())
        } else {
            Err(GraphError::UnknownPredicate(a.predicate.clone()))
        }
    }

    /// Inserts an asserted fact. Returns `false` if it was already present.
    pub fn assert(&mut self, a: Assertion) -> Result<bool, GraphError> {
        self.insert(a, Provenance::Asserted)
    }

    /// Inserts a fact with explicit provenance. An existing fact keeps its
    /// original provenance.
    pub fn insert(&mut self, a: Assertion, provenance: Provenance) -> Result<bool, GraphError> {
        self.check_assertion(&a)?;
        if self.assertions.contains_key(&a) {
            return Ok(false);
        }
        self.assertions.insert(a, provenance);
        Ok(true)
    }

    pub fn retract(&mut self, a: &Assertion) -> bool {
        self.assertions.remove(a).is_some()
    }

    pub fn contains(&self, a: &Assertion) -> bool {
        self.assertions.contains_key(a)
    }

    pub fn provenance(&self, a: &Assertion) -> Option<Provenance> {
        self.assertions.get(a).copied()
    }

    pub fn assertions(&self) -> impl Iterator<Item = (&Assertion, Provenance)> {
        self.assertions.iter().map(|(a, p)| (a, *p))
    }

    pub fn len(&self) -> usize {
        self.assertions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assertions.is_empty()
    }

    /// Assertion keys only, for set comparisons.
    pub fn assertion_set(&self) -> BTreeSet<Assertion> {
        self.assertions.keys().cloned().collect()
    }

    /// All assertions with the given subject.
    pub fn outgoing<'a>(&'a self, subject: &'a Term) -> impl Iterator<Item = &'a Assertion> + 'a {
        self.assertions
            .range(Assertion::lower_bound(subject, None)..)
            .map(|(a, _)| a)
            .take_while(move |a| &a.subject == subject)
    }

    /// All assertions with the given subject and predicate.
    pub fn outgoing_with<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a Term,
    ) -> impl Iterator<Item = &'a Assertion> + 'a {
        self.assertions
            .range(Assertion::lower_bound(subject, Some(predicate))..)
            .map(|(a, _)| a)
            .take_while(move |a| &a.subject == subject && &a.predicate == predicate)
    }

    pub fn with_predicate<'a>(&'a self, predicate: &'a Term) -> impl Iterator<Item = &'a Assertion> + 'a {
        self.assertions.keys().filter(move |a| &a.predicate == predicate)
    }

    /// Classes directly asserted for `individual`.
    pub fn types_of(&self, individual: &Term) -> BTreeSet<Term> {
        let type_of = vocab::type_of();
        self.outgoing_with(individual, &type_of)
            .filter_map(|a| a.object.as_term().cloned())
            .collect()
    }

    /// Whether `individual` has a type subsumed by `class`.
    pub fn has_type(&self, individual: &Term, class: &Term) -> bool {
        self.types_of(individual)
            .iter()
            .any(|t| self.ancestors(t).contains(class))
    }

    /// Every term used as an individual: subjects, and term objects of
    /// non-type assertions.
    pub fn individuals(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for a in self.assertions.keys() {
            out.insert(a.subject.clone());
            if !a.is_type_of() {
                if let Node::Term(t) = &a.object {
                    out.insert(t.clone());
                }
            }
        }
        out
    }

    pub fn mentions(&self, individual: &Term) -> bool {
        self.outgoing(individual).next().is_some()
            || self
                .assertions
                .keys()
                .any(|a| !a.is_type_of() && a.object.as_term() == Some(individual))
    }

    /// Reflexive-transitive superclasses of `class` (empty if undeclared).
    pub fn ancestors(&self, class: &Term) -> BTreeSet<Term> {
        closure(class, |c| self.classes.get(c).map(|c| &c.superclasses))
    }

    /// Reflexive-transitive superrelations of `relation` (empty if undeclared).
    pub fn relation_ancestors(&self, relation: &Term) -> BTreeSet<Term> {
        closure(relation, |r| self.relations.get(r).map(|r| &r.superrelations))
    }

    pub fn is_subclass_of(&self, a: &Term, b: &Term) -> Result<bool, GraphError> {
        for t in [a, b] {
            if !self.has_class(t) {
                return Err(GraphError::UnknownClass(t.clone()));
            }
        }
        Ok(self.ancestors(a).contains(b))
    }

    pub fn is_subrelation_of(&self, a: &Term, b: &Term) -> Result<bool, GraphError> {
        for t in [a, b] {
            if !self.relations.contains_key(t) {
                return Err(GraphError::UnknownPredicate(t.clone()));
            }
        }
        Ok(self.relation_ancestors(a).contains(b))
    }

    /// Classes are disjoint when some ancestor of one is declared disjoint
    /// with some ancestor of the other.
    pub fn are_disjoint(&self, a: &Term, b: &Term) -> bool {
        let up_a = self.ancestors(a);
        let up_b = self.ancestors(b);
        up_a.iter().any(|x| {
            self.classes
                .get(x)
                .is_some_and(|c| c.disjoint_with.iter().any(|d| up_b.contains(d)))
        }) || up_b.iter().any(|x| {
            self.classes
                .get(x)
                .is_some_and(|c| c.disjoint_with.iter().any(|d| up_a.contains(d)))
        })
    }

    /// A fresh `gen:` term `gen:<stem><n>` not used anywhere in the graph.
    pub fn fresh_term(&self, stem: &str) -> Term {
        let mut max = 0u64;
        let mut scan = |t: &Term| {
            if t.prefix() == vocab::GEN_PREFIX {
                if let Some(n) = t.local().strip_prefix(stem).and_then(|n| n.parse::<u64>().ok()) {
                    max = max.max(n);
                }
            }
        };
        for a in self.assertions.keys() {
            scan(&a.subject);
            if let Node::Term(t) = &a.object {
                scan(t);
            }
        }
        Term::builtin(vocab::GEN_PREFIX, &format!("{stem}{}", max + 1))
    }

    /// All bindings of `pattern`, one per matching assertion, sorted.
    ///
    /// `class_filter` keeps a binding only when the named variable is bound to
    /// an individual typed (under subsumption) with the given class.
    pub fn match_pattern(
        &self,
        pattern: &TriplePattern,
        class_filter: &BTreeMap<String, Term>,
    ) -> Result<Vec<Binding>, GraphError> {
        for class in class_filter.values() {
            if !self.has_class(class) {
                return Err(GraphError::UnknownClass(class.clone()));
            }
        }
        let mut out = Vec::new();
        for a in self.assertions.keys() {
            let mut binding = Binding::new();
            let subject = Node::Term(a.subject.clone());
            let predicate = Node::Term(a.predicate.clone());
            if !unify(&pattern.subject, &subject, &mut binding)
                || !unify(&pattern.predicate, &predicate, &mut binding)
                || !unify(&pattern.object, &a.object, &mut binding)
            {
                continue;
            }
            let keep = class_filter.iter().all(|(var, class)| match binding.get(var) {
                Some(Node::Term(t)) => self.has_type(t, class),
                Some(Node::Literal(_)) => false,
                None => true,
            });
            if keep {
                out.push(binding);
            }
        }
        out.sort();
        Ok(out)
    }
}

fn unify(item: &PatternItem, value: &Node, binding: &mut Binding) -> bool {
    match item {
        PatternItem::Any => true,
        PatternItem::Const(c) => c == value,
        PatternItem::Var(name) => match binding.get(name) {
            Some(bound) => bound == value,
            None => {
                binding.insert(name.clone(), value.clone());
                true
            }
        },
    }
}

fn closure<'a, F>(start: &Term, parents: F) -> BTreeSet<Term>
where
    F: Fn(&Term) -> Option<&'a BTreeSet<Term>>,
{
    let mut seen = BTreeSet::new();
    if parents(start).is_none() {
        return seen;
    }
    let mut stack = vec![start.clone()];
    while let Some(t) = stack.pop() {
        if !seen.insert(t.clone()) {
            continue;
        }
        if let Some(ps) = parents(&t) {
            stack.extend(ps.iter().filter(|p| !seen.contains(*p)).cloned());
        }
    }
    seen
}

/// Returns a node on a cycle, if the parent relation has one.
fn find_cycle<'a>(nodes: impl Iterator<Item = (&'a Term, &'a BTreeSet<Term>)>) -> Option<Term> {
    let edges: BTreeMap<&Term, &BTreeSet<Term>> = nodes.collect();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&Term, Mark> = BTreeMap::new();
    for &root in edges.keys() {
        if marks.contains_key(root) {
            continue;
        }
        // iterative DFS: (node, next child index)
        let mut stack: Vec<(&Term, Vec<&Term>)> = vec![(root, edges[root].iter().collect())];
        marks.insert(root, Mark::Active);
        while let Some((node, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(child) => match marks.get(child) {
                    Some(Mark::Active) => return Some(child.clone()),
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(child, Mark::Active);
                        let next = edges.get(child).map(|s| s.iter().collect()).unwrap_or_default();
                        stack.push((child, next));
                    }
                },
                None => {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
    }
    None
}
