//! Closed-world constraints over a graph.
//!
//! Each constraint checks one definitional clause of the twin ontology.
//! Existential clauses are warnings (a partial graph may simply not mention
//! the witness yet); structural clauses are errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::Graph;
use crate::schema::vocab;
use crate::term::{Node, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintId {
    C1,
    C2,
    C3,
    C4,
    C5,
    C6,
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub severity: Severity,
    pub focus: Term,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity, self.constraint, self.focus, self.message
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn errors(&self) -> usize {
        self.violations.iter().filter(|v| v.severity == Severity::Error).count()
    }

    pub fn warnings(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
            .count()
    }

    pub fn summary(&self) -> String {
        format!("{} errors, {} warnings", self.errors(), self.warnings())
    }
}

pub struct Constraint {
    pub id: ConstraintId,
    pub severity: Severity,
    pub description: &'static str,
    check: fn(&Graph, &mut TypeCache) -> Vec<(Term, String)>,
}

impl Constraint {
    pub fn check(&self, graph: &Graph) -> Vec<Violation> {
        let mut cache = TypeCache::default();
        self.run(graph, &mut cache)
    }

    fn run(&self, graph: &Graph, cache: &mut TypeCache) -> Vec<Violation> {
        (self.check)(graph, cache)
            .into_iter()
            .map(|(focus, message)| Violation {
                constraint: self.id,
                severity: self.severity,
                focus,
                message,
            })
            .collect()
    }
}

pub static CONSTRAINTS: [Constraint; 6] = [
    Constraint {
        id: ConstraintId::C1,
        severity: Severity::Error,
        description: "subjects and objects are not typed disjointly from the relation's domain and range",
        check: check_domain_range,
    },
    Constraint {
        id: ConstraintId::C2,
        severity: Severity::Warning,
        description: "every information content entity generically depends on some information bearing entity",
        check: check_bearer,
    },
    Constraint {
        id: ConstraintId::C3,
        severity: Severity::Error,
        description: "every synchronizing process has a digital twin instance participant",
        check: check_sync_participant,
    },
    Constraint {
        id: ConstraintId::C4,
        severity: Severity::Error,
        description:
            "every counterpart material entity link has a represented material entity sharing a synchronizing process",
        check: check_counterpart_support,
    },
    Constraint {
        id: ConstraintId::C5,
        severity: Severity::Warning,
        description: "every part replacement is accompanied by a quality change of the same bearer",
        check: check_part_replacement,
    },
    Constraint {
        id: ConstraintId::C6,
        severity: Severity::Error,
        description: "proper continuant parthood is irreflexive and acyclic",
        check: check_proper_parthood,
    },
];

/// Runs every constraint; violations are sorted and deduplicated.
pub fn validate(graph: &Graph) -> ValidationReport {
    let mut cache = TypeCache::default();
    let mut violations: Vec<Violation> = CONSTRAINTS.iter().flat_map(|c| c.run(graph, &mut cache)).collect();
    violations.sort();
    violations.dedup();
    ValidationReport { violations }
}

/// Only the domain/range check, as used by the reasoner's strict mode.
pub fn domain_range_violations(graph: &Graph) -> Vec<Violation> {
    let mut v = CONSTRAINTS[0].check(graph);
    v.sort();
    v.dedup();
    v
}

/// Memoized subsumption and disjointness queries.
#[derive(Default)]
pub(crate) struct TypeCache {
    ancestors: BTreeMap<Term, BTreeSet<Term>>,
    disjoint: BTreeMap<(Term, Term), bool>,
}

impl TypeCache {
    fn ancestors(&mut self, graph: &Graph, class: &Term) -> &BTreeSet<Term> {
        self.ancestors
            .entry(class.clone())
            .or_insert_with(|| graph.ancestors(class))
    }

    fn has_type(&mut self, graph: &Graph, individual: &Term, class: &Term) -> bool {
        graph
            .types_of(individual)
            .iter()
            .any(|t| self.ancestors(graph, t).contains(class))
    }

    fn disjoint(&mut self, graph: &Graph, a: &Term, b: &Term) -> bool {
        *self
            .disjoint
            .entry((a.clone(), b.clone()))
            .or_insert_with(|| graph.are_disjoint(a, b))
    }

    /// First asserted type of `individual` disjoint with `class`.
    fn clash(&mut self, graph: &Graph, individual: &Term, class: &Term) -> Option<Term> {
        graph
            .types_of(individual)
            .into_iter()
            .find(|t| self.disjoint(graph, t, class))
    }
}

fn check_domain_range(graph: &Graph, cache: &mut TypeCache) -> Vec<(Term, String)> {
    let mut out = Vec::new();
    for (a, _) in graph.assertions() {
        if a.is_type_of() {
            continue;
        }
        let Some(rel) = graph.relation(&a.predicate) else {
            continue;
        };
        if let Some(t) = cache.clash(graph, &a.subject, &rel.domain) {
            out.push((
                a.subject.clone(),
                format!(
                    "typed {t}, disjoint with {} required as subject of {}",
                    rel.domain, rel.id
                ),
            ));
        }
        let literal_range = cache.ancestors(graph, &rel.range).contains(&vocab::literal());
        match &a.object {
            Node::Literal(_) if !literal_range => out.push((
                a.subject.clone(),
                format!("{} expects a {} object, found a literal", rel.id, rel.range),
            )),
            Node::Literal(_) => {}
            Node::Term(o) if literal_range => out.push((
                a.subject.clone(),
                format!("{} expects a literal object, found {o}", rel.id),
            )),
            Node::Term(o) => {
                if let Some(t) = cache.clash(graph, o, &rel.range) {
                    out.push((
                        o.clone(),
                        format!(
                            "typed {t}, disjoint with {} required as object of {}",
                            rel.range, rel.id
                        ),
                    ));
                }
            }
        }
    }
    out
}

fn instances_of(graph: &Graph, cache: &mut TypeCache, class: &Term) -> BTreeSet<Term> {
    let type_of = vocab::type_of();
    let subjects: BTreeSet<Term> = graph.with_predicate(&type_of).map(|a| a.subject.clone()).collect();
    subjects
        .into_iter()
        .filter(|s| cache.has_type(graph, s, class))
        .collect()
}

fn participants(graph: &Graph, process: &Term) -> BTreeSet<Term> {
    let participates = vocab::participates_in();
    graph
        .with_predicate(&participates)
        .filter(|a| a.object.as_term() == Some(process))
        .map(|a| a.subject.clone())
        .collect()
}

fn check_bearer(graph: &Graph, cache: &mut TypeCache) -> Vec<(Term, String)> {
    let depends = vocab::generically_depends_on();
    let ibe = vocab::information_bearing_entity();
    let mut out = Vec::new();
    for ice in instances_of(graph, cache, &vocab::information_content_entity()) {
        let has_bearer = graph
            .outgoing_with(&ice, &depends)
            .filter_map(|a| a.object.as_term())
            .any(|b| cache.has_type(graph, b, &ibe));
        if !has_bearer {
            out.push((ice, format!("no {depends} link to an {ibe}")));
        }
    }
    out
}

fn check_sync_participant(graph: &Graph, cache: &mut TypeCache) -> Vec<(Term, String)> {
    let dti = vocab::digital_twin_instance();
    let mut out = Vec::new();
    for s in instances_of(graph, cache, &vocab::synchronizing_process()) {
        if !participants(graph, &s).iter().any(|p| cache.has_type(graph, p, &dti)) {
            out.push((s, format!("no participant typed {dti}")));
        }
    }
    out
}

fn check_counterpart_support(graph: &Graph, cache: &mut TypeCache) -> Vec<(Term, String)> {
    let link = vocab::is_counterpart_material_entity();
    let represents = vocab::represents();
    let sp = vocab::synchronizing_process();
    let participates = vocab::participates_in();
    let mut out = Vec::new();
    let links: Vec<_> = graph.with_predicate(&link).cloned().collect();
    for a in links {
        let x = &a.subject;
        let Node::Term(y) = &a.object else {
            continue;
        };
        let mut missing = Vec::new();
        if !cache.has_type(graph, x, &vocab::digital_twin_instance()) {
            missing.push(format!("{x} is not a {}", vocab::digital_twin_instance()));
        }
        if !graph
            .outgoing_with(x, &represents)
            .any(|r| r.object.as_term() == Some(y))
        {
            missing.push(format!("{x} does not represent {y}"));
        }
        if !cache.has_type(graph, y, &vocab::material_entity()) {
            missing.push(format!("{y} is not a {}", vocab::material_entity()));
        }
        let shared = graph
            .outgoing_with(x, &participates)
            .filter_map(|p| p.object.as_term())
            .any(|s| {
                cache.has_type(graph, s, &sp)
                    && graph
                        .outgoing_with(y, &participates)
                        .any(|q| q.object.as_term() == Some(s))
            });
        if !shared {
            missing.push(format!("{x} and {y} share no {sp}"));
        }
        if !missing.is_empty() {
            out.push((x.clone(), format!("unsupported {link} {y}: {}", missing.join("; "))));
        }
    }
    out
}

fn check_part_replacement(graph: &Graph, cache: &mut TypeCache) -> Vec<(Term, String)> {
    let participates = vocab::participates_in();
    let quality_change = vocab::quality_change();
    let mut out = Vec::new();
    for change in instances_of(graph, cache, &vocab::part_replacement()) {
        for bearer in participants(graph, &change) {
            let coupled = graph
                .outgoing_with(&bearer, &participates)
                .filter_map(|a| a.object.as_term())
                .any(|c| cache.has_type(graph, c, &quality_change));
            if !coupled {
                out.push((
                    change.clone(),
                    format!("part replacement on {bearer} without a quality change of {bearer}"),
                ));
            }
        }
    }
    out
}

fn check_proper_parthood(graph: &Graph, _cache: &mut TypeCache) -> Vec<(Term, String)> {
    let proper = vocab::has_proper_continuant_part();
    let mut edges: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for a in graph.with_predicate(&proper) {
        if let Node::Term(o) = &a.object {
            edges.entry(a.subject.clone()).or_default().insert(o.clone());
        }
    }
    let mut out = Vec::new();
    for start in edges.keys() {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Term> = edges[start].iter().collect();
        let mut cyclic = false;
        while let Some(n) = stack.pop() {
            if n == start {
                cyclic = true;
                break;
            }
            if seen.insert(n) {
                if let Some(next) = edges.get(n) {
                    stack.extend(next.iter());
                }
            }
        }
        if cyclic {
            out.push((
                start.clone(),
                format!("{start} is a proper part of itself via {proper}"),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Assertion;
    use crate::schema::builtin_schema;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_schema_is_clean() {
        assert!(validate(&builtin_schema()).is_empty());
    }

    #[test]
    fn represents_needs_content_subject() {
        let mut g = builtin_schema();
        g.assert(Assertion::type_of(t("ex:rock1"), vocab::material_entity()))
            .unwrap();
        g.assert(Assertion::new(t("ex:rock1"), vocab::represents(), t("ex:rock2")))
            .unwrap();
        let report = validate(&g);
        assert_eq!(report.errors(), 1, "{report:?}");
        let v = &report.violations[0];
        assert_eq!((v.constraint, &v.focus), (ConstraintId::C1, &t("ex:rock1")));
    }

    #[test]
    fn literal_range_mismatch() {
        let mut g = builtin_schema();
        g.assert(Assertion::new(t("ex:d"), vocab::has_value(), t("ex:notALiteral")))
            .unwrap();
        g.assert(Assertion::new(t("ex:x"), vocab::participates_in(), Node::string("p")))
            .unwrap();
        let report = validate(&g);
        let c1: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.constraint == ConstraintId::C1)
            .map(|v| v.focus.clone())
            .collect();
        assert_eq!(c1, vec![t("ex:d"), t("ex:x")]);
    }

    #[test]
    fn sync_process_without_twin() {
        let mut g = builtin_schema();
        g.assert(Assertion::type_of(t("ex:s"), vocab::synchronizing_process()))
            .unwrap();
        let report = validate(&g);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].constraint, ConstraintId::C3);
    }

    #[test]
    fn proper_parthood_cycle() {
        let mut g = builtin_schema();
        let p = vocab::has_proper_continuant_part();
        g.assert(Assertion::new(t("ex:a"), p.clone(), t("ex:b"))).unwrap();
        g.assert(Assertion::new(t("ex:b"), p.clone(), t("ex:a"))).unwrap();
        g.assert(Assertion::new(t("ex:c"), p.clone(), t("ex:c"))).unwrap();
        g.assert(Assertion::new(t("ex:c"), p, t("ex:d"))).unwrap();
        let focus: Vec<_> = validate(&g)
            .violations
            .into_iter()
            .filter(|v| v.constraint == ConstraintId::C6)
            .map(|v| v.focus)
            .collect();
        assert_eq!(focus, vec![t("ex:a"), t("ex:b"), t("ex:c")]);
    }

    #[test]
    fn unsupported_counterpart_link() {
        let mut g = builtin_schema();
        g.assert(Assertion::type_of(t("ex:dt"), vocab::digital_twin_instance()))
            .unwrap();
        g.assert(Assertion::new(
            t("ex:dt"),
            vocab::is_counterpart_material_entity(),
            t("ex:thing"),
        ))
        .unwrap();
        let c4: Vec<_> = validate(&g)
            .violations
            .into_iter()
            .filter(|v| v.constraint == ConstraintId::C4)
            .collect();
        assert_eq!(c4.len(), 1);
        assert_eq!(c4[0].focus, t("ex:dt"));
    }
}
