//! Arrangement specs: small typed patterns a prototype prescribes, checked
//! against the graph by homomorphism search.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{Assertion, Graph};
use crate::parser::{parse_raw, ParseError, RawObject, RawSubject};
use crate::schema::vocab;
use crate::term::{Literal, Node, Term};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpecEdge {
    /// `whole hasProperContinuantPart part`, asserted directly.
    ProperPart { whole: String, part: String },
    /// `bearer` bears some quality whose type is subsumed by `quality_type`.
    QualityOfType { bearer: String, quality_type: Term },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrangementSpec {
    pub id: Term,
    pub root: String,
    /// Variable name to required class.
    pub variables: BTreeMap<String, Term>,
    pub edges: Vec<SpecEdge>,
    /// Require an injective witness.
    pub all_distinct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionResult {
    pub satisfied: bool,
    pub witness: Option<BTreeMap<String, Term>>,
    /// Assertions the witness relies on: one typing per variable and the
    /// assertions realizing each edge.
    pub support: Vec<Assertion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("{0} does not occur in the graph")]
    UnknownIndividual(Term),
    #[error("malformed arrangement spec: {message}")]
    MalformedSpec { line: Option<usize>, message: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn malformed(line: Option<usize>, message: impl Into<String>) -> ArrangementError {
    let message = message.into();
    let message = match line {
        Some(l) => format!("line {l}: {message}"),
        None => message,
    };
    ArrangementError::MalformedSpec { line, message }
}

impl ArrangementSpec {
    pub fn new(id: Term, root: impl Into<String>, root_class: Term) -> Self {
        let root = root.into();
        ArrangementSpec {
            id,
            variables: BTreeMap::from([(root.clone(), root_class)]),
            root,
            edges: Vec::new(),
            all_distinct: false,
        }
    }

    pub fn variable(mut self, name: impl Into<String>, class: Term) -> Self {
        self.variables.insert(name.into(), class);
        self
    }

    pub fn proper_part(mut self, whole: impl Into<String>, part: impl Into<String>) -> Self {
        self.edges.push(SpecEdge::ProperPart {
            whole: whole.into(),
            part: part.into(),
        });
        self
    }

    pub fn quality_of_type(mut self, bearer: impl Into<String>, quality_type: Term) -> Self {
        self.edges.push(SpecEdge::QualityOfType {
            bearer: bearer.into(),
            quality_type,
        });
        self
    }

    pub fn distinct(mut self) -> Self {
        self.all_distinct = true;
        self
    }

    /// Structural checks plus class lookups against `graph`'s schema.
    pub fn check_wellformed(&self, graph: &Graph) -> Result<(), ArrangementError> {
        if !self.variables.contains_key(&self.root) {
            return Err(malformed(None, format!("root variable ?{} has no class", self.root)));
        }
        for (var, class) in &self.variables {
            if !graph.has_class(class) {
                return Err(malformed(None, format!("?{var} requires unknown class {class}")));
            }
        }
        for edge in &self.edges {
            let vars: Vec<&String> = match edge {
                SpecEdge::ProperPart { whole, part } => vec![whole, part],
                SpecEdge::QualityOfType { bearer, quality_type } => {
                    if !graph.has_class(quality_type) {
                        return Err(malformed(None, format!("unknown quality type {quality_type}")));
                    }
                    vec![bearer]
                }
            };
            for v in vars {
                if !self.variables.contains_key(v) {
                    return Err(malformed(None, format!("?{v} is used in an edge but has no class")));
                }
            }
        }
        Ok(())
    }

    /// Root first, then breadth-first along part edges, then the rest.
    fn search_order(&self) -> Vec<String> {
        let mut order = vec![self.root.clone()];
        let mut seen: BTreeSet<&String> = BTreeSet::from([&self.root]);
        let mut queue = VecDeque::from([&self.root]);
        while let Some(v) = queue.pop_front() {
            for edge in &self.edges {
                if let SpecEdge::ProperPart { whole, part } = edge {
                    let next = if whole == v {
                        part
                    } else if part == v {
                        whole
                    } else {
                        continue;
                    };
                    if seen.insert(next) {
                        order.push(next.clone());
                        queue.push_back(next);
                    }
                }
            }
        }
        for v in self.variables.keys() {
            if seen.insert(v) {
                order.push(v.clone());
            }
        }
        order
    }
}

/// Searches for a witness mapping the root to `individual`. The first witness
/// in candidate order is returned, so results are deterministic.
pub fn check_arrangement(
    graph: &Graph,
    individual: &Term,
    spec: &ArrangementSpec,
) -> Result<SatisfactionResult, ArrangementError> {
    spec.check_wellformed(graph)?;
    if !graph.mentions(individual) {
        return Err(ArrangementError::UnknownIndividual(individual.clone()));
    }
    let order = spec.search_order();
    let individuals = graph.individuals();
    let candidates: Vec<Vec<Term>> = order
        .iter()
        .map(|v| {
            let class = &spec.variables[v];
            if *v == spec.root {
                vec![individual.clone()]
                    .into_iter()
                    .filter(|i| graph.has_type(i, class))
                    .collect()
            } else {
                individuals
                    .iter()
                    .filter(|i| graph.has_type(i, class))
                    .cloned()
                    .collect()
            }
        })
        .collect();

    let proper = vocab::has_proper_continuant_part();
    let parts: BTreeSet<(Term, Term)> = graph
        .with_predicate(&proper)
        .filter_map(|a| a.object.as_term().map(|o| (a.subject.clone(), o.clone())))
        .collect();
    let mut bearers: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for edge in &spec.edges {
        if let SpecEdge::QualityOfType { quality_type, .. } = edge {
            bearers
                .entry(quality_type.clone())
                .or_insert_with(|| quality_bearers(graph, quality_type));
        }
    }

    let position: BTreeMap<&String, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
    // edges become checkable once their last endpoint is assigned
    let mut checks: Vec<Vec<&SpecEdge>> = vec![Vec::new(); order.len()];
    for edge in &spec.edges {
        let at = match edge {
            SpecEdge::ProperPart { whole, part } => position[whole].max(position[part]),
            SpecEdge::QualityOfType { bearer, .. } => position[bearer],
        };
        checks[at].push(edge);
    }

    let search = Search {
        order: &order,
        position: &position,
        candidates: &candidates,
        checks: &checks,
        parts: &parts,
        bearers: &bearers,
        all_distinct: spec.all_distinct,
    };
    let mut assignment = Vec::with_capacity(order.len());
    if !search.extend(&mut assignment) {
        return Ok(SatisfactionResult {
            satisfied: false,
            witness: None,
            support: Vec::new(),
        });
    }
    let witness: BTreeMap<String, Term> = order.iter().cloned().zip(assignment.into_iter().cloned()).collect();
    let support = support_for(graph, spec, &witness);
    Ok(SatisfactionResult {
        satisfied: true,
        witness: Some(witness),
        support,
    })
}

fn quality_bearers(graph: &Graph, quality_type: &Term) -> BTreeSet<Term> {
    let bears = vocab::bears_quality();
    graph
        .with_predicate(&bears)
        .filter(|a| a.object.as_term().is_some_and(|q| graph.has_type(q, quality_type)))
        .map(|a| a.subject.clone())
        .collect()
}

struct Search<'a> {
    order: &'a [String],
    position: &'a BTreeMap<&'a String, usize>,
    candidates: &'a [Vec<Term>],
    checks: &'a [Vec<&'a SpecEdge>],
    parts: &'a BTreeSet<(Term, Term)>,
    bearers: &'a BTreeMap<Term, BTreeSet<Term>>,
    all_distinct: bool,
}

impl<'a> Search<'a> {
    fn extend(&self, assignment: &mut Vec<&'a Term>) -> bool {
        let depth = assignment.len();
        if depth == self.order.len() {
            return true;
        }
        for cand in &self.candidates[depth] {
            if self.all_distinct && assignment.contains(&cand) {
                continue;
            }
            assignment.push(cand);
            if self.edges_hold(depth, assignment) && self.extend(assignment) {
                return true;
            }
            assignment.pop();
        }
        false
    }

    fn edges_hold(&self, depth: usize, assignment: &[&Term]) -> bool {
        self.checks[depth].iter().all(|edge| match edge {
            SpecEdge::ProperPart { whole, part } => {
                let w = assignment[self.position[whole]].clone();
                let p = assignment[self.position[part]].clone();
                self.parts.contains(&(w, p))
            }
            SpecEdge::QualityOfType { bearer, quality_type } => {
                self.bearers[quality_type].contains(assignment[self.position[bearer]])
            }
        })
    }
}

fn support_for(graph: &Graph, spec: &ArrangementSpec, witness: &BTreeMap<String, Term>) -> Vec<Assertion> {
    let type_of = vocab::type_of();
    let bears = vocab::bears_quality();
    let proper = vocab::has_proper_continuant_part();
    let mut out = Vec::new();
    let typing = |individual: &Term, class: &Term| {
        graph
            .outgoing_with(individual, &type_of)
            .find(|a| a.object.as_term() == Some(class))
            .or_else(|| {
                graph
                    .outgoing_with(individual, &type_of)
                    .find(|a| a.object.as_term().is_some_and(|c| graph.ancestors(c).contains(class)))
            })
            .cloned()
    };
    for (var, class) in &spec.variables {
        out.extend(typing(&witness[var], class));
    }
    for edge in &spec.edges {
        match edge {
            SpecEdge::ProperPart { whole, part } => {
                let (w, p) = (&witness[whole], &witness[part]);
                out.extend(
                    graph
                        .outgoing_with(w, &proper)
                        .find(|a| a.object.as_term() == Some(p))
                        .cloned(),
                );
            }
            SpecEdge::QualityOfType { bearer, quality_type } => {
                let b = &witness[bearer];
                let found = graph
                    .outgoing_with(b, &bears)
                    .filter_map(|a| a.object.as_term().map(|q| (a, q)))
                    .find(|(_, q)| graph.has_type(q, quality_type));
                if let Some((a, q)) = found {
                    out.push(a.clone());
                    out.extend(typing(q, quality_type));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Reads an arrangement spec file.
///
/// ```text
/// ex:vehicleLayout a dto:ArrangementSpec ;
///     dto:rootVariable ?v ;
///     dto:allDistinct "true" .
/// ?v a cco:Artifact ; bfo:hasProperContinuantPart ?e .
/// ?e a ex:Engine ; dto:bearsQualityOfType dto:Temperature .
/// ```
pub fn parse_arrangement_spec(text: &str) -> Result<ArrangementSpec, ArrangementError> {
    let raw = parse_raw(text, true)?;
    let type_of = vocab::type_of();
    let mut id: Option<Term> = None;
    let mut root: Option<String> = None;
    let mut all_distinct = false;
    let mut variables: BTreeMap<String, Term> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut header_subjects: Vec<(Term, usize)> = Vec::new();

    for s in raw.statements {
        let line = Some(s.line);
        if s.interval.is_some() {
            return Err(malformed(line, "intervals are not allowed in arrangement specs"));
        }
        match (&s.subject, &s.object) {
            (RawSubject::Term(t), RawObject::Node(Node::Term(c)))
                if s.predicate == type_of && *c == vocab::arrangement_spec() =>
            {
                if id.as_ref().is_some_and(|old| old != t) {
                    return Err(malformed(line, "more than one arrangement spec in file"));
                }
                id = Some(t.clone());
            }
            (RawSubject::Term(t), RawObject::Var(v)) if s.predicate == vocab::root_variable() => {
                if root.as_ref().is_some_and(|old| old != v) {
                    return Err(malformed(line, "root variable declared twice"));
                }
                header_subjects.push((t.clone(), s.line));
                root = Some(v.clone());
            }
            (RawSubject::Term(t), RawObject::Node(Node::Literal(Literal::String(flag))))
                if s.predicate == vocab::all_distinct() =>
            {
                header_subjects.push((t.clone(), s.line));
                all_distinct = match flag.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(malformed(
                            line,
                            format!("allDistinct must be \"true\" or \"false\", got {flag:?}"),
                        ))
                    }
                };
            }
            (RawSubject::Var(v), RawObject::Node(Node::Term(c))) if s.predicate == type_of => {
                if let Some(old) = variables.insert(v.clone(), c.clone()) {
                    if old != *c {
                        return Err(malformed(line, format!("?{v} is given two classes")));
                    }
                }
            }
            (RawSubject::Var(w), RawObject::Var(p)) if s.predicate == vocab::has_proper_continuant_part() => {
                edges.push(SpecEdge::ProperPart {
                    whole: w.clone(),
                    part: p.clone(),
                });
            }
            (RawSubject::Var(b), RawObject::Node(Node::Term(q))) if s.predicate == vocab::bears_quality_of_type() => {
                edges.push(SpecEdge::QualityOfType {
                    bearer: b.clone(),
                    quality_type: q.clone(),
                });
            }
            _ => {
                return Err(malformed(
                    line,
                    format!("unsupported statement with predicate {}", s.predicate),
                ))
            }
        }
    }

    let id = id.ok_or_else(|| malformed(None, format!("no subject typed {}", vocab::arrangement_spec())))?;
    if let Some((t, line)) = header_subjects.iter().find(|(t, _)| *t != id) {
        return Err(malformed(Some(*line), format!("{t} is not the declared spec {id}")));
    }
    let root = root.ok_or_else(|| malformed(None, "missing dto:rootVariable"))?;
    if !variables.contains_key(&root) {
        return Err(malformed(None, format!("root variable ?{root} has no class")));
    }
    for edge in &edges {
        let vars: Vec<&String> = match edge {
            SpecEdge::ProperPart { whole, part } => vec![whole, part],
            SpecEdge::QualityOfType { bearer, .. } => vec![bearer],
        };
        if let Some(v) = vars.into_iter().find(|v| !variables.contains_key(*v)) {
            return Err(malformed(None, format!("?{v} is used in an edge but has no class")));
        }
    }
    Ok(ArrangementSpec {
        id,
        root,
        variables,
        edges,
        all_distinct,
    })
}
