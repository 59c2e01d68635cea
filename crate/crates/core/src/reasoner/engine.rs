//! Semi-naive evaluation with per-fact derivation records.
//!
//! Round `k` only joins combinations that use at least one fact first derived
//! in round `k - 1`, and facts derived during a round become visible only in
//! the next one. A fact therefore appears in the earliest round that admits a
//! derivation, and its recorded derivation has minimal depth.
//!
//! Termination: every rule concludes an assertion whose subject, object and
//! interval already occur in the store, and whose predicate or class comes
//! from the finite schema. The set of such assertions is finite, so the
//! store stops growing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Range;

use super::arrangement::{check_arrangement, ArrangementSpec};
use super::rules::{Atom, Rule, Slot, VARS};
use crate::graph::{Assertion, Graph, Provenance, RuleId};
use crate::schema::vocab;
use crate::term::{Node, Term, TimeInterval};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Derivation {
    pub rule: RuleId,
    pub premises: Vec<usize>,
}

#[derive(Default)]
pub(crate) struct Store {
    pub facts: Vec<Assertion>,
    /// `None` for input facts.
    pub derivations: Vec<Option<Derivation>>,
    index: HashMap<Assertion, usize>,
    by_pred: HashMap<Term, Vec<usize>>,
    by_subject: HashMap<(Term, Term), Vec<usize>>,
    by_object: HashMap<(Term, Node), Vec<usize>>,
}

impl Store {
    fn push(&mut self, fact: Assertion, derivation: Option<Derivation>) -> usize {
        if let Some(&id) = self.index.get(&fact) {
            return id;
        }
        let id = self.facts.len();
        self.by_pred.entry(fact.predicate.clone()).or_default().push(id);
        self.by_subject
            .entry((fact.predicate.clone(), fact.subject.clone()))
            .or_default()
            .push(id);
        self.by_object
            .entry((fact.predicate.clone(), fact.object.clone()))
            .or_default()
            .push(id);
        self.index.insert(fact.clone(), id);
        self.facts.push(fact);
        self.derivations.push(derivation);
        id
    }

    pub fn id_of(&self, fact: &Assertion) -> Option<usize> {
        self.index.get(fact).copied()
    }

    fn by_subject(&self, predicate: &Term, subject: &Term) -> &[usize] {
        self.by_subject
            .get(&(predicate.clone(), subject.clone()))
            .map_or(&[], Vec::as_slice)
    }
}

/// Class to itself and all its declared subclasses.
pub(crate) type Descendants = HashMap<Term, BTreeSet<Term>>;

pub(crate) fn descendants(graph: &Graph) -> Descendants {
    let mut out = Descendants::new();
    for class in graph.classes() {
        for ancestor in graph.ancestors(&class.id) {
            out.entry(ancestor).or_default().insert(class.id.clone());
        }
    }
    out
}

/// For `?v a C` premises: the classes a matching typing may use.
fn class_filter<'a>(atom: &Atom, desc: &'a Descendants) -> Option<&'a BTreeSet<Term>> {
    static EMPTY: BTreeSet<Term> = BTreeSet::new();
    match &atom.object {
        Slot::Const(Node::Term(c)) if atom.predicate == vocab::type_of() => Some(desc.get(c).unwrap_or(&EMPTY)),
        _ => None,
    }
}

impl Store {
    fn candidates(&self, atom: &Atom, bindings: &[Option<Node>], desc: &Descendants) -> Vec<usize> {
        let bound = |slot: &Slot| match slot {
            Slot::Const(n) => Some(n.clone()),
            Slot::Var(i) => bindings[*i].clone(),
        };
        let subject = bound(&atom.subject);
        if let Some(classes) = class_filter(atom, desc) {
            let mut ids: Vec<usize> = match subject {
                Some(Node::Term(s)) => self.by_subject(&atom.predicate, &s).to_vec(),
                Some(Node::Literal(_)) => Vec::new(),
                None => classes
                    .iter()
                    .filter_map(|c| self.by_object.get(&(atom.predicate.clone(), Node::Term(c.clone()))))
                    .flatten()
                    .copied()
                    .collect(),
            };
            ids.retain(|&id| self.facts[id].object.as_term().is_some_and(|c| classes.contains(c)));
            ids.sort_unstable();
            return ids;
        }
        let hit = match (subject, bound(&atom.object)) {
            (Some(Node::Term(s)), _) => self.by_subject.get(&(atom.predicate.clone(), s)),
            (Some(Node::Literal(_)), _) => None,
            (None, Some(o)) => self.by_object.get(&(atom.predicate.clone(), o)),
            (None, None) => self.by_pred.get(&atom.predicate),
        };
        hit.map_or_else(Vec::new, Clone::clone)
    }
}

fn bind(slot: &Slot, value: &Node, bindings: &mut [Option<Node>], set: &mut Vec<usize>) -> bool {
    match slot {
        Slot::Const(c) => c == value,
        Slot::Var(i) => match &bindings[*i] {
            Some(b) => b == value,
            None => {
                bindings[*i] = Some(value.clone());
                set.push(*i);
                true
            }
        },
    }
}

fn resolve(slot: &Slot, bindings: &[Option<Node>]) -> Option<Node> {
    match slot {
        Slot::Const(n) => Some(n.clone()),
        Slot::Var(i) => bindings[*i].clone(),
    }
}

/// Premise visiting order after the seed: greedily prefer premises sharing
/// an already-bound variable, so lookups hit the subject/object indexes.
fn join_order(rule: &Rule, seed: usize) -> Vec<usize> {
    let vars_of = |a: &Atom| {
        [&a.subject, &a.object]
            .into_iter()
            .filter_map(|s| match s {
                Slot::Var(i) => Some(*i),
                Slot::Const(_) => None,
            })
            .collect::<Vec<_>>()
    };
    let mut bound = [false; VARS];
    let mut order = vec![seed];
    for v in vars_of(&rule.premises[seed]) {
        bound[v] = true;
    }
    let mut rest: Vec<usize> = (0..rule.premises.len()).filter(|&i| i != seed).collect();
    while !rest.is_empty() {
        let pick = rest
            .iter()
            .position(|&i| vars_of(&rule.premises[i]).iter().any(|&v| bound[v]))
            .unwrap_or(0);
        let i = rest.remove(pick);
        for v in vars_of(&rule.premises[i]) {
            bound[v] = true;
        }
        order.push(i);
    }
    order
}

type Emit<'e> = dyn FnMut(&[Option<Node>], &[usize]) + 'e;

struct Join<'a> {
    store: &'a Store,
    desc: &'a Descendants,
    rule: &'a Rule,
    order: Vec<usize>,
    seed: usize,
    delta: Range<usize>,
}

impl Join<'_> {
    fn allowed(&self, premise: usize, id: usize) -> bool {
        use std::cmp::Ordering::*;
        match premise.cmp(&self.seed) {
            Less => id < self.delta.start,
            Equal => self.delta.contains(&id),
            Greater => id < self.delta.end,
        }
    }

    fn run(&self, depth: usize, bindings: &mut [Option<Node>], matched: &mut [usize], emit: &mut Emit) {
        if depth == self.order.len() {
            emit(bindings, matched);
            return;
        }
        let p = self.order[depth];
        let atom = &self.rule.premises[p];
        let filtered = class_filter(atom, self.desc).is_some();
        for id in self.store.candidates(atom, bindings, self.desc) {
            if !self.allowed(p, id) {
                continue;
            }
            let fact = &self.store.facts[id];
            let mut set = Vec::new();
            let ok = bind(&atom.subject, &Node::Term(fact.subject.clone()), bindings, &mut set)
                && (filtered || bind(&atom.object, &fact.object, bindings, &mut set));
            if ok {
                matched[p] = id;
                self.run(depth + 1, bindings, matched, emit);
            }
            for v in set {
                bindings[v] = None;
            }
        }
    }
}

fn conclude(rule: &Rule, store: &Store, bindings: &[Option<Node>], matched: &[usize]) -> Option<Assertion> {
    if let Some((a, b)) = rule.overlap {
        let interval = |p: usize| {
            store.facts[matched[p]]
                .interval
                .clone()
                .unwrap_or_else(TimeInterval::unbounded)
        };
        if !interval(a).overlaps(&interval(b)) {
            return None;
        }
    }
    let Node::Term(subject) = resolve(&rule.conclusion.subject, bindings)? else {
        return None;
    };
    let object = resolve(&rule.conclusion.object, bindings)?;
    Some(Assertion {
        subject,
        predicate: rule.conclusion.predicate.clone(),
        object,
        interval: rule
            .inherit_interval
            .and_then(|p| store.facts[matched[p]].interval.clone()),
    })
}

type Pending = BTreeMap<Assertion, Derivation>;

/// Fires every rule once over `store`, using only combinations that touch `delta`.
fn round(
    store: &Store,
    desc: &Descendants,
    view: &Graph,
    rules: &[Rule],
    arrangements: &BTreeMap<Term, ArrangementSpec>,
    delta: Range<usize>,
) -> Pending {
    let mut pending = Pending::new();
    for rule in rules {
        for seed in 0..rule.premises.len() {
            let join = Join {
                store,
                desc,
                rule,
                order: join_order(rule, seed),
                seed,
                delta: delta.clone(),
            };
            let mut bindings = vec![None; VARS];
            let mut matched = vec![0; rule.premises.len()];
            join.run(0, &mut bindings, &mut matched, &mut |b, m| {
                if let Some(fact) = conclude(rule, store, b, m) {
                    if store.id_of(&fact).is_none() {
                        pending.entry(fact).or_insert_with(|| Derivation {
                            rule: rule.id,
                            premises: m.to_vec(),
                        });
                    }
                }
            });
        }
    }
    if !arrangements.is_empty() {
        for (fact, d) in prescription_round(store, view, arrangements, delta.end) {
            pending.entry(fact).or_insert(d);
        }
    }
    pending
}

/// R9: prototypes whose prescribed arrangement is satisfied by something
/// they represent count as instances.
fn prescription_round(
    store: &Store,
    view: &Graph,
    arrangements: &BTreeMap<Term, ArrangementSpec>,
    limit: usize,
) -> Pending {
    let type_of = vocab::type_of();
    let dtp = vocab::digital_twin_prototype();
    let represents = vocab::represents();
    let mut out = Pending::new();
    let prescriptions = store
        .by_pred
        .get(&vocab::prescribes_arrangement())
        .map_or(&[][..], Vec::as_slice);
    for &pid in prescriptions.iter().filter(|&&id| id < limit) {
        let prescription = &store.facts[pid];
        let x = &prescription.subject;
        let Some(spec) = prescription.object.as_term().and_then(|a| arrangements.get(a)) else {
            continue;
        };
        let conclusion = Assertion::type_of(x.clone(), vocab::digital_twin_instance());
        if store.id_of(&conclusion).is_some() || out.contains_key(&conclusion) {
            continue;
        }
        let typing = store
            .by_subject(&type_of, x)
            .iter()
            .copied()
            .filter(|&id| id < limit)
            .find(|&id| {
                store.facts[id]
                    .object
                    .as_term()
                    .is_some_and(|c| view.ancestors(c).contains(&dtp))
            });
        let Some(typing) = typing else {
            continue;
        };
        let links = store
            .by_subject(&represents, x)
            .iter()
            .copied()
            .filter(|&id| id < limit);
        for rid in links {
            let Node::Term(y) = &store.facts[rid].object else {
                continue;
            };
            let Ok(result) = check_arrangement(view, y, spec) else {
                continue;
            };
            if !result.satisfied {
                continue;
            }
            let mut premises = vec![typing, pid, rid];
            premises.extend(result.support.iter().filter_map(|a| store.id_of(a)));
            out.insert(
                conclusion,
                Derivation {
                    rule: RuleId::R9,
                    premises,
                },
            );
            break;
        }
    }
    out
}

pub(crate) struct Saturation {
    pub store: Store,
    pub graph: Graph,
}

/// Runs to fixpoint. The returned graph keeps the input's provenance and
/// marks new facts with the rule that first derived them.
pub(crate) fn saturate(graph: &Graph, rules: &[Rule], arrangements: &BTreeMap<Term, ArrangementSpec>) -> Saturation {
    let mut store = Store::default();
    for (a, _) in graph.assertions() {
        store.push(a.clone(), None);
    }
    let mut view = graph.clone();
    let desc = descendants(graph);
    let mut delta = 0..store.facts.len();
    while !delta.is_empty() {
        let pending = round(&store, &desc, &view, rules, arrangements, delta.clone());
        let start = store.facts.len();
        for (fact, d) in pending {
            let rule = d.rule;
            view.insert(fact.clone(), Provenance::Inferred(rule))
                .expect("conclusions use schema vocabulary");
            store.push(fact, Some(d));
        }
        delta = start..store.facts.len();
    }
    Saturation { store, graph: view }
}

/// Conclusions of a single round over all of `graph` that are not already in
/// it, for replaying derivations.
pub(crate) fn fire_once(
    graph: &Graph,
    rules: &[Rule],
    arrangements: &BTreeMap<Term, ArrangementSpec>,
) -> Vec<Assertion> {
    let mut store = Store::default();
    for (a, _) in graph.assertions() {
        store.push(a.clone(), None);
    }
    let all = 0..store.facts.len();
    round(&store, &descendants(graph), graph, rules, arrangements, all)
        .into_keys()
        .collect()
}
