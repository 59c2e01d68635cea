//! Granular partitions: cell trees projecting onto the parthood hierarchy of
//! material entities, and fidelity as coverage ordered by inclusion.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::graph::Graph;
use crate::schema::vocab;
use crate::term::{Node, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GranularityError {
    #[error("{0} does not occur in the graph")]
    UnknownIndividual(Term),
    #[error("{0} is not a material entity")]
    NotMaterialEntity(Term),
    #[error("{part} is not a proper part of {whole}")]
    NotAProperPart { whole: Term, part: Term },
    #[error("no cell with id `{0}`")]
    UnknownCell(String),
    #[error("cell `{parent}` already has a child projecting onto {target}")]
    DuplicateSiblingTarget { parent: String, target: Term },
    #[error("cell id `{0}` is used twice")]
    DuplicateCellId(String),
    #[error("{0} is not a quality type")]
    NotAQualityType(Term),
    #[error("partition is stale: {0} no longer occurs in the graph")]
    StalePartition(Term),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: String,
    pub target: Term,
    pub tracked: BTreeSet<Term>,
    pub children: Vec<Cell>,
}

impl Cell {
    fn leaf(id: String, target: Term, tracked: BTreeSet<Term>) -> Self {
        Cell {
            id,
            target,
            tracked,
            children: Vec::new(),
        }
    }

    /// Pre-order traversal.
    pub fn cells(&self) -> Vec<&Cell> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.cells());
        }
        out
    }

    fn find_mut(&mut self, id: &str) -> Option<&mut Cell> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    Higher,
    Lower,
    Equal,
    Incomparable,
}

impl fmt::Display for Fidelity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fidelity::Higher => "Higher",
            Fidelity::Lower => "Lower",
            Fidelity::Equal => "Equal",
            Fidelity::Incomparable => "Incomparable",
        })
    }
}

/// Pairs of (individual, information type). Part presence is recorded with
/// the `dto:PartPresence` marker.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage {
    pub items: BTreeSet<(Term, Term)>,
}

impl Coverage {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, individual: &Term, info: &Term) -> bool {
        self.items.contains(&(individual.clone(), info.clone()))
    }

    /// Set-inclusion comparison; cardinality plays no part.
    pub fn compare(&self, other: &Coverage) -> Fidelity {
        match (
            self.items.is_superset(&other.items),
            other.items.is_superset(&self.items),
        ) {
            (true, true) => Fidelity::Equal,
            (true, false) => Fidelity::Higher,
            (false, true) => Fidelity::Lower,
            (false, false) => Fidelity::Incomparable,
        }
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (individual, info) in &self.items {
            writeln!(f, "{individual} {info}")?;
        }
        Ok(())
    }
}

/// Whether `part` is reachable from `whole` over asserted proper parthood.
pub fn is_proper_part(graph: &Graph, whole: &Term, part: &Term) -> bool {
    let proper = vocab::has_proper_continuant_part();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([whole.clone()]);
    while let Some(w) = queue.pop_front() {
        for a in graph.outgoing_with(&w, &proper) {
            if let Node::Term(p) = &a.object {
                if p == part {
                    return true;
                }
                if seen.insert(p.clone()) {
                    queue.push_back(p.clone());
                }
            }
        }
    }
    false
}

fn check_target(graph: &Graph, target: &Term) -> Result<(), GranularityError> {
    if !graph.mentions(target) {
        return Err(GranularityError::UnknownIndividual(target.clone()));
    }
    if !graph.has_type(target, &vocab::material_entity()) {
        return Err(GranularityError::NotMaterialEntity(target.clone()));
    }
    Ok(())
}

fn check_tracked(graph: &Graph, tracked: &BTreeSet<Term>) -> Result<(), GranularityError> {
    let quality = vocab::quality();
    match tracked.iter().find(|q| !graph.ancestors(q).contains(&quality)) {
        Some(q) => Err(GranularityError::NotAQualityType(q.clone())),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub root: Cell,
}

impl Partition {
    /// A single cell projecting onto `root_target`.
    pub fn create(graph: &Graph, root_target: &Term, tracked: BTreeSet<Term>) -> Result<Self, GranularityError> {
        check_target(graph, root_target)?;
        check_tracked(graph, &tracked)?;
        Ok(Partition {
            root: Cell::leaf("c0".into(), root_target.clone(), tracked),
        })
    }

    pub fn cells(&self) -> Vec<&Cell> {
        self.root.cells()
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells().into_iter().find(|c| c.id == id)
    }

    /// Smallest `cN` not yet used as a cell id.
    fn fresh_id(&self) -> String {
        let used: BTreeSet<&str> = self.cells().into_iter().map(|c| c.id.as_str()).collect();
        (0..)
            .map(|n| format!("c{n}"))
            .find(|id| !used.contains(id.as_str()))
            .expect("unbounded id space")
    }

    /// Adds a cell for `new_target` under `parent_id`. The root is untouched.
    pub fn refine(
        &self,
        graph: &Graph,
        parent_id: &str,
        new_target: &Term,
        tracked: BTreeSet<Term>,
    ) -> Result<Self, GranularityError> {
        let parent = self
            .cell(parent_id)
            .ok_or_else(|| GranularityError::UnknownCell(parent_id.to_string()))?;
        check_target(graph, new_target)?;
        check_tracked(graph, &tracked)?;
        if !is_proper_part(graph, &parent.target, new_target) {
            return Err(GranularityError::NotAProperPart {
                whole: parent.target.clone(),
                part: new_target.clone(),
            });
        }
        if parent.children.iter().any(|c| &c.target == new_target) {
            return Err(GranularityError::DuplicateSiblingTarget {
                parent: parent_id.to_string(),
                target: new_target.clone(),
            });
        }
        let id = self.fresh_id();
        let mut next = self.clone();
        let parent = next.root.find_mut(parent_id).expect("parent located above");
        parent.children.push(Cell::leaf(id, new_target.clone(), tracked));
        Ok(next)
    }

    /// Puts a new root over `new_root_target`, with the old root as its child.
    pub fn extend_root(
        &self,
        graph: &Graph,
        new_root_target: &Term,
        tracked: BTreeSet<Term>,
    ) -> Result<Self, GranularityError> {
        check_target(graph, new_root_target)?;
        check_tracked(graph, &tracked)?;
        if !is_proper_part(graph, new_root_target, &self.root.target) {
            return Err(GranularityError::NotAProperPart {
                whole: new_root_target.clone(),
                part: self.root.target.clone(),
            });
        }
        let mut root = Cell::leaf(self.fresh_id(), new_root_target.clone(), tracked);
        root.children.push(self.root.clone());
        Ok(Partition { root })
    }

    /// Checks every partition invariant against `graph`.
    pub fn check(&self, graph: &Graph) -> Result<(), GranularityError> {
        let mut ids = BTreeSet::new();
        for cell in self.cells() {
            if !ids.insert(cell.id.as_str()) {
                return Err(GranularityError::DuplicateCellId(cell.id.clone()));
            }
            if !graph.mentions(&cell.target) {
                return Err(GranularityError::StalePartition(cell.target.clone()));
            }
            check_target(graph, &cell.target)?;
            check_tracked(graph, &cell.tracked)?;
            let mut siblings = BTreeSet::new();
            for child in &cell.children {
                if !siblings.insert(&child.target) {
                    return Err(GranularityError::DuplicateSiblingTarget {
                        parent: cell.id.clone(),
                        target: child.target.clone(),
                    });
                }
                if !is_proper_part(graph, &cell.target, &child.target) {
                    return Err(GranularityError::NotAProperPart {
                        whole: cell.target.clone(),
                        part: child.target.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn coverage(&self, graph: &Graph) -> Result<Coverage, GranularityError> {
        let marker = vocab::part_presence();
        let mut items = BTreeSet::new();
        for cell in self.cells() {
            if !graph.mentions(&cell.target) {
                return Err(GranularityError::StalePartition(cell.target.clone()));
            }
            items.insert((cell.target.clone(), marker.clone()));
            for q in &cell.tracked {
                items.insert((cell.target.clone(), q.clone()));
            }
        }
        Ok(Coverage { items })
    }

    /// Reads the indented `.part` format; two spaces per nesting level.
    pub fn parse(text: &str) -> Result<Self, GranularityError> {
        let mut stack: Vec<(usize, Cell)> = Vec::new();
        let mut root: Option<Cell> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim_end();
            if content.trim().is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let err = |message: String| GranularityError::Parse { line, message };
            if content[..indent].contains('\t') || indent % 2 != 0 {
                return Err(err("indent with multiples of two spaces".into()));
            }
            let depth = indent / 2;
            let cell = parse_cell(content.trim_start()).map_err(err)?;
            while stack.last().is_some_and(|(d, _)| *d >= depth) {
                fold(&mut stack, &mut root);
            }
            if root.is_some() {
                return Err(err("a partition has exactly one root cell".into()));
            }
            let expected = stack.last().map_or(0, |(d, _)| d + 1);
            if depth != expected {
                return Err(err(format!("cell nested at depth {depth}, expected {expected}")));
            }
            stack.push((depth, cell));
        }
        while !stack.is_empty() {
            fold(&mut stack, &mut root);
        }
        let root = root.ok_or(GranularityError::Parse {
            line: 0,
            message: "no cells".into(),
        })?;
        let partition = Partition { root };
        let mut ids = BTreeSet::new();
        for cell in partition.cells() {
            if !ids.insert(cell.id.clone()) {
                return Err(GranularityError::DuplicateCellId(cell.id.clone()));
            }
        }
        Ok(partition)
    }
}

fn fold(stack: &mut Vec<(usize, Cell)>, root: &mut Option<Cell>) {
    let (_, cell) = stack.pop().expect("caller checks non-empty");
    match stack.last_mut() {
        Some((_, parent)) => parent.children.push(cell),
        None => *root = Some(cell),
    }
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let rest = s
        .strip_prefix("cell ")
        .ok_or_else(|| format!("expected `cell <id> -> <term> tracks {{...}}`, got `{s}`"))?;
    let (id, rest) = rest.split_once("->").ok_or_else(|| "missing `->`".to_string())?;
    let id = id.trim();
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(format!("bad cell id `{id}`"));
    }
    let (target, rest) = rest
        .split_once(" tracks ")
        .ok_or_else(|| "missing `tracks {...}`".to_string())?;
    let target: Term = target.trim().parse().map_err(|e| format!("{e}"))?;
    let list = rest
        .trim()
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| "tracked types must be written `{a, b}`".to_string())?;
    let mut tracked = BTreeSet::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        tracked.insert(item.parse::<Term>().map_err(|e| format!("{e}"))?);
    }
    Ok(Cell::leaf(id.to_string(), target, tracked))
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_cell(out: &mut String, cell: &Cell, depth: usize) {
            let tracked: Vec<String> = cell.tracked.iter().map(Term::to_string).collect();
            let _ = writeln!(
                out,
                "{:indent$}cell {} -> {} tracks {{{}}}",
                "",
                cell.id,
                cell.target,
                tracked.join(", "),
                indent = depth * 2
            );
            for c in &cell.children {
                write_cell(out, c, depth + 1);
            }
        }
        let mut out = String::new();
        write_cell(&mut out, &self.root, 0);
        f.write_str(&out)
    }
}

pub fn create_partition(
    graph: &Graph,
    root_target: &Term,
    tracked: BTreeSet<Term>,
) -> Result<Partition, GranularityError> {
    Partition::create(graph, root_target, tracked)
}

pub fn compare_fidelity(a: &Partition, b: &Partition, graph: &Graph) -> Result<Fidelity, GranularityError> {
    Ok(a.coverage(graph)?.compare(&b.coverage(graph)?))
}
