//! Graph exchange format: a Turtle subset with interval annotations.
//!
//! Supported: `@prefix` lines, `S P O .` triples, `a`, `;` predicate lists,
//! `,` object lists, `#` comments, quoted strings, decimal numbers, and a
//! trailing `@[start,end]` / `@[start,]` interval on any object. Blank nodes
//! and collections are not part of the grammar.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::lexer::{tokenize, Spanned, Token};
use super::ParseError;
use crate::graph::{Assertion, Graph, GraphError, Provenance, SchemaClass, SchemaRelation};
use crate::schema::{is_builtin_class, is_builtin_relation, vocab};
use crate::term::{Literal, Node, Rational, Term, TimeInterval};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RawSubject {
    Term(Term),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum RawObject {
    Node(Node),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawStatement {
    pub subject: RawSubject,
    pub predicate: Term,
    pub object: RawObject,
    pub interval: Option<TimeInterval>,
    pub line: usize,
    pub column: usize,
}

pub(crate) struct RawDocument {
    pub prefixes: BTreeMap<String, String>,
    pub statements: Vec<RawStatement>,
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
    prefixes: BTreeMap<String, String>,
    allow_vars: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens.get(self.pos).map_or(self.eof, |s| (s.line, s.column))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.peek() {
            Some(tok) => self.error(format!("expected {wanted}, found {}", tok.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, want: Token, wanted: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn term(&mut self, prefix: String, local: String) -> Result<Term, ParseError> {
        let (line, column) = self.here();
        if !self.prefixes.contains_key(&prefix) {
            return Err(ParseError::UndeclaredPrefix {
                name: format!("{prefix}:{local}"),
                line,
                column,
            });
        }
        if local.is_empty() {
            return Err(self.error(format!("empty local name after `{prefix}:`")));
        }
        let term = Term::new(prefix, local).map_err(|e| self.error(e.to_string()))?;
        self.pos += 1;
        Ok(term)
    }

    fn directive(&mut self) -> Result<(), ParseError> {
        self.pos += 1;
        let prefix = match self.peek() {
            Some(Token::PName { prefix, local }) if local.is_empty() => prefix.clone(),
            _ => return Err(self.unexpected("prefix name ending in `:`")),
        };
        self.pos += 1;
        let iri = match self.peek() {
            Some(Token::Iri(iri)) => iri.clone(),
            _ => return Err(self.unexpected("IRI")),
        };
        if let Some(existing) = self.prefixes.get(&prefix) {
            if existing != &iri {
                return Err(self.error(format!("prefix `{prefix}` is already bound to <{existing}>")));
            }
        }
        self.pos += 1;
        self.expect(Token::Dot, "`.` after prefix declaration")?;
        self.prefixes.insert(prefix, iri);
        Ok(())
    }

    fn subject(&mut self) -> Result<RawSubject, ParseError> {
        match self.peek().cloned() {
            Some(Token::PName { prefix, local }) => Ok(RawSubject::Term(self.term(prefix, local)?)),
            Some(Token::Var(v)) if self.allow_vars => {
                self.pos += 1;
                Ok(RawSubject::Var(v))
            }
            _ => Err(self.unexpected("subject name")),
        }
    }

    fn verb(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Token::A) => {
                self.pos += 1;
                Ok(vocab::type_of())
            }
            Some(Token::PName { prefix, local }) => self.term(prefix, local),
            _ => Err(self.unexpected("predicate")),
        }
    }

    fn number(&mut self, text: &str) -> Result<Rational, ParseError> {
        let value = text.parse::<Rational>().map_err(|e| self.error(e.to_string()))?;
        self.pos += 1;
        Ok(value)
    }

    fn object(&mut self) -> Result<RawObject, ParseError> {
        match self.peek().cloned() {
            Some(Token::PName { prefix, local }) => Ok(RawObject::Node(Node::Term(self.term(prefix, local)?))),
            Some(Token::Str(s)) => {
                self.pos += 1;
                Ok(RawObject::Node(Node::Literal(Literal::String(s))))
            }
            Some(Token::Number(n)) => Ok(RawObject::Node(Node::Literal(Literal::Decimal(self.number(&n)?)))),
            Some(Token::Var(v)) if self.allow_vars => {
                self.pos += 1;
                Ok(RawObject::Var(v))
            }
            _ => Err(self.unexpected("object")),
        }
    }

    fn interval(&mut self) -> Result<Option<TimeInterval>, ParseError> {
        if self.peek() != Some(&Token::IntervalOpen) {
            return Ok(None);
        }
        self.pos += 1;
        let start = match self.peek().cloned() {
            Some(Token::Number(n)) => self.number(&n)?,
            _ => return Err(self.unexpected("interval start")),
        };
        self.expect(Token::Comma, "`,` in interval")?;
        let end = match self.peek().cloned() {
            Some(Token::Number(n)) => Some(self.number(&n)?),
            _ => None,
        };
        let at = self.here();
        self.expect(Token::CloseBracket, "`]` closing interval")?;
        TimeInterval::new(start, end).map(Some).map_err(|e| ParseError::Syntax {
            line: at.0,
            column: at.1,
            message: format!("malformed interval: {e}"),
        })
    }

    fn triples(&mut self, out: &mut Vec<RawStatement>) -> Result<(), ParseError> {
        let subject = self.subject()?;
        loop {
            let predicate = self.verb()?;
            loop {
                let (line, column) = self.here();
                let object = self.object()?;
                let interval = self.interval()?;
                out.push(RawStatement {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    interval,
                    line,
                    column,
                });
                if self.peek() == Some(&Token::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            match self.peek() {
                Some(Token::Semicolon) => {
                    while self.peek() == Some(&Token::Semicolon) {
                        self.pos += 1;
                    }
                    if self.peek() == Some(&Token::Dot) {
                        self.pos += 1;
                        return Ok(());
                    }
                }
                Some(Token::Dot) => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => return Err(self.unexpected("`;`, `,` or `.`")),
            }
        }
    }
}

fn end_position(src: &str) -> (usize, usize) {
    let line = src.split('\n').count().max(1);
    let column = src.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub(crate) fn parse_raw(src: &str, allow_vars: bool) -> Result<RawDocument, ParseError> {
    let tokens = tokenize(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof: end_position(src),
        prefixes: vocab::STANDARD_PREFIXES
            .iter()
            .map(|(p, i)| (p.to_string(), i.to_string()))
            .collect(),
        allow_vars,
    };
    let mut statements = Vec::new();
    while let Some(tok) = parser.peek() {
        if *tok == Token::PrefixDirective {
            parser.directive()?;
        } else {
            parser.triples(&mut statements)?;
        }
    }
    Ok(RawDocument {
        prefixes: parser.prefixes,
        statements,
    })
}

/// A located statement of a parsed graph file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub assertion: Assertion,
    pub line: usize,
}

/// Parsed graph file: prefix table (standard prefixes included) and statements
/// in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub prefixes: BTreeMap<String, String>,
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {source}")]
pub struct DocumentError {
    pub line: usize,
    #[source]
    pub source: GraphError,
}

pub fn parse_document(text: &str) -> Result<Document, ParseError> {
    let raw = parse_raw(text, false)?;
    let statements = raw
        .statements
        .into_iter()
        .map(|s| {
            let subject = match s.subject {
                RawSubject::Term(t) => t,
                RawSubject::Var(_) => unreachable!("variables rejected by the parser"),
            };
            let object = match s.object {
                RawObject::Node(n) => n,
                RawObject::Var(_) => unreachable!("variables rejected by the parser"),
            };
            Statement {
                assertion: Assertion {
                    subject,
                    predicate: s.predicate,
                    object,
                    interval: s.interval,
                },
                line: s.line,
            }
        })
        .collect();
    Ok(Document {
        prefixes: raw.prefixes,
        statements,
    })
}

/// Like [`parse_document`] but over raw bytes; invalid UTF-8 is a syntax error.
pub fn parse_document_bytes(bytes: &[u8]) -> Result<Document, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_document(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let (line, column) = end_position(valid);
            Err(ParseError::Syntax {
                line,
                column,
                message: "invalid UTF-8".into(),
            })
        }
    }
}

#[derive(Default)]
struct ClassDecl {
    superclasses: BTreeSet<Term>,
    disjoint_with: BTreeSet<Term>,
    definition: Option<String>,
}

#[derive(Default)]
struct RelationDecl {
    superrelations: BTreeSet<Term>,
    domain: Option<(Term, usize)>,
    range: Option<(Term, usize)>,
    definition: Option<String>,
}

fn schema_error(line: usize, term: &Term, detail: &str) -> DocumentError {
    DocumentError {
        line,
        source: GraphError::ConflictingDeclaration {
            term: term.clone(),
            detail: detail.to_string(),
        },
    }
}

impl Document {
    /// Loads the document into `base`: schema declarations first, then
    /// instance assertions.
    pub fn into_graph(self, mut base: Graph) -> Result<Graph, DocumentError> {
        for (prefix, iri) in &self.prefixes {
            base.bind_prefix(prefix, iri)
                .map_err(|source| DocumentError { line: 1, source })?;
        }

        let mut classes: BTreeMap<Term, ClassDecl> = BTreeMap::new();
        let mut relations: BTreeMap<Term, RelationDecl> = BTreeMap::new();
        let mut comments: Vec<(Term, String, usize)> = Vec::new();
        let mut instance = Vec::new();

        let object_term = |s: &Statement| -> Result<Term, DocumentError> {
            s.assertion
                .object
                .as_term()
                .cloned()
                .ok_or_else(|| schema_error(s.line, &s.assertion.subject, "schema statement needs a term object"))
        };

        for s in self.statements {
            let a = &s.assertion;
            let p = &a.predicate;
            let is_schema = (a.is_type_of()
                && matches!(a.object.as_term(), Some(o) if *o == vocab::owl_class() || *o == vocab::owl_object_property()))
                || [
                    vocab::rdfs_sub_class_of(),
                    vocab::owl_disjoint_with(),
                    vocab::rdfs_sub_property_of(),
                    vocab::rdfs_domain(),
                    vocab::rdfs_range(),
                    vocab::rdfs_comment(),
                ]
                .contains(p);
            if !is_schema {
                instance.push(s);
                continue;
            }
            if a.interval.is_some() {
                return Err(schema_error(
                    s.line,
                    &a.subject,
                    "schema statements cannot carry intervals",
                ));
            }
            let subject = a.subject.clone();
            if a.is_type_of() {
                if a.object.as_term() == Some(&vocab::owl_class()) {
                    classes.entry(subject).or_default();
                } else {
                    relations.entry(subject).or_default();
                }
            } else if *p == vocab::rdfs_sub_class_of() {
                let o = object_term(&s)?;
                classes.entry(subject).or_default().superclasses.insert(o);
            } else if *p == vocab::owl_disjoint_with() {
                let o = object_term(&s)?;
                classes.entry(subject).or_default().disjoint_with.insert(o);
            } else if *p == vocab::rdfs_sub_property_of() {
                let o = object_term(&s)?;
                relations.entry(subject).or_default().superrelations.insert(o);
            } else if *p == vocab::rdfs_domain() {
                let o = object_term(&s)?;
                relations.entry(subject).or_default().domain = Some((o, s.line));
            } else if *p == vocab::rdfs_range() {
                let o = object_term(&s)?;
                relations.entry(subject).or_default().range = Some((o, s.line));
            } else {
                match &a.object {
                    Node::Literal(Literal::String(text)) => comments.push((subject, text.clone(), s.line)),
                    _ => return Err(schema_error(s.line, &subject, "rdfs:comment needs a string")),
                }
            }
        }

        for (term, text, line) in comments {
            if let Some(c) = classes.get_mut(&term) {
                c.definition = Some(text);
            } else if let Some(r) = relations.get_mut(&term) {
                r.definition = Some(text);
            } else if base.class(&term).is_some() {
                classes.entry(term).or_default().definition = Some(text);
            } else if base.relation(&term).is_some() {
                relations.entry(term).or_default().definition = Some(text);
            } else {
                return Err(schema_error(line, &term, "rdfs:comment on an undeclared term"));
            }
        }

        let class_batch: Vec<SchemaClass> = classes
            .into_iter()
            .map(|(id, d)| SchemaClass {
                id,
                superclasses: d.superclasses,
                disjoint_with: d.disjoint_with,
                definition: d.definition.unwrap_or_default(),
            })
            .collect();
        let mut first_line = 1;
        let relation_batch: Vec<SchemaRelation> = relations
            .into_iter()
            .map(|(id, d)| {
                let existing = base.relation(&id);
                let pick = |declared: Option<(Term, usize)>, fallback: Option<&Term>| match declared {
                    Some((t, _)) => t,
                    None => fallback.cloned().unwrap_or_else(vocab::entity),
                };
                if let Some((_, l)) = d.domain.as_ref().or(d.range.as_ref()) {
                    first_line = first_line.max(*l);
                }
                SchemaRelation {
                    superrelations: d.superrelations,
                    domain: pick(d.domain, existing.map(|r| &r.domain)),
                    range: pick(d.range, existing.map(|r| &r.range)),
                    definition: d.definition.unwrap_or_default(),
                    id,
                }
            })
            .collect();
        base.extend_schema(class_batch, relation_batch)
            .map_err(|source| DocumentError {
                line: first_line,
                source,
            })?;

        for s in instance {
            base.assert(s.assertion)
                .map_err(|source| DocumentError { line: s.line, source })?;
        }
        Ok(base)
    }
}

/// Output options for [`serialize_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SerializeOptions {
    /// Leave out built-in classes and relations that are unchanged.
    pub skip_builtin_schema: bool,
    /// Append `# inferred Rn` to inferred statements.
    pub annotate_provenance: bool,
}

/// Canonical serialization: prefixes sorted, subjects sorted, predicates
/// sorted within a subject.
pub fn serialize_document(graph: &Graph) -> String {
    serialize_with(graph, SerializeOptions::default())
}

pub fn serialize_with(graph: &Graph, options: SerializeOptions) -> String {
    let mut out = String::new();
    for (prefix, iri) in graph.prefixes() {
        let _ = writeln!(out, "@prefix {prefix}: <{iri}> .");
    }

    let mut lines: BTreeMap<Term, Vec<(Assertion, Option<Provenance>)>> = BTreeMap::new();
    let mut push = |a: Assertion, p: Option<Provenance>| lines.entry(a.subject.clone()).or_default().push((a, p));

    for c in graph.classes() {
        if options.skip_builtin_schema && is_builtin_class(c) {
            continue;
        }
        push(Assertion::type_of(c.id.clone(), vocab::owl_class()), None);
        for s in &c.superclasses {
            push(
                Assertion::new(c.id.clone(), vocab::rdfs_sub_class_of(), s.clone()),
                None,
            );
        }
        for d in &c.disjoint_with {
            push(
                Assertion::new(c.id.clone(), vocab::owl_disjoint_with(), d.clone()),
                None,
            );
        }
        if !c.definition.is_empty() {
            push(
                Assertion::new(c.id.clone(), vocab::rdfs_comment(), Node::string(&c.definition)),
                None,
            );
        }
    }
    for r in graph.relations() {
        if options.skip_builtin_schema && is_builtin_relation(r) {
            continue;
        }
        push(Assertion::type_of(r.id.clone(), vocab::owl_object_property()), None);
        for s in &r.superrelations {
            push(
                Assertion::new(r.id.clone(), vocab::rdfs_sub_property_of(), s.clone()),
                None,
            );
        }
        push(
            Assertion::new(r.id.clone(), vocab::rdfs_domain(), r.domain.clone()),
            None,
        );
        push(Assertion::new(r.id.clone(), vocab::rdfs_range(), r.range.clone()), None);
        if !r.definition.is_empty() {
            push(
                Assertion::new(r.id.clone(), vocab::rdfs_comment(), Node::string(&r.definition)),
                None,
            );
        }
    }
    for (a, p) in graph.assertions() {
        push(a.clone(), Some(p));
    }

    for (subject, mut rows) in lines {
        rows.sort();
        out.push('\n');
        let last = rows.len() - 1;
        for (i, (a, provenance)) in rows.iter().enumerate() {
            let predicate = if a.is_type_of() {
                "a".to_string()
            } else {
                a.predicate.to_string()
            };
            if i == 0 {
                let _ = write!(out, "{subject} {predicate} {}", a.object);
            } else {
                let _ = write!(out, "    {predicate} {}", a.object);
            }
            if let Some(interval) = &a.interval {
                let _ = write!(out, " @{interval}");
            }
            out.push_str(if i == last { " ." } else { " ;" });
            if options.annotate_provenance {
                if let Some(Provenance::Inferred(rule)) = provenance {
                    let _ = write!(out, " # inferred {rule}");
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Parses `text` and loads it on top of the built-in schema.
pub fn load_graph(text: &str) -> Result<Graph, LoadError> {
    let doc = parse_document(text)?;
    Ok(doc.into_graph(crate::schema::builtin_schema())?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Document(#[from] DocumentError),
}
