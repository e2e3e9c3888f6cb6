//! Core knowledge-graph types: terms, triples, the indexed graph, subject-grouped
//! documents and result sets.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed term {text:?}: {reason}")]
    MalformedTerm { text: String, reason: String },
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
}

/// A numeric literal. Keeps the lexical form it was written with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Number {
    lexical: String,
    value: f64,
}

impl Number {
    pub fn parse(lexical: &str) -> Option<Number> {
        if !is_numeral(lexical) {
            return None;
        }
        let value: f64 = lexical.parse().ok()?;
        value.is_finite().then(|| Number {
            lexical: lexical.to_string(),
            value,
        })
    }

    pub fn from_i64(v: i64) -> Number {
        Number {
            lexical: v.to_string(),
            value: v as f64,
        }
    }

    pub fn from_f64(v: f64) -> Option<Number> {
        if !v.is_finite() {
            return None;
        }
        let lexical = if v.fract() == 0.0 && v.abs() < 1e15 {
            format!("{}", v as i64)
        } else {
            format!("{v}")
        };
        Some(Number { lexical, value: v })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    fn key_bits(&self) -> u64 {
        // -0.0 and 0.0 must hash alike since they compare equal.
        if self.value == 0.0 {
            0
        } else {
            self.value.to_bits()
        }
    }
}

/// `[+-]?digits(.digits)?([eE][+-]?digits)?`
pub fn is_numeral(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i == start {
        return false;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == frac {
            return false;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp {
            return false;
        }
    }
    i == b.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermKind {
    IriOrName,
    LiteralString,
    LiteralNumber,
    Variable,
}

/// A query or data term.
///
/// Equality follows the document-store view of values: a name and a string
/// literal with the same text are the same value, and numbers compare by
/// numeric value. Variables only equal variables of the same name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Term {
    /// Bare name (`CISPLATIN`) or IRI; the IRI is stored without angle brackets.
    Name(String),
    Text(String),
    Number(Number),
    /// Variable name without the leading `?`.
    Variable(String),
}

impl Term {
    pub fn name(s: impl Into<String>) -> Term {
        Term::Name(s.into())
    }

    pub fn text(s: impl Into<String>) -> Term {
        Term::Text(s.into())
    }

    pub fn int(v: i64) -> Term {
        Term::Number(Number::from_i64(v))
    }

    pub fn var(s: impl Into<String>) -> Term {
        Term::Variable(s.into())
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Name(_) => TermKind::IriOrName,
            Term::Text(_) => TermKind::LiteralString,
            Term::Number(_) => TermKind::LiteralNumber,
            Term::Variable(_) => TermKind::Variable,
        }
    }

    /// The lexical form without quotes, brackets or `?`.
    pub fn lexical(&self) -> &str {
        match self {
            Term::Name(s) | Term::Text(s) | Term::Variable(s) => s,
            Term::Number(n) => n.lexical(),
        }
    }

    pub fn numeric_value(&self) -> Option<f64> {
        match self {
            Term::Number(n) => Some(n.value()),
            _ => None,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn as_variable(&self) -> Option<&str> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    /// Strict identity, including the term kind. `==` conflates names and strings.
    pub fn identical(&self, other: &Term) -> bool {
        self.kind() == other.kind() && self.lexical() == other.lexical()
    }

    /// Ordering used by filters. Numbers order numerically and text lexically;
    /// anything else is a cross-type comparison and yields `None`.
    pub fn value_cmp(&self, other: &Term) -> Option<Ordering> {
        match (self, other) {
            (Term::Number(a), Term::Number(b)) => a.value().partial_cmp(&b.value()),
            (Term::Name(a) | Term::Text(a), Term::Name(b) | Term::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }

    /// Total order for sorting: numbers, then text, then variables.
    pub fn total_cmp(&self, other: &Term) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Number(_) => 0,
                Term::Name(_) | Term::Text(_) => 1,
                Term::Variable(_) => 2,
            }
        }
        match (self, other) {
            (Term::Number(a), Term::Number(b)) => a.value().total_cmp(&b.value()),
            (Term::Name(a) | Term::Text(a), Term::Name(b) | Term::Text(b)) => a.cmp(b),
            (Term::Variable(a), Term::Variable(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Term::Name(a) | Term::Text(a), Term::Name(b) | Term::Text(b)) => a == b,
            (Term::Number(a), Term::Number(b)) => a.value() == b.value(),
            (Term::Variable(a), Term::Variable(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Term::Name(s) | Term::Text(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            Term::Number(n) => {
                1u8.hash(state);
                n.key_bits().hash(state);
            }
            Term::Variable(v) => {
                2u8.hash(state);
                v.hash(state);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Name(s) if is_bare_name(s) => f.write_str(s),
            Term::Name(s) => write!(f, "<{s}>"),
            Term::Text(s) => f.write_str(&quote(s)),
            Term::Number(n) => f.write_str(n.lexical()),
            Term::Variable(v) => write!(f, "?{v}"),
        }
    }
}

const RESERVED_WORDS: &[&str] = &[
    "SELECT",
    "WHERE",
    "OPTIONAL",
    "FILTER",
    "ORDER",
    "BY",
    "ASC",
    "DESC",
    "LIMIT",
    "OFFSET",
    "PREFIX",
    "EXISTS",
    "NOT",
    "DISTINCT",
    "REDUCED",
    "UNION",
    "GROUP",
    "HAVING",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "GRAPH",
    "MINUS",
    "BIND",
    "VALUES",
    "SERVICE",
    "BASE",
    "FROM",
    "NAMED",
];

pub(crate) fn is_reserved_word(s: &str) -> bool {
    RESERVED_WORDS.iter().any(|k| k.eq_ignore_ascii_case(s))
}

pub(crate) fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '.')
}

/// Whether `s` can be written without angle brackets.
pub fn is_bare_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_name_start(c) => {}
        _ => return false,
    }
    s.chars().all(is_name_char) && !s.ends_with('.') && !is_reserved_word(s)
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Reads a double-quoted literal at the start of `s`. Returns the unescaped
/// content and the byte length consumed (including both quotes).
pub(crate) fn scan_quoted(s: &str) -> Result<(String, usize), String> {
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, '"')) => {}
        _ => return Err("expected '\"'".into()),
    }
    let mut out = String::new();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Ok((out, i + 1)),
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, 'r')) => out.push('\r'),
                Some((_, '"')) => out.push('"'),
                Some((_, '\'')) => out.push('\''),
                Some((_, '\\')) => out.push('\\'),
                Some((_, 'u')) => {
                    let hex: String = (0..4).filter_map(|_| chars.next().map(|(_, c)| c)).collect();
                    let ch = u32::from_str_radix(&hex, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| format!("bad \\u escape {hex:?}"))?;
                    out.push(ch);
                }
                Some((_, c)) => return Err(format!("unknown escape \\{c}")),
                None => break,
            },
            '\n' => return Err("newline inside string literal".into()),
            c => out.push(c),
        }
    }
    Err("unterminated string literal".into())
}

/// Parses a single term written in query/N-Triples syntax.
pub fn term_parse(text: &str) -> Result<Term, ModelError> {
    let malformed = |reason: &str| ModelError::MalformedTerm {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let t = text.trim();
    if t.is_empty() {
        return Err(malformed("empty input"));
    }
    if let Some(rest) = t.strip_prefix('?') {
        if rest.is_empty() || !rest.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(malformed("bad variable name"));
        }
        return Ok(Term::Variable(rest.to_string()));
    }
    if t.starts_with('"') {
        let (content, used) = scan_quoted(t).map_err(|e| malformed(&e))?;
        if used != t.len() {
            return Err(malformed("trailing characters after literal"));
        }
        return Ok(Term::Text(content));
    }
    if let Some(n) = Number::parse(t) {
        return Ok(Term::Number(n));
    }
    if let Some(inner) = t.strip_prefix('<') {
        let inner = inner.strip_suffix('>').ok_or_else(|| malformed("unterminated IRI"))?;
        if inner.chars().any(|c| c.is_whitespace() || c == '<' || c == '>') {
            return Err(malformed("illegal character in IRI"));
        }
        return Ok(Term::Name(inner.to_string()));
    }
    if t.chars().any(char::is_whitespace) {
        return Err(malformed("whitespace inside name"));
    }
    Ok(Term::Name(t.to_string()))
}

/// A stored fact. Subject and predicate are names; nothing is a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, ModelError> {
        if subject.is_variable() || predicate.is_variable() || object.is_variable() {
            return Err(ModelError::InvalidTriple("triples cannot contain variables".into()));
        }
        if !matches!(subject, Term::Name(_)) {
            return Err(ModelError::InvalidTriple(format!("subject {subject} is not a name")));
        }
        if !matches!(predicate, Term::Name(_)) {
            return Err(ModelError::InvalidTriple(format!(
                "predicate {predicate} is not a name"
            )));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// An in-memory triple set with subject, predicate and object indexes.
///
/// Mutation happens during loading only; afterwards the graph is shared
/// read-only across engines and threads.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: IndexSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `t`. Returns false when the triple was already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        let (idx, fresh) = self.triples.insert_full(t);
        if fresh {
            let t = &self.triples[idx];
            self.by_subject.entry(t.subject.clone()).or_default().push(idx);
            self.by_predicate.entry(t.predicate.clone()).or_default().push(idx);
            self.by_object.entry(t.object.clone()).or_default().push(idx);
        }
        fresh
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn by_subject<'a>(&'a self, s: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.indexed(self.by_subject.get(s))
    }

    pub fn by_predicate<'a>(&'a self, p: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.indexed(self.by_predicate.get(p))
    }

    pub fn by_object<'a>(&'a self, o: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.indexed(self.by_object.get(o))
    }

    fn indexed<'a>(&'a self, ids: Option<&'a Vec<usize>>) -> impl Iterator<Item = &'a Triple> + 'a {
        ids.into_iter().flatten().map(move |&i| &self.triples[i])
    }

    /// Triples matching the given constant positions, served from the
    /// narrowest available index.
    pub fn matching<'a>(&'a self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<&'a Triple> {
        let lists = [
            s.map(|s| self.by_subject.get(s)),
            p.map(|p| self.by_predicate.get(p)),
            o.map(|o| self.by_object.get(o)),
        ];
        let narrowest = lists.iter().flatten().min_by_key(|ids| ids.map_or(0, |v| v.len()));
        let candidates: Box<dyn Iterator<Item = &Triple>> = match narrowest {
            Some(ids) => Box::new(self.indexed(*ids)),
            None => Box::new(self.triples.iter()),
        };
        candidates
            .filter(|t| {
                s.is_none_or(|s| &t.subject == s)
                    && p.is_none_or(|p| &t.predicate == p)
                    && o.is_none_or(|o| &t.object == o)
            })
            .collect()
    }
}

impl FromIterator<Triple> for KnowledgeGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = KnowledgeGraph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

impl Extend<Triple> for KnowledgeGraph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

/// One subject's facts grouped by predicate, the document-store layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub subject_id: String,
    pub fields: IndexMap<String, Vec<Term>>,
}

impl Document {
    pub fn new(subject_id: impl Into<String>) -> Self {
        Document {
            subject_id: subject_id.into(),
            fields: IndexMap::new(),
        }
    }

    /// The triples this document stands for.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.fields.iter().flat_map(move |(p, values)| {
            values.iter().map(move |v| Triple {
                subject: Term::Name(self.subject_id.clone()),
                predicate: Term::Name(p.clone()),
                object: v.clone(),
            })
        })
    }
}

/// A solution row: one slot per result variable, `None` when unbound.
pub type Row = Vec<Option<Term>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub variables: Vec<String>,
    pub rows: Vec<Row>,
    /// Row order is significant (the query had ORDER BY).
    pub ordered: bool,
}

impl ResultSet {
    pub fn new(variables: Vec<String>) -> Self {
        ResultSet {
            variables,
            rows: Vec::new(),
            ordered: false,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    pub fn value(&self, row: usize, var: &str) -> Option<&Term> {
        let col = self.column(var)?;
        self.rows.get(row)?.get(col)?.as_ref()
    }

    fn sorted_rows(&self) -> Vec<&Row> {
        let mut rows: Vec<&Row> = self.rows.iter().collect();
        rows.sort_by(|a, b| cmp_rows(a, b));
        rows
    }

    /// Bag equality of rows, ignoring order.
    pub fn multiset_eq(&self, other: &ResultSet) -> bool {
        self.variables == other.variables
            && self.rows.len() == other.rows.len()
            && self.sorted_rows() == other.sorted_rows()
    }

    /// Row-by-row equality in order.
    pub fn ordered_eq(&self, other: &ResultSet) -> bool {
        self.variables == other.variables && self.rows == other.rows
    }

    /// Ordered equality when either side is ordered, multiset equality otherwise.
    pub fn equivalent(&self, other: &ResultSet) -> bool {
        if self.ordered || other.ordered {
            self.ordered_eq(other)
        } else {
            self.multiset_eq(other)
        }
    }
}

/// Unbound sorts before any value.
pub fn cmp_opt_terms(a: &Option<Term>, b: &Option<Term>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(a), Some(b)) => a.total_cmp(b),
    }
}

pub fn cmp_rows(a: &Row, b: &Row) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| cmp_opt_terms(x, y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

impl fmt::Display for ResultSet {
    /// Column-aligned table.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let headers: Vec<String> = self.variables.iter().map(|v| format!("?{v}")).collect();
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| c.as_ref().map(|t| t.to_string()).unwrap_or_default())
                    .collect()
            })
            .collect();
        let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, items: &[String]| -> fmt::Result {
            let parts: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}", w = *w))
                .collect();
            writeln!(f, "| {} |", parts.join(" | "))
        };
        line(f, &headers)?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(f, "|-{}-|", rule.join("-|-"))?;
        for row in &cells {
            line(f, row)?;
        }
        write!(f, "{} row(s)", self.rows.len())
    }
}
