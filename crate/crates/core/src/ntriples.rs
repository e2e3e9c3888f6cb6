//! Line-oriented N-Triples loading and the subject-grouped document layout
//! used by the document store.
//!
//! Accepted statement form: `subject predicate object .` where terms are
//! `<iri>`, bare names, `_:blank` labels, `"string"` literals (datatype and
//! language tags are accepted and dropped, numeric XSD datatypes become
//! numbers) or bare numerals.

use std::borrow::Cow;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{is_numeral, scan_quoted, Document, Number, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("malformed document: {0}")]
    MalformedDocument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Abort on the first malformed line.
    #[default]
    Strict,
    /// Skip and count malformed lines.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub triples_loaded: usize,
    /// Blank, comment and (in lenient mode) malformed lines.
    pub lines_skipped: usize,
    pub documents_emitted: usize,
    /// Malformed lines seen in lenient mode.
    pub malformed: Vec<(usize, String)>,
}

pub fn parse_ntriples(text: &str, mode: ParseMode) -> Result<(Vec<Triple>, IngestReport), IngestError> {
    let mut triples = Vec::new();
    let mut report = IngestReport::default();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            report.lines_skipped += 1;
            continue;
        }
        match parse_statement(trimmed) {
            Ok(t) => {
                triples.push(t);
                report.triples_loaded += 1;
            }
            Err(message) => match mode {
                ParseMode::Strict => return Err(IngestError::MalformedLine { line: i + 1, message }),
                ParseMode::Lenient => {
                    report.lines_skipped += 1;
                    report.malformed.push((i + 1, message));
                }
            },
        }
    }
    Ok((triples, report))
}

fn parse_statement(line: &str) -> Result<Triple, String> {
    let mut rest = line;
    let subject = read_term(&mut rest)?;
    let predicate = read_term(&mut rest)?;
    let object = read_term(&mut rest)?;
    let tail = rest.trim_start();
    let after_dot = tail.strip_prefix('.').ok_or("missing terminating '.'")?;
    let after_dot = after_dot.trim_start();
    if !after_dot.is_empty() && !after_dot.starts_with('#') {
        return Err(format!("unexpected trailing text {after_dot:?}"));
    }
    Triple::new(subject, predicate, object).map_err(|e| e.to_string())
}

fn read_term(rest: &mut &str) -> Result<Term, String> {
    let s = rest.trim_start();
    if s.is_empty() || s.starts_with('.') && !s[1..].starts_with(|c: char| c.is_ascii_digit()) {
        return Err("missing term".into());
    }
    if s.starts_with('"') {
        let (content, used) = scan_quoted(s)?;
        let mut after = &s[used..];
        let mut term = Term::Text(content.clone());
        if let Some(dt) = after.strip_prefix("^^") {
            let end = dt.find('>').filter(|_| dt.starts_with('<')).ok_or("bad datatype IRI")?;
            let datatype = &dt[1..end];
            if is_numeric_datatype(datatype) {
                term = Number::parse(content.trim())
                    .map(Term::Number)
                    .ok_or_else(|| format!("{content:?} is not a valid {datatype}"))?;
            }
            after = &dt[end + 1..];
        } else if let Some(tag) = after.strip_prefix('@') {
            let len = tag
                .find(|c: char| !(c.is_alphanumeric() || c == '-'))
                .unwrap_or(tag.len());
            if len == 0 {
                return Err("empty language tag".into());
            }
            after = &tag[len..];
        }
        *rest = after;
        return Ok(term);
    }
    if let Some(inner) = s.strip_prefix('<') {
        let end = inner.find('>').ok_or("unterminated IRI")?;
        let iri = &inner[..end];
        if iri.chars().any(|c| c.is_whitespace() || c == '<') {
            return Err("illegal character in IRI".into());
        }
        *rest = &inner[end + 1..];
        return Ok(Term::Name(iri.to_string()));
    }
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    let mut token = &s[..end];
    // `obj.` with the terminator glued on
    if token.len() > 1 && token.ends_with('.') && end == s.len() {
        token = &token[..token.len() - 1];
    }
    *rest = &s[token.len()..];
    if is_numeral(token) {
        return Number::parse(token)
            .map(Term::Number)
            .ok_or_else(|| format!("bad number {token}"));
    }
    if token.contains(['"', '<', '>']) || token.starts_with(['?', '$']) {
        return Err(format!("malformed term {token:?}"));
    }
    Ok(Term::Name(token.to_string()))
}

fn is_numeric_datatype(dt: &str) -> bool {
    let local = dt.rsplit(['#', ':']).next().unwrap_or(dt);
    matches!(
        local,
        "integer"
            | "int"
            | "long"
            | "short"
            | "decimal"
            | "double"
            | "float"
            | "nonNegativeInteger"
            | "positiveInteger"
    )
}

/// Writes triples back out, one statement per line.
pub fn write_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}

/// Groups triples into one document per distinct subject, in first-seen
/// order. Repeated triples collapse.
pub fn group_by_subject<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Vec<Document> {
    let mut docs: IndexMap<&str, Document> = IndexMap::new();
    for t in triples {
        let doc = docs
            .entry(t.subject.lexical())
            .or_insert_with(|| Document::new(t.subject.lexical()));
        let values = doc.fields.entry(t.predicate.lexical().to_string()).or_default();
        if !values.contains(&t.object) {
            values.push(t.object.clone());
        }
    }
    docs.into_values().collect()
}

/// Inverse of [`group_by_subject`].
pub fn flatten_documents(docs: &[Document]) -> Vec<Triple> {
    docs.iter().flat_map(|d| d.triples()).collect()
}

/// Field key used for a predicate in stored documents. Dots and a leading `$`
/// would otherwise be read as path separators and operators.
pub fn field_key(predicate: &str) -> Cow<'_, str> {
    if !predicate.contains(['.', '%']) && !predicate.starts_with('$') {
        return Cow::Borrowed(predicate);
    }
    let mut out = String::with_capacity(predicate.len() + 4);
    for (i, c) in predicate.chars().enumerate() {
        match c {
            '%' => out.push_str("%25"),
            '.' => out.push_str("%2E"),
            '$' if i == 0 => out.push_str("%24"),
            c => out.push(c),
        }
    }
    Cow::Owned(out)
}

pub fn decode_field_key(key: &str) -> String {
    key.replace("%2E", ".").replace("%24", "$").replace("%25", "%")
}

pub fn term_to_json(t: &Term) -> Value {
    match t {
        Term::Number(n) => match n.lexical().parse::<i64>() {
            Ok(i) => Value::from(i),
            Err(_) => serde_json::Number::from_f64(n.value())
                .map(Value::Number)
                .unwrap_or(Value::Null),
        },
        other => Value::String(other.lexical().to_string()),
    }
}

pub fn term_from_json(v: &Value) -> Option<Term> {
    match v {
        Value::String(s) => Some(Term::Text(s.clone())),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(Term::int(i))
            } else {
                n.as_f64().and_then(Number::from_f64).map(Term::Number)
            }
        }
        Value::Bool(b) => Some(Term::Text(b.to_string())),
        _ => None,
    }
}

/// `{"subject_id": ..., "<predicate>": [values...]}`
pub fn document_to_json(doc: &Document) -> Value {
    let mut map = Map::new();
    map.insert("subject_id".into(), Value::String(doc.subject_id.clone()));
    for (p, values) in &doc.fields {
        map.insert(
            field_key(p).into_owned(),
            Value::Array(values.iter().map(term_to_json).collect()),
        );
    }
    Value::Object(map)
}

pub fn document_from_json(v: &Value) -> Result<Document, IngestError> {
    let bad = |m: &str| IngestError::MalformedDocument(m.to_string());
    let map = v.as_object().ok_or_else(|| bad("document is not an object"))?;
    let subject_id = map
        .get("subject_id")
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| bad("missing subject_id"))?;
    let mut doc = Document::new(subject_id);
    for (k, v) in map.iter().filter(|(k, _)| k.as_str() != "subject_id") {
        let items: Vec<&Value> = match v {
            Value::Array(items) => items.iter().collect(),
            single => vec![single],
        };
        let terms = items
            .into_iter()
            .map(|i| term_from_json(i).ok_or_else(|| bad(&format!("unsupported value in field {k}"))))
            .collect::<Result<Vec<_>, _>>()?;
        doc.fields.insert(decode_field_key(k), terms);
    }
    Ok(doc)
}

/// Newline-delimited JSON, one document per line.
pub fn documents_to_jsonl(docs: &[Document]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&document_to_json(d).to_string());
        out.push('\n');
    }
    out
}

pub fn documents_from_jsonl(text: &str) -> Result<Vec<Document>, IngestError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Value = serde_json::from_str(l).map_err(|e| IngestError::MalformedDocument(e.to_string()))?;
            document_from_json(&v)
        })
        .collect()
}
