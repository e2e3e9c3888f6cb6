use indexmap::IndexMap;
use serde_json::{Map, Value};

use crate::model::{Document, Term};
use crate::mql::SUBJECT_FIELD;
use crate::ntriples::{field_key, term_to_json};

/// A value inside a pipeline row. Scalars keep their term kind.
#[derive(Debug, Clone, PartialEq)]
pub enum DocValue {
    Scalar(Term),
    Array(Vec<DocValue>),
    Object(IndexMap<String, DocValue>),
}

impl DocValue {
    pub fn from_document(doc: &Document) -> DocValue {
        let mut m = IndexMap::with_capacity(doc.fields.len() + 1);
        m.insert(
            SUBJECT_FIELD.to_string(),
            DocValue::Scalar(Term::Name(doc.subject_id.clone())),
        );
        for (p, values) in &doc.fields {
            m.insert(
                field_key(p).into_owned(),
                DocValue::Array(values.iter().cloned().map(DocValue::Scalar).collect()),
            );
        }
        DocValue::Object(m)
    }

    pub fn get(&self, key: &str) -> Option<&DocValue> {
        match self {
            DocValue::Object(m) => m.get(key),
            _ => None,
        }
    }

    /// Scalars reached by a dotted path. Arrays are traversed element-wise at
    /// every step and flattened at the end.
    pub fn scalars_at<'a>(&'a self, path: &str) -> Vec<&'a Term> {
        let mut out = Vec::new();
        let parts: Vec<&str> = if path.is_empty() {
            Vec::new()
        } else {
            path.split('.').collect()
        };
        collect(self, &parts, &mut out);
        out
    }

    /// Sets a dotted path, creating objects on the way.
    pub fn set_path(&mut self, path: &str, value: DocValue) {
        let mut cur = self;
        let mut parts = path.split('.').peekable();
        while let Some(part) = parts.next() {
            if !matches!(cur, DocValue::Object(_)) {
                *cur = DocValue::Object(IndexMap::new());
            }
            let DocValue::Object(m) = cur else { unreachable!() };
            if parts.peek().is_none() {
                m.insert(part.to_string(), value);
                return;
            }
            cur = m
                .entry(part.to_string())
                .or_insert_with(|| DocValue::Object(IndexMap::new()));
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            DocValue::Scalar(t) => term_to_json(t),
            DocValue::Array(items) => Value::Array(items.iter().map(DocValue::to_json).collect()),
            DocValue::Object(m) => {
                let mut out = Map::new();
                for (k, v) in m {
                    out.insert(k.clone(), v.to_json());
                }
                Value::Object(out)
            }
        }
    }
}

fn collect<'a>(v: &'a DocValue, parts: &[&str], out: &mut Vec<&'a Term>) {
    match v {
        DocValue::Array(items) => items.iter().for_each(|i| collect(i, parts, out)),
        DocValue::Scalar(t) if parts.is_empty() => out.push(t),
        DocValue::Scalar(_) => {}
        DocValue::Object(m) => {
            if let Some((first, rest)) = parts.split_first() {
                if let Some(child) = m.get(*first) {
                    collect(child, rest, out);
                }
            }
        }
    }
}
