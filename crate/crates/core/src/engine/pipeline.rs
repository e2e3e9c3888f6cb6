use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde_json::Value;

use super::filter::eval_filter;
use super::matcher::compile;
use super::sparql::apply_modifiers;
use super::value::DocValue;
use super::EngineError;
use crate::model::{cmp_opt_terms, Document, ResultSet, Row, Term};
use crate::mql::{BindingPlan, MqlPipeline, StageKind, Translation};

/// One named collection of documents, indexed on `subject_id` for lookups.
#[derive(Debug, Clone)]
pub struct DocumentStore {
    name: String,
    docs: Vec<DocValue>,
    subject_index: HashMap<Term, Vec<usize>>,
}

impl DocumentStore {
    pub fn new(name: impl Into<String>, documents: &[Document]) -> Self {
        let docs: Vec<DocValue> = documents.iter().map(DocValue::from_document).collect();
        let subject_index = index_on(&docs, crate::mql::SUBJECT_FIELD);
        DocumentStore {
            name: name.into(),
            docs,
            subject_index,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn run(&self, p: &MqlPipeline) -> Result<Vec<DocValue>, EngineError> {
        if p.collection != self.name {
            return Err(EngineError::UnknownCollection(p.collection.clone()));
        }
        let mut rows: Vec<DocValue> = self.docs.clone();
        for stage in &p.stages {
            rows = match &stage.kind {
                StageKind::Match => {
                    let cond = compile(&stage.body)?;
                    rows.into_iter().filter(|d| cond.eval(d)).collect()
                }
                StageKind::Lookup => self.lookup(rows, &stage.body)?,
                StageKind::Sort => sort(rows, &stage.body)?,
                StageKind::Skip => {
                    let n = count(&stage.body, "$skip")?;
                    rows.into_iter().skip(n).collect()
                }
                StageKind::Limit => {
                    let n = count(&stage.body, "$limit")?;
                    rows.truncate(n);
                    rows
                }
                StageKind::Project => project(rows, &stage.body)?,
                StageKind::Other(name) => return Err(EngineError::UnknownStage(name.clone())),
            };
        }
        Ok(rows)
    }

    /// Runs a translation and rebuilds the variable bindings.
    ///
    /// Document-level `$sort`/`$skip`/`$limit` stages are left out; the plan's
    /// modifiers are applied to the expanded solutions instead, since one
    /// document may yield several.
    pub fn query(&self, t: &Translation) -> Result<ResultSet, EngineError> {
        let stages = t
            .pipeline
            .stages
            .iter()
            .filter(|s| !matches!(s.kind, StageKind::Sort | StageKind::Skip | StageKind::Limit))
            .cloned()
            .collect();
        let core = MqlPipeline::new(t.pipeline.collection.clone(), stages);
        bindings_from_rows(&self.run(&core)?, &t.plan)
    }

    fn lookup(&self, rows: Vec<DocValue>, body: &Value) -> Result<Vec<DocValue>, EngineError> {
        let field = |k: &str| {
            body.get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| EngineError::MalformedPipeline(format!("$lookup needs a string {k:?}")))
        };
        let (from, local, foreign, alias) = (
            field("from")?,
            field("localField")?,
            field("foreignField")?,
            field("as")?,
        );
        if from != self.name {
            return Err(EngineError::UnknownCollection(from.to_string()));
        }
        let built;
        let index = if foreign == crate::mql::SUBJECT_FIELD {
            &self.subject_index
        } else {
            built = index_on(&self.docs, foreign);
            &built
        };
        Ok(rows
            .into_iter()
            .map(|mut row| {
                let mut hits: Vec<usize> = row
                    .scalars_at(local)
                    .into_iter()
                    .filter_map(|v| index.get(v))
                    .flatten()
                    .copied()
                    .collect();
                hits.sort_unstable();
                hits.dedup();
                let joined = DocValue::Array(hits.into_iter().map(|i| self.docs[i].clone()).collect());
                row.set_path(alias, joined);
                row
            })
            .collect())
    }
}

fn index_on(docs: &[DocValue], path: &str) -> HashMap<Term, Vec<usize>> {
    let mut idx: HashMap<Term, Vec<usize>> = HashMap::new();
    for (i, d) in docs.iter().enumerate() {
        let mut seen = HashSet::new();
        for v in d.scalars_at(path) {
            if seen.insert(v) {
                idx.entry(v.clone()).or_default().push(i);
            }
        }
    }
    idx
}

fn count(v: &Value, stage: &str) -> Result<usize, EngineError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| EngineError::MalformedPipeline(format!("{stage} needs a non-negative integer")))
}

/// Ascending keys use a field's smallest value, descending its largest.
/// Missing fields sort first in either direction; the sort is stable.
fn sort(rows: Vec<DocValue>, body: &Value) -> Result<Vec<DocValue>, EngineError> {
    let spec = body
        .as_object()
        .ok_or_else(|| EngineError::MalformedPipeline("$sort needs an object".into()))?;
    let mut keys = Vec::new();
    for (path, dir) in spec {
        let desc = match dir.as_i64() {
            Some(1) => false,
            Some(-1) => true,
            _ => {
                return Err(EngineError::MalformedPipeline(format!(
                    "sort direction for {path} must be 1 or -1"
                )))
            }
        };
        keys.push((path.as_str(), desc));
    }
    let mut keyed: Vec<(Vec<Option<Term>>, DocValue)> = rows
        .into_iter()
        .map(|row| {
            let k = keys
                .iter()
                .map(|&(path, desc)| {
                    let vals = row.scalars_at(path).into_iter();
                    if desc {
                        vals.max_by(|a, b| a.total_cmp(b)).cloned()
                    } else {
                        vals.min_by(|a, b| a.total_cmp(b)).cloned()
                    }
                })
                .collect();
            (k, row)
        })
        .collect();
    keyed.sort_by(|(a, _), (b, _)| {
        a.iter()
            .zip(b)
            .zip(&keys)
            .map(|((x, y), &(_, desc))| match (x, y) {
                (Some(x), Some(y)) if desc => y.total_cmp(x),
                _ => cmp_opt_terms(x, y),
            })
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Default)]
struct PathTree(IndexMap<String, PathTree>);

impl PathTree {
    fn insert(&mut self, path: &str) {
        let mut cur = self;
        for part in path.split('.') {
            cur = cur.0.entry(part.to_string()).or_default();
        }
    }
}

fn keep(v: &DocValue, tree: &PathTree) -> Option<DocValue> {
    if tree.0.is_empty() {
        return Some(v.clone());
    }
    match v {
        DocValue::Object(m) => {
            let mut out = IndexMap::new();
            for (k, sub) in &tree.0 {
                if let Some(child) = m.get(k).and_then(|c| keep(c, sub)) {
                    out.insert(k.clone(), child);
                }
            }
            Some(DocValue::Object(out))
        }
        DocValue::Array(items) => Some(DocValue::Array(items.iter().filter_map(|i| keep(i, tree)).collect())),
        DocValue::Scalar(_) => None,
    }
}

fn drop_paths(v: &mut DocValue, tree: &PathTree) {
    match v {
        DocValue::Object(m) => {
            for (k, sub) in &tree.0 {
                if sub.0.is_empty() {
                    m.shift_remove(k);
                } else if let Some(child) = m.get_mut(k) {
                    drop_paths(child, sub);
                }
            }
        }
        DocValue::Array(items) => items.iter_mut().for_each(|i| drop_paths(i, tree)),
        DocValue::Scalar(_) => {}
    }
}

/// Inclusion (`1`/`true`), exclusion (`0`/`false`) and computed `"$path"` fields.
fn project(rows: Vec<DocValue>, body: &Value) -> Result<Vec<DocValue>, EngineError> {
    let spec = body
        .as_object()
        .ok_or_else(|| EngineError::MalformedPipeline("$project needs an object".into()))?;
    let (mut include, mut exclude) = (PathTree::default(), PathTree::default());
    let mut computed = Vec::new();
    for (path, v) in spec {
        match v {
            Value::Number(n) if n.as_i64() == Some(1) => include.insert(path),
            Value::Bool(true) => include.insert(path),
            Value::Number(n) if n.as_i64() == Some(0) => exclude.insert(path),
            Value::Bool(false) => exclude.insert(path),
            Value::String(s) if s.starts_with('$') => computed.push((path.clone(), s[1..].to_string())),
            other => {
                return Err(EngineError::MalformedPipeline(format!(
                    "bad projection {path}: {other}"
                )))
            }
        }
    }
    if !exclude.0.is_empty() && (!include.0.is_empty() || !computed.is_empty()) {
        return Err(EngineError::MalformedPipeline(
            "cannot mix inclusion and exclusion".into(),
        ));
    }
    Ok(rows
        .into_iter()
        .map(|row| {
            if !exclude.0.is_empty() {
                let mut row = row;
                drop_paths(&mut row, &exclude);
                return row;
            }
            let mut out = match include.0.is_empty() {
                true => DocValue::Object(IndexMap::new()),
                false => keep(&row, &include).unwrap_or(DocValue::Object(IndexMap::new())),
            };
            for (name, from) in &computed {
                let vals: Vec<DocValue> = row
                    .scalars_at(from)
                    .into_iter()
                    .cloned()
                    .map(DocValue::Scalar)
                    .collect();
                out.set_path(name, DocValue::Array(vals));
            }
            out
        })
        .collect())
}

/// Runs a pipeline over documents grouped from a graph. The collection takes
/// the pipeline's own name.
pub fn eval_pipeline(docs: &[Document], p: &MqlPipeline) -> Result<Vec<DocValue>, EngineError> {
    DocumentStore::new(p.collection.clone(), docs).run(p)
}

/// Rebuilds bindings from projected rows.
///
/// For every row the plan's slots are matched in order: one element is chosen
/// per lookup alias, variables bind to one value of their field and must agree
/// wherever they recur, constants must be present. Each distinct full
/// assignment that passes the filter yields one result row.
pub fn bindings_from_rows(rows: &[DocValue], plan: &BindingPlan) -> Result<ResultSet, EngineError> {
    if let Some(v) = plan.projection.iter().find(|v| !plan.homes.contains_key(*v)) {
        return Err(EngineError::MissingProjection(format!("?{v} has no projected path")));
    }
    let tops: HashSet<String> = plan
        .slots
        .iter()
        .map(|s| plan.slot_path(s).split('.').next().unwrap_or_default().to_string())
        .collect();
    let vars: Vec<&str> = plan.homes.keys().map(String::as_str).collect();
    let order_col = plan
        .order_by
        .as_ref()
        .and_then(|k| vars.iter().position(|v| *v == k.variable));
    let mut out = Vec::new();
    for row in rows {
        if let DocValue::Object(m) = row {
            if let Some(k) = m.keys().find(|k| !tops.contains(*k)) {
                return Err(EngineError::MissingProjection(format!("row has unprojected field {k}")));
            }
        }
        let mut search = Search {
            plan,
            row,
            vars: &vars,
            choice: vec![None; plan.aliases.len()],
            binding: vec![None; vars.len()],
            seen: HashSet::new(),
            found: Vec::new(),
        };
        search.run(0);
        for full in search.found {
            if let Some(f) = &plan.filter {
                let lookup = |v: &str| vars.iter().position(|x| *x == v).map(|i| full[i].clone());
                if eval_filter(f, &lookup)? != Some(true) {
                    continue;
                }
            }
            let projected: Row = plan
                .projection
                .iter()
                .map(|v| vars.iter().position(|x| x == v).map(|i| full[i].clone()))
                .collect();
            out.push((order_col.map(|i| full[i].clone()), projected));
        }
    }
    Ok(ResultSet {
        variables: plan.projection.clone(),
        rows: apply_modifiers(out, plan.order_by.as_ref(), plan.offset, plan.limit),
        ordered: plan.order_by.is_some(),
    })
}

struct Search<'a> {
    plan: &'a BindingPlan,
    row: &'a DocValue,
    vars: &'a [&'a str],
    choice: Vec<Option<&'a DocValue>>,
    binding: Vec<Option<Term>>,
    seen: HashSet<Vec<Term>>,
    found: Vec<Vec<Term>>,
}

impl<'a> Search<'a> {
    fn run(&mut self, i: usize) {
        let Some(slot) = self.plan.slots.get(i) else {
            let full: Vec<Term> = self
                .binding
                .iter()
                .map(|b| b.clone().expect("all variables bound"))
                .collect();
            if self.seen.insert(full.clone()) {
                self.found.push(full);
            }
            return;
        };
        let base = match slot.alias {
            None => self.row,
            Some(a) => match self.choice[a] {
                Some(elem) => elem,
                None => {
                    let elems: Vec<&'a DocValue> = match self.row.get(&self.plan.aliases[a]) {
                        Some(DocValue::Array(items)) => items.iter().collect(),
                        Some(other) => vec![other],
                        None => Vec::new(),
                    };
                    for e in elems {
                        self.choice[a] = Some(e);
                        self.run(i);
                    }
                    self.choice[a] = None;
                    return;
                }
            },
        };
        let values = base.scalars_at(&slot.field);
        match slot.term.as_variable() {
            Some(v) => {
                let k = self.vars.iter().position(|x| *x == v).expect("plan variable");
                if let Some(b) = &self.binding[k] {
                    if values.contains(&b) {
                        self.run(i + 1);
                    }
                    return;
                }
                let mut tried: Vec<&Term> = Vec::new();
                for x in values {
                    if tried.contains(&x) {
                        continue;
                    }
                    tried.push(x);
                    self.binding[k] = Some(x.clone());
                    self.run(i + 1);
                }
                self.binding[k] = None;
            }
            None => {
                if values.iter().any(|x| **x == slot.term) {
                    self.run(i + 1);
                }
            }
        }
    }
}
