//! `$match` conditions.
//!
//! Conditions are compiled with negations pushed to the leaves. Every leaf
//! asks whether some value at its path satisfies it, which keeps a translated
//! match a sound prefilter for multi-valued fields. `$ne` follows the same
//! rule: some value differs.

use std::cmp::Ordering;

use serde_json::{Map, Value};

use super::filter::holds;
use super::value::DocValue;
use super::EngineError;
use crate::model::Term;
use crate::ntriples::term_from_json;
use crate::sparql::CmpOp;

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    All(Vec<Cond>),
    Any(Vec<Cond>),
    Const(bool),
    /// `$exists`: the path has (true) or lacks (false) values.
    Exists(String, bool),
    /// Some value at the path compares as given.
    Cmp(String, CmpOp, Term),
    /// No value at the path equals the term.
    Absent(String, Term),
    /// Some pair of operand values compares as given.
    Expr(CmpOp, Operand, Operand),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Path(String),
    Literal(Term),
}

fn malformed(msg: impl Into<String>) -> EngineError {
    EngineError::MalformedPipeline(msg.into())
}

fn literal(v: &Value) -> Result<Term, EngineError> {
    term_from_json(v).ok_or_else(|| malformed(format!("unsupported literal {v}")))
}

fn cmp_op(name: &str) -> Option<CmpOp> {
    Some(match name {
        "$eq" => CmpOp::Eq,
        "$ne" => CmpOp::Ne,
        "$gt" => CmpOp::Gt,
        "$gte" => CmpOp::Ge,
        "$lt" => CmpOp::Lt,
        "$lte" => CmpOp::Le,
        _ => return None,
    })
}

fn both(conds: Vec<Cond>, negated: bool) -> Cond {
    if negated {
        Cond::Any(conds)
    } else {
        Cond::All(conds)
    }
}

fn either(conds: Vec<Cond>, negated: bool) -> Cond {
    both(conds, !negated)
}

pub fn compile(v: &Value) -> Result<Cond, EngineError> {
    compile_query(v, false)
}

fn compile_query(v: &Value, negated: bool) -> Result<Cond, EngineError> {
    let m = v
        .as_object()
        .ok_or_else(|| malformed(format!("match condition must be an object, got {v}")))?;
    let parts = m
        .iter()
        .map(|(k, v)| compile_entry(k, v, negated))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(both(parts, negated))
}

fn compile_entry(key: &str, v: &Value, negated: bool) -> Result<Cond, EngineError> {
    match key {
        "$and" | "$or" => {
            let items = v.as_array().ok_or_else(|| malformed(format!("{key} needs an array")))?;
            let parts = items
                .iter()
                .map(|i| compile_query(i, negated))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(if key == "$and" {
                both(parts, negated)
            } else {
                either(parts, negated)
            })
        }
        "$not" => compile_query(v, !negated),
        "$expr" => compile_expr(v, negated),
        k if k.starts_with('$') => Err(malformed(format!("unknown query operator {k}"))),
        path => match v.as_object() {
            Some(ops) if !ops.is_empty() && ops.keys().all(|k| k.starts_with('$')) => compile_field(path, ops, negated),
            _ => Ok(field_cmp(path, CmpOp::Eq, literal(v)?, negated)),
        },
    }
}

fn field_cmp(path: &str, op: CmpOp, t: Term, negated: bool) -> Cond {
    Cond::Cmp(path.to_string(), if negated { op.negated() } else { op }, t)
}

fn compile_field(path: &str, ops: &Map<String, Value>, negated: bool) -> Result<Cond, EngineError> {
    let mut parts = Vec::new();
    for (op, arg) in ops {
        parts.push(match op.as_str() {
            "$exists" => {
                let b = arg.as_bool().ok_or_else(|| malformed("$exists needs a boolean"))?;
                Cond::Exists(path.to_string(), b != negated)
            }
            "$all" => {
                let items = arg.as_array().ok_or_else(|| malformed("$all needs an array"))?;
                let terms = items.iter().map(literal).collect::<Result<Vec<_>, _>>()?;
                if negated {
                    Cond::Any(terms.into_iter().map(|t| Cond::Absent(path.to_string(), t)).collect())
                } else {
                    Cond::All(
                        terms
                            .into_iter()
                            .map(|t| Cond::Cmp(path.to_string(), CmpOp::Eq, t))
                            .collect(),
                    )
                }
            }
            "$not" => {
                let inner = arg
                    .as_object()
                    .ok_or_else(|| malformed("$not needs an operator object"))?;
                compile_field(path, inner, !negated)?
            }
            name => {
                let op = cmp_op(name).ok_or_else(|| malformed(format!("unknown field operator {name}")))?;
                field_cmp(path, op, literal(arg)?, negated)
            }
        });
    }
    Ok(both(parts, negated))
}

fn operand(v: &Value) -> Result<Operand, EngineError> {
    match v {
        Value::String(s) if s.starts_with('$') => Ok(Operand::Path(s[1..].to_string())),
        Value::Object(m) if m.len() == 1 && m.contains_key("$literal") => {
            Ok(Operand::Literal(literal(&m["$literal"])?))
        }
        other => Ok(Operand::Literal(literal(other)?)),
    }
}

fn compile_expr(v: &Value, negated: bool) -> Result<Cond, EngineError> {
    match v {
        Value::Bool(b) => Ok(Cond::Const(*b != negated)),
        Value::Object(m) if m.len() == 1 => {
            let (name, args) = m.iter().next().expect("one entry");
            let op = cmp_op(name).ok_or_else(|| malformed(format!("unsupported $expr operator {name}")))?;
            match args.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok(Cond::Expr(
                    if negated { op.negated() } else { op },
                    operand(a)?,
                    operand(b)?,
                )),
                _ => Err(malformed(format!("{name} needs two operands"))),
            }
        }
        _ => Err(malformed(format!("unsupported $expr {v}"))),
    }
}

/// Filter comparison on stored values: equality conflates names and strings,
/// ordering across types is simply false.
fn test(op: CmpOp, a: &Term, b: &Term) -> bool {
    match op {
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
        _ => a.value_cmp(b).is_some_and(|o: Ordering| holds(op, o)),
    }
}

impl Cond {
    pub fn eval(&self, doc: &DocValue) -> bool {
        match self {
            Cond::All(cs) => cs.iter().all(|c| c.eval(doc)),
            Cond::Any(cs) => cs.iter().any(|c| c.eval(doc)),
            Cond::Const(b) => *b,
            Cond::Exists(path, b) => doc.scalars_at(path).is_empty() != *b,
            Cond::Cmp(path, op, t) => doc.scalars_at(path).into_iter().any(|v| test(*op, v, t)),
            Cond::Absent(path, t) => !doc.scalars_at(path).into_iter().any(|v| v == t),
            Cond::Expr(op, a, b) => {
                let vals = |o: &Operand| -> Vec<Term> {
                    match o {
                        Operand::Path(p) => doc.scalars_at(p).into_iter().cloned().collect(),
                        Operand::Literal(t) => vec![t.clone()],
                    }
                };
                let (xs, ys) = (vals(a), vals(b));
                xs.iter().any(|x| ys.iter().any(|y| test(*op, x, y)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Document;
    use serde_json::json;

    fn doc() -> DocValue {
        let mut d = Document::new("s");
        d.fields.insert("n".into(), vec![Term::int(3), Term::int(4)]);
        d.fields.insert("t".into(), vec![Term::text("a")]);
        DocValue::from_document(&d)
    }

    fn ok(c: Value) -> bool {
        compile(&c).unwrap().eval(&doc())
    }

    #[test]
    fn empty_match_accepts_all() {
        assert!(ok(json!({})));
    }

    #[test]
    fn existential_leaves() {
        assert!(ok(json!({"n": 3})));
        assert!(ok(json!({"n": {"$ne": 3}})));
        assert!(ok(json!({"n": {"$gt": 3}})));
        assert!(!ok(json!({"n": {"$gt": 4}})));
        assert!(ok(json!({"n": {"$all": [3, 4]}})));
        assert!(!ok(json!({"n": {"$all": [3, 5]}})));
        assert!(!ok(json!({"t": {"$gt": 1}})));
        assert!(ok(
            json!({"subject_id": "s", "t": {"$exists": true}, "u": {"$exists": false}})
        ));
    }

    #[test]
    fn negation_is_pushed_down() {
        assert!(ok(json!({"$not": {"n": {"$gt": 3}}})));
        assert!(!ok(json!({"$not": {"n": {"$gte": 3}}})));
        assert!(!ok(json!({"$not": {"t": {"$exists": true}}})));
        assert!(ok(json!({"$not": {"$not": {"t": {"$exists": true}}}})));
        assert!(ok(json!({"$not": {"$and": [{"t": "b"}, {"n": 3}]}})));
        assert!(ok(json!({"n": {"$not": {"$gt": 3}}})));
        assert!(!ok(json!({"$not": {"n": {"$all": [3, 4]}}})));
    }

    #[test]
    fn expressions() {
        assert!(ok(json!({"$expr": true})));
        assert!(!ok(json!({"$expr": {"$lt": ["$n", 3]}})));
        assert!(ok(json!({"$expr": {"$lt": ["$n", "$n"]}})));
        assert!(ok(json!({"$expr": {"$lt": [{"$literal": 1}, {"$literal": 2}]}})));
        assert!(!ok(json!({"$not": {"$expr": true}})));
    }

    #[test]
    fn malformed_conditions() {
        for c in [
            json!([]),
            json!({"$where": 1}),
            json!({"n": {"$regex": "x"}}),
            json!({"$and": 1}),
        ] {
            assert!(matches!(compile(&c), Err(EngineError::MalformedPipeline(_))), "{c}");
        }
    }
}
