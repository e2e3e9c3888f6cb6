use serde_json::{json, Map, Value};

use super::MqlError;
use crate::model::Term;
use crate::ntriples::term_to_json;
use crate::sparql::{CmpOp, FilterExpr};

pub(crate) fn op_name(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "$eq",
        CmpOp::Ne => "$ne",
        CmpOp::Gt => "$gt",
        CmpOp::Ge => "$gte",
        CmpOp::Lt => "$lt",
        CmpOp::Le => "$lte",
    }
}

/// Match fragment for a filter, keyed by variable name.
///
/// `?a = 1` becomes `{"a": {"$eq": 1}}`. A literal on the left flips the
/// operator. Comparisons between two variables or two literals have no field
/// form and become `$expr` fragments.
pub fn translate_expression(e: &FilterExpr) -> Result<Value, MqlError> {
    translate_expression_with(e, &|v: &str| Some(v.to_string()))
}

/// Like [`translate_expression`] with variables mapped to document paths.
pub fn translate_expression_with(e: &FilterExpr, resolve: &dyn Fn(&str) -> Option<String>) -> Result<Value, MqlError> {
    let path = |t: &Term| -> Result<Option<String>, MqlError> {
        match t.as_variable() {
            Some(v) => resolve(v)
                .map(Some)
                .ok_or_else(|| MqlError::UnsupportedExpression(format!("variable ?{v} has no document path"))),
            None => Ok(None),
        }
    };
    Ok(match e {
        FilterExpr::Exists(t) | FilterExpr::NotExists(t) => {
            let present = matches!(e, FilterExpr::Exists(_));
            match path(t)? {
                Some(p) => single(p, json!({ "$exists": present })),
                None => json!({ "$expr": present }),
            }
        }
        FilterExpr::And(a, b) => {
            json!({ "$and": [translate_expression_with(a, resolve)?, translate_expression_with(b, resolve)?] })
        }
        FilterExpr::Or(a, b) => {
            json!({ "$or": [translate_expression_with(a, resolve)?, translate_expression_with(b, resolve)?] })
        }
        FilterExpr::Not(a) => json!({ "$not": translate_expression_with(a, resolve)? }),
        FilterExpr::Compare(op, l, r) => match (path(l)?, path(r)?) {
            (Some(p), None) => single(p, single(op_name(*op).to_string(), term_to_json(r))),
            (None, Some(p)) => single(p, single(op_name(op.flipped()).to_string(), term_to_json(l))),
            (Some(a), Some(b)) => json!({ "$expr": { op_name(*op): [format!("${a}"), format!("${b}")] } }),
            (None, None) => {
                json!({ "$expr": { op_name(*op): [{ "$literal": term_to_json(l) }, { "$literal": term_to_json(r) }] } })
            }
        },
    })
}

fn single(key: String, value: Value) -> Value {
    let mut m = Map::new();
    m.insert(key, value);
    Value::Object(m)
}
