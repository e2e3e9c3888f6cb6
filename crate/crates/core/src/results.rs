//! SPARQL query results in the standard JSON format.
//!
//! Names become `uri` (or `bnode` for `_:` labels), strings plain literals
//! and numbers typed literals. `results.ordered` carries the result set's
//! ordered flag.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{Number, ResultSet, Term};

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed results document: {0}")]
pub struct ResultsError(pub String);

fn bad(msg: impl Into<String>) -> ResultsError {
    ResultsError(msg.into())
}

pub fn term_to_binding(t: &Term) -> Value {
    match t {
        Term::Name(s) => match s.strip_prefix("_:") {
            Some(label) => json!({ "type": "bnode", "value": label }),
            None => json!({ "type": "uri", "value": s }),
        },
        Term::Text(s) => json!({ "type": "literal", "value": s }),
        Term::Number(n) => {
            let lex = n.lexical();
            let dt = if lex.contains(['e', 'E']) {
                "double"
            } else if lex.contains('.') {
                "decimal"
            } else {
                "integer"
            };
            json!({ "type": "literal", "value": lex, "datatype": format!("{XSD}{dt}") })
        }
        Term::Variable(v) => json!({ "type": "literal", "value": format!("?{v}") }),
    }
}

pub fn term_from_binding(v: &Value) -> Result<Term, ResultsError> {
    let kind = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("binding without type"))?;
    let value = v
        .get("value")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("binding without value"))?;
    match kind {
        "uri" => Ok(Term::Name(value.to_string())),
        "bnode" => Ok(Term::Name(format!("_:{value}"))),
        "literal" | "typed-literal" => {
            let numeric = v
                .get("datatype")
                .and_then(Value::as_str)
                .and_then(|d| d.strip_prefix(XSD))
                .is_some_and(|local| {
                    matches!(
                        local,
                        "integer" | "int" | "long" | "short" | "decimal" | "double" | "float"
                    )
                });
            if numeric {
                if let Some(n) = Number::parse(value.trim()) {
                    return Ok(Term::Number(n));
                }
            }
            Ok(Term::Text(value.to_string()))
        }
        other => Err(bad(format!("unknown binding type {other:?}"))),
    }
}

pub fn to_json(rs: &ResultSet) -> Value {
    let bindings: Vec<Value> = rs
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            for (var, cell) in rs.variables.iter().zip(row) {
                if let Some(t) = cell {
                    m.insert(var.clone(), term_to_binding(t));
                }
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "head": { "vars": rs.variables },
        "results": { "ordered": rs.ordered, "bindings": bindings },
    })
}

pub fn to_json_string(rs: &ResultSet) -> String {
    serde_json::to_string_pretty(&to_json(rs)).expect("results serialize")
}

pub fn from_json(v: &Value) -> Result<ResultSet, ResultsError> {
    let vars: Vec<String> = v
        .pointer("/head/vars")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing head.vars"))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| bad("variable names must be strings"))
        })
        .collect::<Result<_, _>>()?;
    let results = v.get("results").ok_or_else(|| bad("missing results"))?;
    let ordered = results.get("ordered").and_then(Value::as_bool).unwrap_or(false);
    let bindings = results
        .get("bindings")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing results.bindings"))?;
    let mut rs = ResultSet::new(vars);
    rs.ordered = ordered;
    for b in bindings {
        let m = b.as_object().ok_or_else(|| bad("binding row must be an object"))?;
        let row = rs
            .variables
            .iter()
            .map(|var| m.get(var).map(term_from_binding).transpose())
            .collect::<Result<_, _>>()?;
        rs.rows.push(row);
    }
    Ok(rs)
}

pub fn from_json_str(text: &str) -> Result<ResultSet, ResultsError> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_kinds() {
        let mut rs = ResultSet::new(vec!["a".into(), "b".into()]);
        rs.rows
            .push(vec![Some(Term::name("CISPLATIN")), Some(Term::text("Q20Q"))]);
        rs.rows.push(vec![Some(Term::name("_:b0")), None]);
        rs.rows.push(vec![
            Some(Term::int(305)),
            Some(Term::Number(Number::parse("2.50").unwrap())),
        ]);
        rs.ordered = true;
        let back = from_json_str(&to_json_string(&rs)).unwrap();
        assert_eq!(back, rs);
        for (a, b) in back.rows.iter().flatten().zip(rs.rows.iter().flatten()) {
            match (a, b) {
                (Some(a), Some(b)) => assert!(a.identical(b)),
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn reads_endpoint_output() {
        let text = r#"{"head":{"vars":["x","n"]},"results":{"bindings":[
            {"x":{"type":"uri","value":"http://ex.org/a"},"n":{"type":"typed-literal","datatype":"http://www.w3.org/2001/XMLSchema#integer","value":"7"}},
            {"x":{"type":"literal","value":"hi","xml:lang":"en"}}]}}"#;
        let rs = from_json_str(text).unwrap();
        assert_eq!(
            rs.rows[0],
            vec![Some(Term::name("http://ex.org/a")), Some(Term::int(7))]
        );
        assert_eq!(rs.rows[1], vec![Some(Term::text("hi")), None]);
        assert!(!rs.ordered);
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_json_str("{}").is_err());
        assert!(from_json_str(
            r#"{"head":{"vars":["x"]},"results":{"bindings":[{"x":{"type":"weird","value":"1"}}]}}"#
        )
        .is_err());
    }
}
