//! Transcribed expected outputs: benchmark feature rows, the expression
//! table and the join-pattern table.

use serde_json::Value;
use symphony::model::Term;
use symphony::mql::{translate, translate_expression, StageKind};
use symphony::shape::Shape;
use symphony::sparql::{parse_query, CmpOp, FilterExpr};

use Shape::{SingleTriplePattern as STP, SubjectObject as SO, SubjectSubject as SS, TreeLike as CO};

/// (query, shape, OPT, Fil, ORD, Lim, OFF)
pub const LABEL_ROWS: [(&str, Shape, bool, bool, bool, bool, bool); 17] = [
    ("Allie-Q1", STP, false, false, false, false, false),
    ("Allie-Q2", STP, false, true, false, false, false),
    ("Allie-Q3", SS, false, false, false, false, false),
    ("Allie-Q4", SO, false, false, false, true, false),
    ("Allie-Q5", SS, false, false, true, true, false),
    ("Cellcycle-Q1", CO, false, false, false, false, false),
    ("Cellcycle-Q2", CO, true, false, false, false, false),
    ("Cellcycle-Q3", CO, false, false, false, false, false),
    ("Cellcycle-Q4", CO, false, false, false, false, false),
    ("Cellcycle-Q5", SS, true, false, false, false, false),
    ("DrugBank-Q1", SS, true, false, false, true, false),
    ("DrugBank-Q2", SS, true, false, true, true, true),
    ("DrugBank-Q3", CO, false, false, false, false, false),
    ("DrugBank-Q4", CO, false, false, false, false, false),
    ("DrugBank-Q5", CO, false, false, false, true, false),
    ("LinkedSPL-Q1", SS, false, false, false, true, false),
    ("LinkedSPL-Q2", CO, false, false, true, true, true),
];

fn compact(v: &Value) -> String {
    v.to_string()
}

/// `{...}` contents of a one-key fragment, for splicing into templates.
fn inner(v: &Value) -> String {
    let s = compact(v);
    s[1..s.len() - 1].to_string()
}

/// (row, got, expected) for each of the eleven expression forms.
pub fn expression_table() -> Vec<(String, String, String)> {
    let tr = |e: &FilterExpr| compact(&translate_expression(e).unwrap());
    let e1 = FilterExpr::Exists(Term::var("e1"));
    let e2 = FilterExpr::cmp(CmpOp::Gt, Term::var("e2"), Term::int(7));
    let i1 = inner(&translate_expression(&e1).unwrap());
    let i2 = inner(&translate_expression(&e2).unwrap());
    let mut rows = vec![
        (
            "Exists",
            tr(&FilterExpr::Exists(Term::var("e1"))),
            r#"{"e1":{"$exists":true}}"#.to_string(),
        ),
        (
            "Not Exists",
            tr(&FilterExpr::NotExists(Term::var("e1"))),
            r#"{"e1":{"$exists":false}}"#.to_string(),
        ),
        (
            "&&",
            tr(&FilterExpr::and(e1.clone(), e2.clone())),
            format!(r#"{{"$and":[{{{i1}}},{{{i2}}}]}}"#),
        ),
        (
            "||",
            tr(&FilterExpr::or(e1.clone(), e2.clone())),
            format!(r#"{{"$or":[{{{i1}}},{{{i2}}}]}}"#),
        ),
        ("!", tr(&FilterExpr::not(e1.clone())), format!(r#"{{"$not":{{{i1}}}}}"#)),
    ];
    // {$op:[<e1>,<e2>]}; the array form is only valid MQL under $expr
    for (op, sym, name) in [
        (CmpOp::Eq, "=", "$eq"),
        (CmpOp::Ne, "!=", "$ne"),
        (CmpOp::Gt, ">", "$gt"),
        (CmpOp::Ge, ">=", "$gte"),
        (CmpOp::Lt, "<", "$lt"),
        (CmpOp::Le, "<=", "$lte"),
    ] {
        rows.push((
            sym,
            tr(&FilterExpr::cmp(op, Term::var("e1"), Term::var("e2"))),
            format!(r#"{{"$expr":{{"{name}":["$e1","$e2"]}}}}"#),
        ));
    }
    rows.into_iter().map(|(n, g, e)| (n.to_string(), g, e)).collect()
}

/// (join pattern, expected stages before the trailing projection)
pub const PATTERN_ROWS: [(&str, &str); 12] = [
    // single triple pattern
    (
        r#"subject predicate "object" ."#,
        r#"[{"$match":{"subject_id":"subject","predicate":"object"}}]"#,
    ),
    (
        r#"?subject predicate "object" ."#,
        r#"[{"$match":{"subject_id":{"$exists":true},"predicate":"object"}}]"#,
    ),
    (
        r#"subject predicate ?object ."#,
        r#"[{"$match":{"subject_id":"subject","predicate":{"$exists":true}}}]"#,
    ),
    // subject-subject
    (
        r#"?subject predicate1 "object1" . ?subject predicate2 "object2" ."#,
        r#"[{"$match":{"subject_id":{"$exists":true},"predicate1":"object1","predicate2":"object2"}}]"#,
    ),
    (
        r#"?subject predicate1 ?object1 . ?subject predicate2 "object2" ."#,
        r#"[{"$match":{"subject_id":{"$exists":true},"predicate1":{"$exists":true},"predicate2":"object2"}}]"#,
    ),
    // object1 is a constant, so it is matched by value
    (
        r#"subject predicate1 "object1" . subject predicate2 "object2" ."#,
        r#"[{"$match":{"subject_id":"subject","predicate1":"object1","predicate2":"object2"}}]"#,
    ),
    // subject-object
    (
        r#"?subject predicate1 ?object1 . ?object1 predicate2 "object2" ."#,
        r#"[{"$match":{"subject_id":{"$exists":true}}},{"$lookup":{"from":"colc_name","localField":"predicate1","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate2":"object2"}}]"#,
    ),
    (
        r#"?subject predicate1 ?object1 . ?object1 predicate2 ?object2 ."#,
        r#"[{"$match":{"subject_id":{"$exists":true}}},{"$lookup":{"from":"colc_name","localField":"predicate1","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate2":{"$exists":true}}}]"#,
    ),
    (
        r#"subject predicate1 ?object1 . ?object1 predicate2 ?object2 ."#,
        r#"[{"$match":{"subject_id":"subject"}},{"$lookup":{"from":"colc_name","localField":"predicate1","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate2":{"$exists":true}}}]"#,
    ),
    // tree-like
    (
        r#"?subject predicate1 ?object1 . ?subject predicate2 ?object2 . ?object2 predicate3 "object3" ."#,
        r#"[{"$match":{"subject_id":{"$exists":true},"predicate1":{"$exists":true},"predicate2":{"$exists":true}}},{"$lookup":{"from":"colc_name","localField":"predicate2","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate3":"object3"}}]"#,
    ),
    (
        r#"subject predicate1 "object1" . subject predicate2 ?object2 . ?object2 predicate3 ?object3 ."#,
        r#"[{"$match":{"subject_id":"subject","predicate1":"object1","predicate2":{"$exists":true}}},{"$lookup":{"from":"colc_name","localField":"predicate2","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate3":{"$exists":true}}}]"#,
    ),
    (
        r#"subject predicate1 ?object1 . ?object1 predicate2 ?object2 . ?object1 predicate3 "object3" ."#,
        r#"[{"$match":{"subject_id":"subject","predicate1":{"$exists":true}}},{"$lookup":{"from":"colc_name","localField":"predicate1","foreignField":"subject_id","as":"join_field"}},{"$match":{"join_field.predicate2":{"$exists":true},"join_field.predicate3":"object3"}}]"#,
    ),
];

/// Checks one join-pattern row: exact stages, then a projection that
/// covers every variable's home. Returns a description of the first defect.
pub fn check_pattern_row(patterns: &str, expected: &str) -> Result<(), String> {
    let ast = parse_query(&format!("SELECT * WHERE {{ {patterns} }}")).map_err(|e| e.to_string())?;
    let t = translate(&ast, "colc_name").map_err(|e| e.to_string())?;
    let (last, body) = t.pipeline.stages.split_last().ok_or("empty pipeline")?;
    let body = compact(&Value::Array(body.iter().map(|s| s.to_json()).collect()));
    if body != expected {
        return Err(format!("got {body}"));
    }
    if last.kind != StageKind::Project {
        return Err(format!("last stage is {}", last));
    }
    for v in ast.pattern_variables() {
        let home = t.plan.home_path(&v).ok_or(format!("?{v} has no home"))?;
        if last.body.get(&home).is_none() {
            return Err(format!("?{v} at {home} not projected"));
        }
    }
    Ok(())
}
