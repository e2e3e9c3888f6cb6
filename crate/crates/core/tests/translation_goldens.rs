//! Expression and join-pattern translations, transcribed row by row.

mod common;

use common::goldens::{check_pattern_row, expression_table, PATTERN_ROWS};
use symphony::model::Term;
use symphony::mql::translate_expression;
use symphony::sparql::{CmpOp, FilterExpr};

#[test]
fn expression_table_rows() {
    let rows = expression_table();
    assert_eq!(rows.len(), 11);
    for (row, got, expected) in rows {
        assert_eq!(got, expected, "row {row}");
    }
}

#[test]
fn comparisons_against_constants_use_field_form() {
    let tr = |e: FilterExpr| translate_expression(&e).unwrap().to_string();
    assert_eq!(
        tr(FilterExpr::cmp(CmpOp::Ge, Term::var("e1"), Term::int(3))),
        r#"{"e1":{"$gte":3}}"#
    );
    assert_eq!(
        tr(FilterExpr::cmp(CmpOp::Ge, Term::int(3), Term::var("e1"))),
        r#"{"e1":{"$lte":3}}"#
    );
}

#[test]
fn join_pattern_rows() {
    for (patterns, expected) in PATTERN_ROWS {
        if let Err(e) = check_pattern_row(patterns, expected) {
            panic!("{patterns}: {e}");
        }
    }
}
