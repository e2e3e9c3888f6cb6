//! FILTER evaluation with three-valued logic.
//!
//! `Ok(None)` is the SPARQL error value (an unbound operand) and drops the
//! row. Ordering two values of different types is a query-level error.

use std::cmp::Ordering;

use super::EngineError;
use crate::model::Term;
use crate::sparql::{CmpOp, FilterExpr};

pub type Truth = Option<bool>;

pub fn eval_filter(e: &FilterExpr, lookup: &dyn Fn(&str) -> Option<Term>) -> Result<Truth, EngineError> {
    let value = |t: &Term| match t.as_variable() {
        Some(v) => lookup(v),
        None => Some(t.clone()),
    };
    Ok(match e {
        FilterExpr::Exists(t) => Some(value(t).is_some()),
        FilterExpr::NotExists(t) => Some(value(t).is_none()),
        FilterExpr::And(a, b) => {
            let (a, b) = (eval_filter(a, lookup)?, eval_filter(b, lookup)?);
            match (a, b) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            }
        }
        FilterExpr::Or(a, b) => {
            let (a, b) = (eval_filter(a, lookup)?, eval_filter(b, lookup)?);
            match (a, b) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            }
        }
        FilterExpr::Not(a) => eval_filter(a, lookup)?.map(|b| !b),
        FilterExpr::Compare(op, l, r) => match (value(l), value(r)) {
            (Some(l), Some(r)) => Some(compare(*op, &l, &r)?),
            _ => None,
        },
    })
}

pub fn compare(op: CmpOp, l: &Term, r: &Term) -> Result<bool, EngineError> {
    match op {
        CmpOp::Eq => Ok(l == r),
        CmpOp::Ne => Ok(l != r),
        _ => {
            let ord = l
                .value_cmp(r)
                .ok_or_else(|| EngineError::Eval(format!("cannot compare {l} {} {r}", op.symbol())))?;
            Ok(holds(op, ord))
        }
    }
}

pub(crate) fn holds(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Eq => ord.is_eq(),
        CmpOp::Ne => ord.is_ne(),
        CmpOp::Gt => ord.is_gt(),
        CmpOp::Ge => ord.is_ge(),
        CmpOp::Lt => ord.is_lt(),
        CmpOp::Le => ord.is_le(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(v: &str) -> Option<Term> {
        match v {
            "n" => Some(Term::int(5)),
            "s" => Some(Term::text("abc")),
            "x" => Some(Term::name("CISPLATIN")),
            _ => None,
        }
    }

    fn ev(e: &FilterExpr) -> Result<Truth, EngineError> {
        eval_filter(e, &env)
    }

    #[test]
    fn comparisons() {
        let gt = FilterExpr::cmp(CmpOp::Gt, Term::var("n"), Term::int(3));
        assert_eq!(ev(&gt).unwrap(), Some(true));
        let eq = FilterExpr::cmp(CmpOp::Eq, Term::var("x"), Term::text("CISPLATIN"));
        assert_eq!(ev(&eq).unwrap(), Some(true));
        let ne = FilterExpr::cmp(CmpOp::Ne, Term::var("s"), Term::int(1));
        assert_eq!(ev(&ne).unwrap(), Some(true));
        let bad = FilterExpr::cmp(CmpOp::Lt, Term::var("s"), Term::int(1));
        assert!(matches!(ev(&bad), Err(EngineError::Eval(_))));
    }

    #[test]
    fn unbound_is_error_value() {
        let e = FilterExpr::cmp(CmpOp::Eq, Term::var("missing"), Term::int(1));
        assert_eq!(ev(&e).unwrap(), None);
        assert_eq!(ev(&FilterExpr::not(e.clone())).unwrap(), None);
        let f = FilterExpr::cmp(CmpOp::Eq, Term::var("n"), Term::int(6));
        let t = FilterExpr::cmp(CmpOp::Eq, Term::var("n"), Term::int(5));
        assert_eq!(ev(&FilterExpr::and(e.clone(), f.clone())).unwrap(), Some(false));
        assert_eq!(ev(&FilterExpr::and(e.clone(), t.clone())).unwrap(), None);
        assert_eq!(ev(&FilterExpr::or(e.clone(), t)).unwrap(), Some(true));
        assert_eq!(ev(&FilterExpr::or(e, f)).unwrap(), None);
    }

    #[test]
    fn exists() {
        assert_eq!(ev(&FilterExpr::Exists(Term::var("n"))).unwrap(), Some(true));
        assert_eq!(ev(&FilterExpr::NotExists(Term::var("zz"))).unwrap(), Some(true));
        assert_eq!(ev(&FilterExpr::Exists(Term::int(1))).unwrap(), Some(true));
    }
}
