use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::model::Term;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// `SELECT *`
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Ge,
    Lt,
    Le,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CmpOp> {
        Some(match s {
            "=" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            _ => return None,
        })
    }

    /// The operator with its operands swapped: `a < b` iff `b > a`.
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Le => CmpOp::Ge,
            other => other,
        }
    }

    /// The complement: `!(a < b)` iff `a >= b` on comparable values.
    pub fn negated(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterExpr {
    Exists(Term),
    NotExists(Term),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
    Compare(CmpOp, Term, Term),
}

impl FilterExpr {
    pub fn and(a: FilterExpr, b: FilterExpr) -> Self {
        FilterExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: FilterExpr, b: FilterExpr) -> Self {
        FilterExpr::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: FilterExpr) -> Self {
        FilterExpr::Not(Box::new(a))
    }

    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Self {
        FilterExpr::Compare(op, lhs, rhs)
    }

    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            FilterExpr::Exists(t) | FilterExpr::NotExists(t) => out.extend(t.as_variable()),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            FilterExpr::Not(a) => a.collect_vars(out),
            FilterExpr::Compare(_, l, r) => {
                out.extend(l.as_variable());
                out.extend(r.as_variable());
            }
        }
    }
}

impl fmt::Display for FilterExpr {
    /// Fully parenthesized so that printing and re-parsing yields the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterExpr::Exists(t) => write!(f, "EXISTS({t})"),
            FilterExpr::NotExists(t) => write!(f, "NOT EXISTS({t})"),
            FilterExpr::And(a, b) => write!(f, "({a} && {b})"),
            FilterExpr::Or(a, b) => write!(f, "({a} || {b})"),
            FilterExpr::Not(a) => write!(f, "!{a}"),
            FilterExpr::Compare(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderKey {
    pub variable: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierSet {
    pub order_by: Option<OrderKey>,
    pub limit: Option<u64>,
    pub offset: Option<u64>,
    pub has_filter: bool,
}

impl ModifierSet {
    /// ORDER BY, LIMIT or OFFSET present. FILTER does not count.
    pub fn any(&self) -> bool {
        self.order_by.is_some() || self.limit.is_some() || self.offset.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryAst {
    pub projection: Projection,
    pub patterns: Vec<TriplePattern>,
    pub optional_blocks: Vec<Vec<TriplePattern>>,
    pub filter: Option<FilterExpr>,
    pub modifiers: ModifierSet,
}

impl QueryAst {
    /// Required patterns followed by every optional block, in query order.
    pub fn all_patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.patterns.iter().chain(self.optional_blocks.iter().flatten())
    }

    /// Variables bound by patterns, in order of first appearance.
    pub fn pattern_variables(&self) -> Vec<String> {
        let mut seen = IndexSet::new();
        for p in self.all_patterns() {
            for t in p.terms() {
                if let Some(v) = t.as_variable() {
                    seen.insert(v.to_string());
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Every variable mentioned anywhere in the query.
    pub fn all_variables(&self) -> Vec<String> {
        let mut seen: IndexSet<String> = self.pattern_variables().into_iter().collect();
        if let Some(f) = &self.filter {
            seen.extend(f.variables().into_iter().map(str::to_string));
        }
        seen.into_iter().collect()
    }

    /// Result columns: the SELECT list, or every pattern variable for `SELECT *`.
    pub fn projected_variables(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.pattern_variables(),
            Projection::Vars(vs) => vs.clone(),
        }
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, patterns: &[TriplePattern]) -> fmt::Result {
    for p in patterns {
        write!(f, " {p} .")?;
    }
    Ok(())
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT")?;
        match &self.projection {
            Projection::All => f.write_str(" *")?,
            Projection::Vars(vs) => {
                for v in vs {
                    write!(f, " ?{v}")?;
                }
            }
        }
        f.write_str(" WHERE {")?;
        write_block(f, &self.patterns)?;
        for block in &self.optional_blocks {
            f.write_str(" OPTIONAL {")?;
            write_block(f, block)?;
            f.write_str(" }")?;
        }
        if let Some(filter) = &self.filter {
            write!(f, " FILTER {filter}")?;
        }
        f.write_str(" }")?;
        if let Some(key) = &self.modifiers.order_by {
            let dir = match key.direction {
                Direction::Asc => "ASC",
                Direction::Desc => "DESC",
            };
            write!(f, " ORDER BY {dir}(?{})", key.variable)?;
        }
        if let Some(n) = self.modifiers.limit {
            write!(f, " LIMIT {n}")?;
        }
        if let Some(n) = self.modifiers.offset {
            write!(f, " OFFSET {n}")?;
        }
        Ok(())
    }
}
