use std::cmp::Ordering;
use std::collections::HashMap;

use super::filter::eval_filter;
use super::EngineError;
use crate::model::{cmp_opt_terms, cmp_rows, KnowledgeGraph, ResultSet, Row, Term};
use crate::sparql::{Direction, OrderKey, QueryAst, TriplePattern};

/// Variable-indexed partial solutions.
struct Table {
    rows: Vec<Row>,
    /// Columns bound in every row.
    always: Vec<usize>,
}

/// Evaluates a query over the graph.
///
/// Required patterns are hash-joined, each OPTIONAL block is left-outer-joined
/// in order, the FILTER runs over the combined rows, then ORDER BY, OFFSET,
/// LIMIT and projection. Duplicates are kept.
pub fn eval_sparql(g: &KnowledgeGraph, ast: &QueryAst) -> Result<ResultSet, EngineError> {
    let vars = ast.all_variables();
    let col: HashMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let width = vars.len();

    let mut table = eval_bgp(g, &ast.patterns, &col, width);
    for block in &ast.optional_blocks {
        let right = eval_bgp(g, block, &col, width);
        table = left_join(table, right);
    }

    let mut rows = table.rows;
    if let Some(f) = &ast.filter {
        let mut kept = Vec::with_capacity(rows.len());
        for row in rows {
            let lookup = |v: &str| col.get(v).and_then(|&i| row[i].clone());
            if eval_filter(f, &lookup)? == Some(true) {
                kept.push(row);
            }
        }
        rows = kept;
    }

    let projection = ast.projected_variables();
    let proj_cols: Vec<Option<usize>> = projection.iter().map(|v| col.get(v.as_str()).copied()).collect();
    let project = |r: &Row| -> Row { proj_cols.iter().map(|c| c.and_then(|i| r[i].clone())).collect() };
    let out: Vec<Row> = rows.iter().map(project).collect();

    let m = &ast.modifiers;
    let k = m
        .order_by
        .as_ref()
        .and_then(|key| col.get(key.variable.as_str()).copied());
    let keyed = rows
        .iter()
        .zip(out)
        .map(|(full, p)| (k.and_then(|i| full[i].clone()), p))
        .collect();
    let out = apply_modifiers(keyed, m.order_by.as_ref(), m.offset, m.limit);

    Ok(ResultSet {
        variables: projection,
        rows: out,
        ordered: m.order_by.is_some(),
    })
}

/// ORDER BY, then OFFSET, then LIMIT over solutions. Each projected row is
/// paired with its sort key; ties fall back to the projected row.
pub fn apply_modifiers(
    mut keyed: Vec<(Option<Term>, Row)>,
    order: Option<&OrderKey>,
    offset: Option<u64>,
    limit: Option<u64>,
) -> Vec<Row> {
    if let Some(key) = order {
        keyed.sort_by(|(ka, ra), (kb, rb)| order_keys(ka, kb, key.direction).then_with(|| cmp_rows(ra, rb)));
    }
    let mut out: Vec<Row> = keyed.into_iter().map(|(_, r)| r).collect();
    let offset = offset.unwrap_or(0).min(out.len() as u64) as usize;
    out.drain(..offset);
    if let Some(limit) = limit {
        out.truncate(limit.min(out.len() as u64) as usize);
    }
    out
}

/// Unbound keys come first in either direction.
pub fn order_keys(a: &Option<Term>, b: &Option<Term>, dir: Direction) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) if dir == Direction::Desc => y.total_cmp(x),
        _ => cmp_opt_terms(a, b),
    }
}

fn eval_bgp(g: &KnowledgeGraph, patterns: &[TriplePattern], col: &HashMap<&str, usize>, width: usize) -> Table {
    let mut table = Table {
        rows: vec![vec![None; width]],
        always: Vec::new(),
    };
    for p in patterns {
        let right = match_pattern(g, p, col, width);
        table = hash_join(table, right);
    }
    table
}

fn match_pattern(g: &KnowledgeGraph, p: &TriplePattern, col: &HashMap<&str, usize>, width: usize) -> Table {
    let terms = p.terms();
    let slots: Vec<Option<usize>> = terms.iter().map(|t| t.as_variable().map(|v| col[v])).collect();
    let mut rows = Vec::new();
    'triples: for t in g
        .matching(konst(&p.subject), konst(&p.predicate), konst(&p.object))
        .into_iter()
    {
        let mut row: Row = vec![None; width];
        for (slot, value) in slots.iter().zip([&t.subject, &t.predicate, &t.object]) {
            if let Some(i) = *slot {
                match &row[i] {
                    Some(prev) if prev != value => continue 'triples,
                    _ => row[i] = Some(value.clone()),
                }
            }
        }
        rows.push(row);
    }
    let mut always: Vec<usize> = slots.into_iter().flatten().collect();
    always.sort_unstable();
    always.dedup();
    Table { rows, always }
}

fn konst(t: &Term) -> Option<&Term> {
    (!t.is_variable()).then_some(t)
}

fn key_of(row: &Row, cols: &[usize]) -> Vec<Term> {
    cols.iter()
        .map(|&i| row[i].clone().expect("always-bound column"))
        .collect()
}

fn compatible(a: &Row, b: &Row) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    })
}

fn merge(a: &Row, b: &Row) -> Row {
    a.iter().zip(b).map(|(x, y)| x.clone().or_else(|| y.clone())).collect()
}

fn index(right: &Table, shared: &[usize]) -> HashMap<Vec<Term>, Vec<usize>> {
    let mut idx: HashMap<Vec<Term>, Vec<usize>> = HashMap::new();
    for (i, r) in right.rows.iter().enumerate() {
        idx.entry(key_of(r, shared)).or_default().push(i);
    }
    idx
}

fn shared_cols(left: &Table, right: &Table) -> Vec<usize> {
    left.always
        .iter()
        .copied()
        .filter(|c| right.always.contains(c))
        .collect()
}

fn hash_join(left: Table, right: Table) -> Table {
    let shared = shared_cols(&left, &right);
    let idx = index(&right, &shared);
    let mut rows = Vec::new();
    for l in &left.rows {
        if let Some(matches) = idx.get(&key_of(l, &shared)) {
            for &i in matches {
                let r = &right.rows[i];
                if compatible(l, r) {
                    rows.push(merge(l, r));
                }
            }
        }
    }
    let mut always = left.always;
    always.extend(right.always);
    always.sort_unstable();
    always.dedup();
    Table { rows, always }
}

fn left_join(left: Table, right: Table) -> Table {
    let shared = shared_cols(&left, &right);
    let idx = index(&right, &shared);
    let mut rows = Vec::new();
    for l in &left.rows {
        let before = rows.len();
        if let Some(matches) = idx.get(&key_of(l, &shared)) {
            for &i in matches {
                let r = &right.rows[i];
                if compatible(l, r) {
                    rows.push(merge(l, r));
                }
            }
        }
        if rows.len() == before {
            rows.push(l.clone());
        }
    }
    Table {
        rows,
        always: left.always,
    }
}
