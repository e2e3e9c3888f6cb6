//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

pub mod goldens;
pub mod oracle;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symphony::model::{KnowledgeGraph, Number, Term, Triple};
use symphony::sparql::{CmpOp, Direction, FilterExpr, ModifierSet, OrderKey, Projection, QueryAst, TriplePattern};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const MINI_KG: &str = include_str!("../../data/mini_kg.nt");
pub const MINI_QUERIES: &str = include_str!("../../data/mini_kg_queries.rq");
pub const TABLE3_QUERIES: &str = include_str!("../../data/table3_queries.rq");

// ---------------------------------------------------------------------------
// Typed vocabulary for equivalence runs. Predicates fix the object type so
// generated filters never order values of different kinds.

pub const SUBJECTS: usize = 8;
pub const LINKS: [&str; 2] = ["link", "ref"];
pub const NUM: &str = "num";
pub const TAG: &str = "tag";
pub const TAGS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Node,
    Int,
    Text,
}

pub fn subject(i: usize) -> Term {
    Term::name(format!("s{i}"))
}

fn pick_subject(r: &mut impl Rng) -> Term {
    subject(r.gen_range(0..SUBJECTS))
}

fn pick_predicate(r: &mut impl Rng) -> &'static str {
    [LINKS[0], LINKS[1], NUM, TAG].choose(r).unwrap()
}

fn kind_of(pred: &str) -> Kind {
    match pred {
        NUM => Kind::Int,
        TAG => Kind::Text,
        _ => Kind::Node,
    }
}

fn constant(r: &mut impl Rng, kind: Kind) -> Term {
    match kind {
        // string spelling of a subject joins like the name itself
        Kind::Node if r.gen_bool(0.15) => Term::text(format!("s{}", r.gen_range(0..SUBJECTS))),
        Kind::Node => pick_subject(r),
        Kind::Int => Term::int(r.gen_range(0..6)),
        Kind::Text => Term::text(*TAGS.choose(r).unwrap()),
    }
}

pub fn random_graph(r: &mut impl Rng, max_triples: usize) -> KnowledgeGraph {
    let n = r.gen_range(0..=max_triples);
    let mut g = KnowledgeGraph::new();
    for _ in 0..n {
        let p = pick_predicate(r);
        let o = constant(r, kind_of(p));
        g.insert(Triple::new(pick_subject(r), Term::name(p), o).unwrap());
    }
    g
}

/// A single-source acyclic conjunctive query over the typed vocabulary,
/// optionally with a FILTER over its variables.
pub fn random_tree_query(r: &mut impl Rng, max_patterns: usize, with_filter: bool) -> QueryAst {
    let n = r.gen_range(1..=max_patterns);
    let root = if r.gen_bool(0.85) {
        Term::var("v0")
    } else {
        pick_subject(r)
    };
    // variables that may act as subjects, with their kind
    let mut vars: Vec<(String, Kind)> = Vec::new();
    if let Some(v) = root.as_variable() {
        vars.push((v.to_string(), Kind::Node));
    }
    let mut edges: Vec<(Term, Term)> = Vec::new();
    let mut patterns = Vec::new();
    let mut fresh = 1;
    // chains grow from the newest node variable
    let chain = r.gen_bool(0.25);
    for i in 0..n {
        let node_vars: Vec<&String> = vars.iter().filter(|(_, k)| *k == Kind::Node).map(|(v, _)| v).collect();
        if chain && i + 1 < n {
            let s = node_vars
                .last()
                .map(|v| Term::var(v.as_str()))
                .unwrap_or_else(|| root.clone());
            let v = format!("v{fresh}");
            fresh += 1;
            vars.push((v.clone(), Kind::Node));
            edges.push((s.clone(), Term::var(v.as_str())));
            patterns.push(TriplePattern::new(
                s,
                Term::name(*LINKS.choose(r).unwrap()),
                Term::var(v),
            ));
            continue;
        }
        let s = if chain {
            node_vars
                .last()
                .map(|v| Term::var(v.as_str()))
                .unwrap_or_else(|| root.clone())
        } else if root.is_variable() || r.gen_bool(0.6) {
            match node_vars.choose(r) {
                Some(v) if r.gen_bool(0.9) || !root.is_variable() => Term::var(v.as_str()),
                _ => root.clone(),
            }
        } else {
            root.clone()
        };
        let p = pick_predicate(r);
        let kind = kind_of(p);
        let o = match r.gen_range(0..10) {
            0..=4 => {
                let v = format!("v{fresh}");
                fresh += 1;
                vars.push((v.clone(), kind));
                Term::var(v)
            }
            5..=7 => constant(r, kind),
            _ => {
                // reuse an existing same-kind variable unless that closes a cycle
                let same: Vec<String> = vars
                    .iter()
                    .filter(|(v, k)| {
                        *k == kind && Some(v.as_str()) != s.as_variable() && Some(v.as_str()) != root.as_variable()
                    })
                    .map(|(v, _)| v.clone())
                    .collect();
                match same.choose(r) {
                    Some(v) if !reaches(&edges, &Term::var(v.as_str()), &s) => Term::var(v.as_str()),
                    _ => constant(r, kind),
                }
            }
        };
        edges.push((s.clone(), o.clone()));
        patterns.push(TriplePattern::new(s, Term::name(p), o));
    }
    let projection = if r.gen_bool(0.2) {
        Projection::All
    } else {
        let mut chosen: Vec<String> = vars
            .iter()
            .map(|(v, _)| v.clone())
            .filter(|_| r.gen_bool(0.6))
            .collect();
        if chosen.is_empty() {
            chosen.push(vars.first().map(|(v, _)| v.clone()).unwrap_or_else(|| {
                patterns
                    .iter()
                    .find_map(|p: &TriplePattern| p.object.as_variable().map(str::to_string))
                    .unwrap_or_default()
            }));
        }
        chosen.retain(|v| !v.is_empty());
        chosen.shuffle(r);
        if chosen.is_empty() {
            Projection::All
        } else {
            Projection::Vars(chosen)
        }
    };
    let filter = if with_filter && !vars.is_empty() && r.gen_bool(0.5) {
        Some(random_filter(r, &vars, 2))
    } else {
        None
    };
    let modifiers = ModifierSet {
        has_filter: filter.is_some(),
        ..ModifierSet::default()
    };
    QueryAst {
        projection,
        patterns,
        optional_blocks: Vec::new(),
        filter,
        modifiers,
    }
}

fn reaches(edges: &[(Term, Term)], from: &Term, to: &Term) -> bool {
    if from == to && from.is_variable() {
        return true;
    }
    let mut stack = vec![from.clone()];
    let mut seen = Vec::new();
    while let Some(n) = stack.pop() {
        if n.identical(to) {
            return true;
        }
        if seen.iter().any(|s: &Term| s.identical(&n)) {
            continue;
        }
        seen.push(n.clone());
        for (a, b) in edges {
            if a.identical(&n) && b.is_variable() {
                stack.push(b.clone());
            }
        }
    }
    false
}

fn random_filter(r: &mut impl Rng, vars: &[(String, Kind)], depth: usize) -> FilterExpr {
    if depth > 0 && r.gen_bool(0.35) {
        let a = random_filter(r, vars, depth - 1);
        return match r.gen_range(0..3) {
            0 => FilterExpr::and(a, random_filter(r, vars, depth - 1)),
            1 => FilterExpr::or(a, random_filter(r, vars, depth - 1)),
            _ => FilterExpr::not(a),
        };
    }
    let (v, kind) = vars.choose(r).unwrap().clone();
    let var = Term::var(v.as_str());
    let same: Vec<&String> = vars
        .iter()
        .filter(|(w, k)| *k == kind && *w != v)
        .map(|(w, _)| w)
        .collect();
    match r.gen_range(0..10) {
        0 => FilterExpr::Exists(var),
        1 => FilterExpr::NotExists(var),
        2 if !same.is_empty() => {
            let op = if kind == Kind::Int {
                random_op(r)
            } else {
                *[CmpOp::Eq, CmpOp::Ne].choose(r).unwrap()
            };
            FilterExpr::cmp(op, var, Term::var(same.choose(r).unwrap().as_str()))
        }
        _ => {
            let op = if kind == Kind::Int {
                random_op(r)
            } else {
                *[CmpOp::Eq, CmpOp::Ne].choose(r).unwrap()
            };
            let c = constant(r, kind);
            if r.gen_bool(0.2) {
                FilterExpr::cmp(op, c, var)
            } else {
                FilterExpr::cmp(op, var, c)
            }
        }
    }
}

fn random_op(r: &mut impl Rng) -> CmpOp {
    *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge]
        .choose(r)
        .unwrap()
}

// ---------------------------------------------------------------------------
// Arbitrary basic graph patterns for the classifier oracle.

/// 1..=max patterns over a small pool of variables and constants. May be
/// cyclic or disconnected.
pub fn random_bgp(r: &mut impl Rng, max_patterns: usize) -> Vec<TriplePattern> {
    let n = r.gen_range(1..=max_patterns);
    let pool_vars = ["a", "b", "c", "d", "e", "f"];
    let term = |r: &mut ChaCha8Rng| -> Term {
        if r.gen_bool(0.8) {
            Term::var(*pool_vars.choose(r).unwrap())
        } else {
            Term::name(*["c0", "c1"].choose(r).unwrap())
        }
    };
    let mut local = ChaCha8Rng::seed_from_u64(r.gen());
    (0..n)
        .map(|_| {
            let s = term(&mut local);
            let p = Term::name(*["p0", "p1", "p2"].choose(&mut local).unwrap());
            let o = if local.gen_bool(0.15) {
                Term::int(local.gen_range(0..3))
            } else {
                term(&mut local)
            };
            TriplePattern::new(s, p, o)
        })
        .collect()
}

pub fn query_from_patterns(patterns: Vec<TriplePattern>) -> QueryAst {
    QueryAst {
        projection: Projection::All,
        patterns,
        optional_blocks: Vec::new(),
        filter: None,
        modifiers: ModifierSet::default(),
    }
}

// ---------------------------------------------------------------------------
// Rich terms for round trips.

pub fn random_name(r: &mut impl Rng) -> Term {
    match r.gen_range(0..4) {
        0 => Term::name(format!("http://example.org/ns#item{}", r.gen_range(0..50))),
        1 => Term::name(format!("urn:x:{}", r.gen_range(0..50))),
        _ => Term::name(format!(
            "{}{}",
            ["Drug", "gene_", "Table_", "x"].choose(r).unwrap(),
            r.gen_range(0..50)
        )),
    }
}

pub fn random_text(r: &mut impl Rng) -> Term {
    let pieces = [
        "Q20Q",
        "a b",
        "quote\"d",
        "back\\slash",
        "tab\there",
        "line\nbreak",
        "ünïcödé",
        "",
        "2555",
        "#hash",
        "x . y",
    ];
    let n = r.gen_range(1..=3);
    Term::text((0..n).map(|_| *pieces.choose(r).unwrap()).collect::<String>())
}

pub fn random_number(r: &mut impl Rng) -> Term {
    match r.gen_range(0..3) {
        0 => Term::int(r.gen_range(-1000..1000)),
        1 => Term::Number(Number::parse(&format!("{}.{}", r.gen_range(-99..99), r.gen_range(1..99))).unwrap()),
        _ => Term::Number(Number::parse(&format!("{}e{}", r.gen_range(1..9), r.gen_range(-3..4))).unwrap()),
    }
}

pub fn random_rich_triple(r: &mut impl Rng) -> Triple {
    let o = match r.gen_range(0..3) {
        0 => random_name(r),
        1 => random_text(r),
        _ => random_number(r),
    };
    Triple::new(random_name(r), random_name(r), o).unwrap()
}

fn random_query_term(r: &mut impl Rng, vars: &[&str]) -> Term {
    match r.gen_range(0..6) {
        0..=2 => Term::var(*vars.choose(r).unwrap()),
        3 => random_name(r),
        4 => random_text(r),
        _ => random_number(r),
    }
}

fn random_pattern(r: &mut impl Rng, vars: &[&str]) -> TriplePattern {
    let s = if r.gen_bool(0.7) {
        Term::var(*vars.choose(r).unwrap())
    } else {
        random_name(r)
    };
    let p = if r.gen_bool(0.15) {
        Term::var(*vars.choose(r).unwrap())
    } else {
        random_name(r)
    };
    TriplePattern::new(s, p, random_query_term(r, vars))
}

fn random_any_filter(r: &mut impl Rng, vars: &[&str], depth: usize) -> FilterExpr {
    if depth > 0 && r.gen_bool(0.4) {
        let a = random_any_filter(r, vars, depth - 1);
        return match r.gen_range(0..3) {
            0 => FilterExpr::and(a, random_any_filter(r, vars, depth - 1)),
            1 => FilterExpr::or(a, random_any_filter(r, vars, depth - 1)),
            _ => FilterExpr::not(a),
        };
    }
    match r.gen_range(0..6) {
        0 => FilterExpr::Exists(Term::var(*vars.choose(r).unwrap())),
        1 => FilterExpr::NotExists(Term::var(*vars.choose(r).unwrap())),
        _ => FilterExpr::cmp(random_op(r), random_query_term(r, vars), random_query_term(r, vars)),
    }
}

/// Any well-formed query the frontend accepts.
pub fn random_ast(r: &mut impl Rng) -> QueryAst {
    let vars = ["x", "y", "z", "unii", "w2"];
    let patterns: Vec<TriplePattern> = (0..r.gen_range(1..=5)).map(|_| random_pattern(r, &vars)).collect();
    let optional_blocks: Vec<Vec<TriplePattern>> = (0..r.gen_range(0..=2))
        .map(|_| (0..r.gen_range(1..=2)).map(|_| random_pattern(r, &vars)).collect())
        .collect();
    let filter = r.gen_bool(0.5).then(|| random_any_filter(r, &vars, 3));
    let mut ast = QueryAst {
        projection: Projection::All,
        patterns,
        optional_blocks,
        filter,
        modifiers: ModifierSet::default(),
    };
    let known = ast.all_variables();
    if !known.is_empty() && r.gen_bool(0.7) {
        let mut chosen: Vec<String> = known.iter().filter(|_| r.gen_bool(0.5)).cloned().collect();
        if chosen.is_empty() {
            chosen.push(known[0].clone());
        }
        ast.projection = Projection::Vars(chosen);
    }
    ast.modifiers = ModifierSet {
        order_by: (!known.is_empty() && r.gen_bool(0.3)).then(|| OrderKey {
            variable: known.choose(r).unwrap().clone(),
            direction: if r.gen_bool(0.5) {
                Direction::Asc
            } else {
                Direction::Desc
            },
        }),
        limit: r.gen_bool(0.3).then(|| r.gen_range(0..100)),
        offset: r.gen_bool(0.2).then(|| r.gen_range(0..100)),
        has_filter: ast.filter.is_some(),
    };
    ast
}

// ---------------------------------------------------------------------------
// Pipeline-versus-SPARQL agreement runs.

/// Runs `cases` translatable queries and panics on the first disagreement.
/// Returns how many cases fell into each shape, in `Shape::ALL` order.
pub fn equivalence_run(seed: u64, with_filter: bool, cases: usize) -> [usize; 4] {
    use symphony::engine::{eval_sparql, DocumentStore};
    use symphony::mql::{translate, DEFAULT_COLLECTION};
    use symphony::ntriples::group_by_subject;
    use symphony::shape::{label_query, Shape};

    let mut r = rng(seed);
    let mut agreed = 0;
    let mut nonempty = 0;
    let mut shapes = [0usize; 4];
    let mut attempts = 0;
    while agreed < cases {
        attempts += 1;
        assert!(
            attempts < cases * 3,
            "generator produced too many untranslatable queries"
        );
        let g = random_graph(&mut r, 200);
        let ast = random_tree_query(&mut r, 6, with_filter);
        let Ok(t) = translate(&ast, DEFAULT_COLLECTION) else {
            continue;
        };
        let expected = eval_sparql(&g, &ast).unwrap_or_else(|e| panic!("{ast}: {e}"));
        let store = DocumentStore::new(DEFAULT_COLLECTION, &group_by_subject(g.iter()));
        let got = store.query(&t).unwrap_or_else(|e| panic!("{ast}\n{}: {e}", t.pipeline));
        assert!(
            got.multiset_eq(&expected),
            "query {ast}\npipeline {}\nsparql:\n{expected}\npipeline:\n{got}",
            t.pipeline
        );
        let shape = label_query(&ast).unwrap().shape;
        shapes[Shape::ALL.iter().position(|s| *s == shape).unwrap()] += 1;
        nonempty += usize::from(!expected.is_empty());
        agreed += 1;
    }
    assert!(nonempty > cases / 4, "only {nonempty} cases had results");
    shapes
}
