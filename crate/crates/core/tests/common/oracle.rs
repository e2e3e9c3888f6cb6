//! Definition-level classifier and routing rules, independent of the
//! graph-based implementation.

use symphony::model::Term;
use symphony::shape::Shape;
use symphony::sparql::TriplePattern;

/// All orderings of 0..n.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            cur.push(x);
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

fn same_var(a: &Term, b: &Term) -> bool {
    a.is_variable() && a.identical(b)
}

/// Joins only happen through variables; a constant subject is shared by
/// identity of its spelling.
fn same_subject(a: &Term, b: &Term) -> bool {
    a.identical(b)
}

/// Cycle among variables, by repeatedly removing variables without
/// incoming variable edges.
pub fn cyclic(ps: &[TriplePattern]) -> bool {
    let edges: Vec<(&str, &str)> = ps
        .iter()
        .filter_map(|p| Some((p.subject.as_variable()?, p.object.as_variable()?)))
        .collect();
    let mut alive: Vec<&str> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    alive.sort();
    alive.dedup();
    loop {
        let before = alive.len();
        let snapshot = alive.clone();
        alive.retain(|v| edges.iter().any(|&(a, b)| b == *v && snapshot.contains(&a)));
        if alive.len() == before {
            return !alive.is_empty();
        }
    }
}

pub fn brute_force(ps: &[TriplePattern]) -> Shape {
    if ps.len() == 1 {
        return Shape::SingleTriplePattern;
    }
    let subject_vars_as_objects = ps.iter().any(|p| ps.iter().any(|q| same_var(&p.object, &q.subject)));
    // star: one shared subject, no object feeds a subject
    if ps.iter().all(|p| same_subject(&p.subject, &ps[0].subject)) && !subject_vars_as_objects {
        return Shape::SubjectSubject;
    }
    // path: some ordering links each object to the next subject, nothing else joins
    for order in permutations(ps.len()) {
        let chain: Vec<&TriplePattern> = order.iter().map(|&i| &ps[i]).collect();
        let linked = chain.windows(2).all(|w| same_var(&w[0].object, &w[1].subject));
        let distinct_subjects = chain
            .iter()
            .enumerate()
            .all(|(i, p)| chain[i + 1..].iter().all(|q| !same_subject(&p.subject, &q.subject)));
        let last = chain.last().unwrap();
        let tail_free = !chain.iter().any(|q| same_var(&last.object, &q.subject))
            && !chain[..chain.len() - 1]
                .iter()
                .any(|q| same_var(&last.object, &q.object));
        if linked && distinct_subjects && tail_free {
            return Shape::SubjectObject;
        }
    }
    Shape::TreeLike
}

/// The three routing heuristics as stated, first match wins.
pub fn stated_route(shape: Shape, modifiers: bool, optional: bool) -> (&'static [&'static str], &'static str) {
    let single_or_star = matches!(shape, Shape::SingleTriplePattern | Shape::SubjectSubject);
    if single_or_star && !modifiers && !optional {
        (&["doc-store", "exhaustive-index-store"], "R1")
    } else if shape == Shape::SubjectObject {
        (&["btree-store"], "R2")
    } else {
        (&["columnar-store"], "R3")
    }
}
