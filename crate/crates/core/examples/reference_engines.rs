//! Evaluate the same query directly over triples and over documents.

use symphony::engine::{eval_sparql, DocumentStore};
use symphony::model::KnowledgeGraph;
use symphony::mql::{translate, DEFAULT_COLLECTION};
use symphony::ntriples::{group_by_subject, parse_ntriples, ParseMode};
use symphony::sparql::parse_query;

fn main() {
    let (triples, _) = parse_ntriples(include_str!("../data/mini_kg.nt"), ParseMode::Strict).unwrap();
    let graph: KnowledgeGraph = triples.iter().cloned().collect();
    let docs = DocumentStore::new(DEFAULT_COLLECTION, &group_by_subject(&triples));

    let q = parse_query("SELECT ?p ?o WHERE { Table_1326 ?p ?o . } ORDER BY DESC(?p) LIMIT 3").unwrap();
    let direct = eval_sparql(&graph, &q).unwrap();
    println!("triples:\n{direct}\n");

    let q = parse_query("SELECT ?x ?org WHERE { ?x UNII \"Q20Q\" . ?x organization ?org . }").unwrap();
    let a = eval_sparql(&graph, &q).unwrap();
    let b = docs.query(&translate(&q, DEFAULT_COLLECTION).unwrap()).unwrap();
    println!("documents:\n{b}");
    assert!(a.multiset_eq(&b));
}
