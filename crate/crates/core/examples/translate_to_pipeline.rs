//! Translate SPARQL into an aggregation pipeline and run it on documents.

use symphony::engine::DocumentStore;
use symphony::mql::{translate, DEFAULT_COLLECTION};
use symphony::ntriples::{group_by_subject, parse_ntriples, ParseMode};
use symphony::sparql::parse_query;

fn main() {
    let (triples, _) = parse_ntriples(include_str!("../data/mini_kg.nt"), ParseMode::Strict).unwrap();
    let store = DocumentStore::new(DEFAULT_COLLECTION, &group_by_subject(&triples));

    let q = "SELECT ?drug ?gene WHERE { \
               ?drug FDA_Code ?t . \
               ?t ID ?id . \
               ?t Xref ?gene . \
               FILTER (?id > 300) }";
    let t = translate(&parse_query(q).unwrap(), DEFAULT_COLLECTION).unwrap();
    println!("{}", t.pipeline.to_pretty());
    println!("{}", store.query(&t).unwrap());

    // optional blocks have no pipeline form
    let opt = parse_query("SELECT * WHERE { ?d UNII ?u . OPTIONAL { ?d dose ?n . } }").unwrap();
    println!("{}", translate(&opt, DEFAULT_COLLECTION).unwrap_err());
}
