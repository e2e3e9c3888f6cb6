//! Load N-Triples and group them into subject documents.
//!
//! ```not_rust
//! cargo run -q --example ingest_documents
//! ```

use symphony::ntriples::{documents_to_jsonl, flatten_documents, group_by_subject, parse_ntriples, ParseMode};

const EXTRACT: &str = include_str!("../data/mini_kg.nt");

fn main() {
    let (triples, report) = parse_ntriples(EXTRACT, ParseMode::Strict).expect("extract is well formed");
    println!("{} triples", triples.len());

    let docs = group_by_subject(&triples);
    print!("{}", documents_to_jsonl(&docs));
    assert_eq!(flatten_documents(&docs).len(), triples.len());

    // lenient mode keeps going past bad lines and records them
    let messy = format!("{EXTRACT}not a triple\nCISPLATIN dose 20 .\n");
    let (triples, report_lenient) = parse_ntriples(&messy, ParseMode::Lenient).unwrap();
    println!(
        "lenient: {} triples, skipped {:?}",
        triples.len(),
        report_lenient.malformed
    );
    assert!(report.malformed.is_empty());
}
