//! Parse queries and classify their join shape.

use symphony::shape::{build_query_graph, label_query};
use symphony::sparql::parse_query;

fn main() {
    let queries = [
        "SELECT ?unii WHERE { CISPLATIN UNII ?unii . }",
        "SELECT ?x WHERE { ?x UNII \"Q20Q\" . ?x adverse_reaction \"Nausea\" . } LIMIT 5",
        "SELECT ?y WHERE { ?x CUI 2555 . ?y FDA_Code ?x . }",
        "SELECT ?y WHERE { ?x UNII \"Q20Q\" . ?x FDA_Code ?z . ?z CUI 2555 . ?z Xref ?y . }",
        "SELECT * WHERE { ?a knows ?b . ?b knows ?a . }",
    ];
    for q in queries {
        let ast = parse_query(q).unwrap();
        let g = build_query_graph(&ast);
        match label_query(&ast) {
            Ok(label) => println!(
                "{:<24} {} nodes, {} edges  {}",
                label.summary(&ast),
                g.node_count(),
                g.edge_count(),
                q
            ),
            Err(e) => println!("{:<24} {q}", format!("rejected: {e}")),
        }
    }

    match parse_query("SELECT ?x WHERE { ?x p }") {
        Err(e) => println!("syntax error reported at {}: {e}", e.position()),
        Ok(_) => unreachable!(),
    }
}
