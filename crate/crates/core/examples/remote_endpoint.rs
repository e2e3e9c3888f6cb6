//! Bind a slot to a SPARQL endpoint over HTTP.
//!
//! Point it at a real endpoint:
//! ```not_rust
//! SYMPHONY_ENDPOINT_COLUMNAR_STORE=http://localhost:8890/sparql cargo run -q --example remote_endpoint
//! ```
//! Without the variable a tiny local stand-in answers one request.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;

use symphony::dispatch::{Dispatcher, HttpSparqlAdapter};
use symphony::routing::{default_policy, SlotId};

const CANNED: &str =
    r#"{"head":{"vars":["y"]},"results":{"bindings":[{"y":{"type":"literal","value":"gene_PA356"}}]}}"#;

fn stand_in() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/sparql", listener.local_addr().unwrap());
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).unwrap() > 2 {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            line.clear();
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let mut out = stream;
        write!(
            out,
            "HTTP/1.1 200 OK\r\nContent-Type: application/sparql-results+json\r\nContent-Length: {}\r\n\r\n{CANNED}",
            CANNED.len()
        )
        .unwrap();
    });
    url
}

fn main() {
    let slot = SlotId::new(SlotId::COLUMNAR_STORE);
    let url = default_policy().endpoint(&slot).unwrap_or_else(stand_in);
    let d = Dispatcher::new(default_policy());
    d.register_backend(Arc::new(HttpSparqlAdapter::new(slot, url))).unwrap();
    for b in d.describe_backends() {
        println!("{b}");
    }
    let o = d
        .execute("SELECT ?y WHERE { ?x UNII \"Q20Q\" . ?x FDA_Code ?z . ?z CUI 2555 . ?z Xref ?y . }")
        .unwrap();
    println!("{}", o.result);
}
