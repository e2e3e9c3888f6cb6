//! Cross-check backends against each other.

use std::sync::Arc;

use symphony::dispatch::{DispatchError, Fault, FaultInjector, SparqlEngineAdapter};
use symphony::ntriples::ParseMode;
use symphony::routing::{default_policy, SlotId};
use symphony::workspace::Workspace;

fn main() {
    let ws = Workspace::from_ntriples(include_str!("../data/mini_kg.nt"), ParseMode::Strict, default_policy()).unwrap();
    let q = "SELECT ?p ?o WHERE { CISPLATIN ?p ?o . }";

    let (outcome, report) = ws.dispatcher().execute_verified(q).unwrap();
    print!("{report}");
    println!("{}", outcome.result);

    let lossy = SparqlEngineAdapter::new(SlotId::BTREE_STORE, ws.graph().clone());
    ws.dispatcher()
        .register_backend(Arc::new(FaultInjector::new(Arc::new(lossy), Fault::Truncate(2))))
        .unwrap();
    match ws.dispatcher().execute_verified(q) {
        Err(e @ DispatchError::VerificationMismatch(_)) => println!("{e} (exit code {})", e.exit_code()),
        other => panic!("expected a mismatch, got {other:?}"),
    }
}
