//! Dual dispatch keeps answering when one target is down.

use std::sync::Arc;
use std::time::Duration;

use symphony::dispatch::{BackendAdapter, Fault, FaultInjector, SparqlEngineAdapter};
use symphony::ntriples::ParseMode;
use symphony::routing::{default_policy, SlotId};
use symphony::workspace::Workspace;

fn main() {
    let ws = Workspace::from_ntriples(include_str!("../data/mini_kg.nt"), ParseMode::Strict, default_policy()).unwrap();
    let q = "SELECT ?x WHERE { ?x UNII \"Q20Q\" . ?x adverse_reaction \"Nausea\" . }";

    let o = ws.dispatcher().execute(q).unwrap();
    println!("healthy: {} answered via {}", o.winner, o.decision);

    let rdf: Arc<dyn BackendAdapter> = Arc::new(SparqlEngineAdapter::new(
        SlotId::EXHAUSTIVE_INDEX_STORE,
        ws.graph().clone(),
    ));
    ws.dispatcher()
        .register_backend(Arc::new(FaultInjector::new(rdf.clone(), Fault::Fail)))
        .unwrap();
    let o = ws.dispatcher().execute(q).unwrap();
    println!("index store down: {} answered, {} row(s)", o.winner, o.result.len());

    let slow = FaultInjector::new(rdf, Fault::Delay(Duration::from_millis(200)));
    ws.dispatcher().register_backend(Arc::new(slow)).unwrap();
    let o = ws.dispatcher().execute(q).unwrap();
    println!("index store slow: {} answered in {:?}", o.winner, o.timings.execute);
}
