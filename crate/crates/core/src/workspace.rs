//! A loaded graph together with its document collection and a dispatcher
//! bound to it.

use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::dispatch::{BackendAdapter, Dispatcher, HttpSparqlAdapter};
use crate::model::{Document, KnowledgeGraph};
use crate::ntriples::{group_by_subject, parse_ntriples, IngestError, IngestReport, ParseMode};
use crate::routing::{QueryLanguage, RoutingPolicy};

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

pub struct Workspace {
    graph: Arc<KnowledgeGraph>,
    documents: Vec<Document>,
    report: IngestReport,
    policy: RoutingPolicy,
    dispatcher: Dispatcher,
}

impl Workspace {
    pub fn from_ntriples(text: &str, mode: ParseMode, policy: RoutingPolicy) -> Result<Self, WorkspaceError> {
        let (triples, mut report) = parse_ntriples(text, mode)?;
        let graph: KnowledgeGraph = triples.into_iter().collect();
        let ws = Self::from_graph(Arc::new(graph), policy);
        report.documents_emitted = ws.documents.len();
        Ok(Workspace { report, ..ws })
    }

    pub fn load(path: &Path, mode: ParseMode, policy: RoutingPolicy) -> Result<Self, WorkspaceError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorkspaceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_ntriples(&text, mode, policy)
    }

    /// Reference engines on every slot; SPARQL slots with a configured
    /// endpoint get a remote adapter instead.
    pub fn from_graph(graph: Arc<KnowledgeGraph>, policy: RoutingPolicy) -> Self {
        let documents = group_by_subject(graph.iter());
        let dispatcher = Dispatcher::with_reference_engines(policy.clone(), graph.clone());
        for slot in &policy.slots {
            if slot.language != QueryLanguage::Sparql {
                continue;
            }
            if let Some(url) = policy.endpoint(&slot.id) {
                let remote: Arc<dyn BackendAdapter> = Arc::new(HttpSparqlAdapter::new(slot.id.clone(), url));
                dispatcher.register_backend(remote).expect("slot taken from the policy");
            }
        }
        let report = IngestReport {
            triples_loaded: graph.len(),
            documents_emitted: documents.len(),
            ..IngestReport::default()
        };
        Workspace {
            graph,
            documents,
            report,
            policy,
            dispatcher,
        }
    }

    /// Fresh engines over a copy of the graph, sharing nothing with `self`.
    pub fn rebuild(&self) -> Workspace {
        let graph: KnowledgeGraph = self.graph.iter().cloned().collect();
        Workspace {
            report: self.report.clone(),
            ..Self::from_graph(Arc::new(graph), self.policy.clone())
        }
    }

    pub fn graph(&self) -> &Arc<KnowledgeGraph> {
        &self.graph
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn policy(&self) -> &RoutingPolicy {
        &self.policy
    }

    pub fn dispatcher(&self) -> &Dispatcher {
        &self.dispatcher
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::default_policy;

    #[test]
    fn documents_follow_the_graph() {
        let ws =
            Workspace::from_ntriples("a p b .\na q 1 .\nc p \"x\" .\n", ParseMode::Strict, default_policy()).unwrap();
        assert_eq!(ws.report().triples_loaded, 3);
        assert_eq!(ws.report().documents_emitted, 2);
        assert_eq!(ws.documents().len(), 2);
        let cold = ws.rebuild();
        assert!(!Arc::ptr_eq(cold.graph(), ws.graph()));
        assert_eq!(cold.documents(), ws.documents());
        assert_eq!(cold.dispatcher().bound_slots().len(), 4);
    }
}
