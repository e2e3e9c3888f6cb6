use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::engine::{eval_sparql, DocumentStore, EngineError};
use crate::model::{KnowledgeGraph, ResultSet};
use crate::mql::Translation;
use crate::routing::{QueryLanguage, SlotId};
use crate::sparql::QueryAst;

/// Which payload an adapter accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capability {
    AcceptsSparql,
    AcceptsPipeline,
}

impl Capability {
    pub fn for_language(lang: QueryLanguage) -> Capability {
        match lang {
            QueryLanguage::Sparql => Capability::AcceptsSparql,
            QueryLanguage::Pipeline => Capability::AcceptsPipeline,
        }
    }
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capability::AcceptsSparql => "sparql",
            Capability::AcceptsPipeline => "pipeline",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryPayload {
    /// Original query text plus its parsed form.
    Sparql {
        text: String,
        ast: QueryAst,
    },
    Pipeline(Translation),
}

impl QueryPayload {
    pub fn capability(&self) -> Capability {
        match self {
            QueryPayload::Sparql { .. } => Capability::AcceptsSparql,
            QueryPayload::Pipeline(_) => Capability::AcceptsPipeline,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("adapter for {slot} does not accept {payload} payloads")]
    Unsupported { slot: SlotId, payload: Capability },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unreadable response: {0}")]
    Response(String),
    #[error("cancelled")]
    Cancelled,
    #[error("injected fault: {0}")]
    Injected(String),
}

/// Best-effort cancellation flag shared between the dispatcher and one
/// adapter call.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }

    pub fn check(&self) -> Result<(), AdapterError> {
        if self.is_cancelled() {
            Err(AdapterError::Cancelled)
        } else {
            Ok(())
        }
    }
}

/// A backend bound to one routing slot.
///
/// Implementations must tolerate concurrent `execute` calls unless
/// `single_flight` returns true.
pub trait BackendAdapter: Send + Sync {
    fn slot(&self) -> &SlotId;
    fn capability(&self) -> Capability;
    fn execute(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError>;

    fn single_flight(&self) -> bool {
        false
    }

    /// Short description for reports.
    fn describe(&self) -> String {
        format!("{} ({})", self.slot(), self.capability())
    }
}

fn unsupported(slot: &SlotId, payload: &QueryPayload) -> AdapterError {
    AdapterError::Unsupported {
        slot: slot.clone(),
        payload: payload.capability(),
    }
}

/// Reference triple engine standing in for a SPARQL slot.
pub struct SparqlEngineAdapter {
    slot: SlotId,
    graph: Arc<KnowledgeGraph>,
}

impl SparqlEngineAdapter {
    pub fn new(slot: impl Into<SlotId>, graph: Arc<KnowledgeGraph>) -> Self {
        Self {
            slot: slot.into(),
            graph,
        }
    }
}

impl BackendAdapter for SparqlEngineAdapter {
    fn slot(&self) -> &SlotId {
        &self.slot
    }

    fn capability(&self) -> Capability {
        Capability::AcceptsSparql
    }

    fn execute(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError> {
        let QueryPayload::Sparql { ast, .. } = payload else {
            return Err(unsupported(&self.slot, payload));
        };
        cancel.check()?;
        Ok(eval_sparql(&self.graph, ast)?)
    }

    fn describe(&self) -> String {
        format!("{} (reference triple engine, {} triples)", self.slot, self.graph.len())
    }
}

/// Reference pipeline interpreter standing in for the document slot.
pub struct PipelineAdapter {
    slot: SlotId,
    store: Arc<DocumentStore>,
}

impl PipelineAdapter {
    pub fn new(slot: impl Into<SlotId>, store: Arc<DocumentStore>) -> Self {
        Self {
            slot: slot.into(),
            store,
        }
    }
}

impl BackendAdapter for PipelineAdapter {
    fn slot(&self) -> &SlotId {
        &self.slot
    }

    fn capability(&self) -> Capability {
        Capability::AcceptsPipeline
    }

    fn execute(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError> {
        let QueryPayload::Pipeline(t) = payload else {
            return Err(unsupported(&self.slot, payload));
        };
        cancel.check()?;
        Ok(self.store.query(t)?)
    }

    fn describe(&self) -> String {
        format!(
            "{} (reference pipeline engine, {} documents)",
            self.slot,
            self.store.len()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    /// Every call fails.
    Fail,
    /// Results keep only the first n rows.
    Truncate(usize),
    /// Calls sleep before delegating.
    Delay(Duration),
}

/// Wraps an adapter and injects a fault into every call.
pub struct FaultInjector {
    inner: Arc<dyn BackendAdapter>,
    fault: Fault,
}

impl FaultInjector {
    pub fn new(inner: Arc<dyn BackendAdapter>, fault: Fault) -> Self {
        Self { inner, fault }
    }
}

impl BackendAdapter for FaultInjector {
    fn slot(&self) -> &SlotId {
        self.inner.slot()
    }

    fn capability(&self) -> Capability {
        self.inner.capability()
    }

    fn single_flight(&self) -> bool {
        self.inner.single_flight()
    }

    fn execute(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError> {
        match &self.fault {
            Fault::Fail => Err(AdapterError::Injected(format!("{} is down", self.slot()))),
            Fault::Truncate(n) => {
                let mut rs = self.inner.execute(payload, cancel)?;
                rs.rows.truncate(*n);
                Ok(rs)
            }
            Fault::Delay(d) => {
                thread::sleep(*d);
                cancel.check()?;
                self.inner.execute(payload, cancel)
            }
        }
    }

    fn describe(&self) -> String {
        format!("{} with fault {:?}", self.inner.describe(), self.fault)
    }
}
