//! Query processing end to end: label, select backends, translate when a
//! document slot is targeted, run targets concurrently and keep the first
//! success.

mod adapter;
mod http;

pub use adapter::{
    AdapterError, BackendAdapter, CancelToken, Capability, Fault, FaultInjector, PipelineAdapter, QueryPayload,
    SparqlEngineAdapter,
};
pub use http::{HttpSparqlAdapter, PostStyle};

use std::collections::HashMap;
use std::fmt;
use std::sync::{mpsc, Arc, Mutex, RwLock};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::engine::DocumentStore;
use crate::model::{KnowledgeGraph, ResultSet};
use crate::mql::{translate_with_label, MqlError, Translation, DEFAULT_COLLECTION};
use crate::ntriples::group_by_subject;
use crate::routing::{select_backends, QueryLanguage, RoutingDecision, RoutingPolicy, SlotId};
use crate::shape::{label_query, QueryLabel, ShapeError};
use crate::sparql::{parse_query, QueryAst, SparqlError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotFailure {
    pub slot: SlotId,
    pub error: AdapterError,
}

impl fmt::Display for SlotFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.slot, self.error)
    }
}

fn join_failures(fs: &[SlotFailure]) -> String {
    fs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub reference: SlotId,
    pub expected: ResultSet,
    pub slot: SlotId,
    pub actual: ResultSet,
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error(transparent)]
    Query(#[from] SparqlError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Untranslatable(#[from] MqlError),
    #[error("slot {0} is not part of the active policy")]
    UnknownSlot(SlotId),
    #[error("slot {slot} needs a {needed} adapter, got {got}")]
    CapabilityMismatch {
        slot: SlotId,
        needed: Capability,
        got: Capability,
    },
    #[error("all backends failed: {}", join_failures(.0))]
    AllBackendsFailed(Vec<SlotFailure>),
    #[error("verification needs at least 2 backends able to run the query, found {available}")]
    InsufficientBackends { available: usize },
    #[error("verification incomplete: {}", join_failures(.0))]
    VerificationIncomplete(Vec<SlotFailure>),
    #[error("{} disagrees with {}: {} vs {} rows", .0.slot, .0.reference, .0.actual.len(), .0.expected.len())]
    VerificationMismatch(Box<Mismatch>),
}

impl DispatchError {
    /// Process exit status for this failure: 1 input, 2 mismatch, 3 backend.
    pub fn exit_code(&self) -> i32 {
        match self {
            DispatchError::Query(_)
            | DispatchError::Shape(_)
            | DispatchError::Untranslatable(_)
            | DispatchError::UnknownSlot(_)
            | DispatchError::CapabilityMismatch { .. } => 1,
            DispatchError::VerificationMismatch(_) => 2,
            DispatchError::AllBackendsFailed(_)
            | DispatchError::InsufficientBackends { .. }
            | DispatchError::VerificationIncomplete(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    /// Parsing plus labeling.
    pub label: Duration,
    pub translate: Duration,
    pub execute: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub result: ResultSet,
    pub label: QueryLabel,
    /// The policy's decision, unchanged even when a target was dropped.
    pub decision: RoutingDecision,
    /// Present iff the winner is a pipeline slot.
    pub translation: Option<Translation>,
    pub winner: SlotId,
    /// Pipeline targets skipped because the query could not be translated.
    pub skipped: Vec<SlotId>,
    pub timings: PhaseTimings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Reference,
    Agree,
    Disagree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationEntry {
    pub slot: SlotId,
    pub verdict: Verdict,
    pub rows: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Row order was compared because the query has ORDER BY.
    pub ordered: bool,
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    pub fn agrees(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Disagree)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.entries.len();
        let cmp = if self.ordered { "ordered" } else { "multiset" };
        if self.agrees() {
            writeln!(f, "agree ({n} backends, {cmp} comparison)")?;
        } else {
            writeln!(f, "DISAGREE ({n} backends, {cmp} comparison)")?;
        }
        for e in &self.entries {
            let v = match e.verdict {
                Verdict::Reference => "reference",
                Verdict::Agree => "agree",
                Verdict::Disagree => "disagree",
            };
            writeln!(
                f,
                "  {:<24} {:<9} {:>6} rows {:>10.3} ms",
                e.slot.as_str(),
                v,
                e.rows,
                e.elapsed.as_secs_f64() * 1e3
            )?;
        }
        Ok(())
    }
}

struct Bound {
    adapter: Arc<dyn BackendAdapter>,
    /// Held during calls on single-flight adapters.
    gate: Arc<Mutex<()>>,
}

impl Clone for Bound {
    fn clone(&self) -> Self {
        Bound {
            adapter: self.adapter.clone(),
            gate: self.gate.clone(),
        }
    }
}

impl Bound {
    fn new(adapter: Arc<dyn BackendAdapter>) -> Self {
        Bound {
            adapter,
            gate: Arc::new(Mutex::new(())),
        }
    }

    fn run(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError> {
        if self.adapter.single_flight() {
            let _held = self.gate.lock().unwrap_or_else(|p| p.into_inner());
            self.adapter.execute(payload, cancel)
        } else {
            self.adapter.execute(payload, cancel)
        }
    }
}

struct Prepared {
    ast: QueryAst,
    label: QueryLabel,
    decision: RoutingDecision,
    translation: Option<Translation>,
    translate_error: Option<MqlError>,
    label_time: Duration,
    translate_time: Duration,
    sparql: Arc<QueryPayload>,
    pipeline: Option<Arc<QueryPayload>>,
}

/// Routes queries to the adapters bound to policy slots. Shareable across
/// threads.
pub struct Dispatcher {
    policy: RoutingPolicy,
    collection: String,
    adapters: RwLock<HashMap<SlotId, Bound>>,
    fallback: RwLock<Option<Bound>>,
}

impl Dispatcher {
    pub fn new(policy: RoutingPolicy) -> Self {
        Self {
            policy,
            collection: DEFAULT_COLLECTION.to_string(),
            adapters: RwLock::new(HashMap::new()),
            fallback: RwLock::new(None),
        }
    }

    /// Binds reference engines over `graph` to every policy slot.
    pub fn with_reference_engines(policy: RoutingPolicy, graph: Arc<KnowledgeGraph>) -> Self {
        let d = Dispatcher::new(policy);
        let docs = Arc::new(DocumentStore::new(
            d.collection.clone(),
            &group_by_subject(graph.iter()),
        ));
        for slot in &d.policy.slots {
            let a: Arc<dyn BackendAdapter> = match slot.language {
                QueryLanguage::Sparql => Arc::new(SparqlEngineAdapter::new(slot.id.clone(), graph.clone())),
                QueryLanguage::Pipeline => Arc::new(PipelineAdapter::new(slot.id.clone(), docs.clone())),
            };
            d.register_backend(a)
                .expect("policy slots accept matching reference engines");
        }
        d
    }

    pub fn policy(&self) -> &RoutingPolicy {
        &self.policy
    }

    pub fn collection(&self) -> &str {
        &self.collection
    }

    /// Binds an adapter to its slot, replacing any previous binding.
    pub fn register_backend(&self, adapter: Arc<dyn BackendAdapter>) -> Result<(), DispatchError> {
        let id = adapter.slot().clone();
        let slot = self
            .policy
            .slot(id.as_str())
            .ok_or_else(|| DispatchError::UnknownSlot(id.clone()))?;
        let needed = Capability::for_language(slot.language);
        if adapter.capability() != needed {
            return Err(DispatchError::CapabilityMismatch {
                slot: id,
                needed,
                got: adapter.capability(),
            });
        }
        log::debug!("bound {}", adapter.describe());
        self.write_adapters().insert(id, Bound::new(adapter));
        Ok(())
    }

    /// Adapter used for any target slot without a binding. It receives the
    /// payload matching its own capability.
    pub fn set_fallback(&self, adapter: Option<Arc<dyn BackendAdapter>>) {
        *self.fallback.write().unwrap_or_else(|p| p.into_inner()) = adapter.map(Bound::new);
    }

    pub fn bound_slots(&self) -> Vec<SlotId> {
        let map = self.read_adapters();
        self.policy
            .slots
            .iter()
            .filter(|s| map.contains_key(&s.id))
            .map(|s| s.id.clone())
            .collect()
    }

    pub fn describe_backends(&self) -> Vec<String> {
        let map = self.read_adapters();
        self.policy
            .slots
            .iter()
            .map(|s| match map.get(&s.id) {
                Some(b) => b.adapter.describe(),
                None => format!("{} (unbound)", s.id),
            })
            .collect()
    }

    fn read_adapters(&self) -> std::sync::RwLockReadGuard<'_, HashMap<SlotId, Bound>> {
        self.adapters.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write_adapters(&self) -> std::sync::RwLockWriteGuard<'_, HashMap<SlotId, Bound>> {
        self.adapters.write().unwrap_or_else(|p| p.into_inner())
    }

    fn binding_for(&self, slot: &SlotId) -> Option<Bound> {
        self.read_adapters()
            .get(slot)
            .cloned()
            .or_else(|| self.fallback.read().unwrap_or_else(|p| p.into_inner()).clone())
    }

    /// Parses, labels, selects and translates.
    fn prepare(&self, query_text: &str) -> Result<Prepared, DispatchError> {
        let started = Instant::now();
        let ast = parse_query(query_text)?;
        let label = label_query(&ast)?;
        let decision = select_backends(&label, &self.policy);
        let label_time = started.elapsed();

        let started = Instant::now();
        let (translation, translate_error) = if decision.requires_translation() {
            match translate_with_label(&ast, &label, &self.collection) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(e)),
            }
        } else {
            (None, None)
        };
        let translate_time = started.elapsed();
        let pipeline = translation.clone().map(|t| Arc::new(QueryPayload::Pipeline(t)));
        let sparql = Arc::new(QueryPayload::Sparql {
            text: query_text.to_string(),
            ast: ast.clone(),
        });
        Ok(Prepared {
            ast,
            label,
            decision,
            translation,
            translate_error,
            label_time,
            translate_time,
            sparql,
            pipeline,
        })
    }

    fn payload_for(p: &Prepared, b: &Bound) -> Option<Arc<QueryPayload>> {
        match b.adapter.capability() {
            Capability::AcceptsSparql => Some(p.sparql.clone()),
            Capability::AcceptsPipeline => p.pipeline.clone(),
        }
    }

    /// Runs the decision's targets concurrently and returns the first success.
    pub fn execute(&self, query_text: &str) -> Result<QueryOutcome, DispatchError> {
        let p = self.prepare(query_text)?;
        let mut skipped = Vec::new();
        let mut runnable = Vec::new();
        let mut failures = Vec::new();
        for t in &p.decision.targets {
            let id = t.slot.id.clone();
            if t.requires_translation && p.translation.is_none() {
                let err = p.translate_error.clone().expect("translation attempted");
                if p.decision.targets.len() == 1 {
                    return Err(err.into());
                }
                log::warn!("skipping {id}: {err}");
                skipped.push(id);
                continue;
            }
            match self.binding_for(&id) {
                Some(b) => match Self::payload_for(&p, &b) {
                    Some(payload) => runnable.push((id, b, payload)),
                    None => failures.push(SlotFailure {
                        slot: id.clone(),
                        error: AdapterError::Unsupported {
                            slot: id,
                            payload: Capability::AcceptsPipeline,
                        },
                    }),
                },
                None => failures.push(SlotFailure {
                    slot: id,
                    error: AdapterError::Transport("no adapter bound".into()),
                }),
            }
        }

        let started = Instant::now();
        let cancel = CancelToken::new();
        let (tx, rx) = mpsc::channel();
        let launched = runnable.len();
        for (id, b, payload) in runnable {
            let tx = tx.clone();
            let cancel = cancel.clone();
            // losers are left to finish on their own; their sends go nowhere
            thread::spawn(move || {
                let r = b.run(&payload, &cancel);
                let _ = tx.send((id, r));
            });
        }
        drop(tx);

        let mut winner = None;
        for (id, r) in rx.iter().take(launched) {
            match r {
                Ok(rs) => {
                    winner = Some((id, rs));
                    cancel.cancel();
                    break;
                }
                Err(e) => {
                    log::debug!("{id} failed: {e}");
                    failures.push(SlotFailure { slot: id, error: e });
                }
            }
        }
        let execute_time = started.elapsed();
        let Some((id, result)) = winner else {
            return Err(DispatchError::AllBackendsFailed(failures));
        };
        let won_pipeline = p
            .decision
            .targets
            .iter()
            .any(|t| t.slot.id == id && t.requires_translation);
        Ok(QueryOutcome {
            result,
            label: p.label,
            decision: p.decision,
            translation: if won_pipeline { p.translation } else { None },
            winner: id,
            skipped,
            timings: PhaseTimings {
                label: p.label_time,
                translate: p.translate_time,
                execute: execute_time,
            },
        })
    }

    /// Runs the query on one slot, bypassing routing. The duration covers the
    /// adapter call only.
    pub fn execute_on(&self, query_text: &str, slot: &SlotId) -> Result<(ResultSet, Duration), DispatchError> {
        let mut p = self.prepare(query_text)?;
        let b = self.binding_for(slot).ok_or_else(|| {
            DispatchError::AllBackendsFailed(vec![SlotFailure {
                slot: slot.clone(),
                error: AdapterError::Transport("no adapter bound".into()),
            }])
        })?;
        if b.adapter.capability() == Capability::AcceptsPipeline && p.pipeline.is_none() {
            let t = translate_with_label(&p.ast, &p.label, &self.collection)?;
            p.pipeline = Some(Arc::new(QueryPayload::Pipeline(t)));
        }
        let payload = Self::payload_for(&p, &b).expect("payload prepared for capability");
        let started = Instant::now();
        let r = b.run(&payload, &CancelToken::new());
        let elapsed = started.elapsed();
        r.map(|rs| (rs, elapsed)).map_err(|error| {
            DispatchError::AllBackendsFailed(vec![SlotFailure {
                slot: slot.clone(),
                error,
            }])
        })
    }

    /// Runs every capable backend to completion and compares the results.
    ///
    /// Candidates are the decision's targets; when fewer than two of them can
    /// run the query, every bound slot is used instead.
    pub fn execute_verified(&self, query_text: &str) -> Result<(QueryOutcome, VerificationReport), DispatchError> {
        let mut p = self.prepare(query_text)?;
        if p.translation.is_none() && p.translate_error.is_none() {
            // the decision did not ask for a pipeline, other slots might
            if let Ok(t) = translate_with_label(&p.ast, &p.label, &self.collection) {
                p.pipeline = Some(Arc::new(QueryPayload::Pipeline(t.clone())));
                p.translation = Some(t);
            }
        }
        let capable = |ids: Vec<SlotId>| -> Vec<(SlotId, Bound, Arc<QueryPayload>)> {
            ids.into_iter()
                .filter_map(|id| {
                    let b = self.binding_for(&id)?;
                    let payload = Self::payload_for(&p, &b)?;
                    Some((id, b, payload))
                })
                .collect()
        };
        let mut runs = capable(p.decision.slot_ids().into_iter().cloned().collect());
        if runs.len() < 2 {
            runs = capable(self.policy.slots.iter().map(|s| s.id.clone()).collect());
        }
        if runs.len() < 2 {
            return Err(DispatchError::InsufficientBackends { available: runs.len() });
        }

        let started = Instant::now();
        let cancel = CancelToken::new();
        let handles: Vec<_> = runs
            .into_iter()
            .map(|(id, b, payload)| {
                let cancel = cancel.clone();
                let h = thread::spawn(move || {
                    let t0 = Instant::now();
                    let r = b.run(&payload, &cancel);
                    (r, t0.elapsed())
                });
                (id, h)
            })
            .collect();
        let mut done = Vec::new();
        let mut failures = Vec::new();
        for (id, h) in handles {
            match h.join() {
                Ok((Ok(rs), el)) => done.push((id, rs, el)),
                Ok((Err(e), _)) => failures.push(SlotFailure { slot: id, error: e }),
                Err(_) => failures.push(SlotFailure {
                    slot: id,
                    error: AdapterError::Transport("adapter panicked".into()),
                }),
            }
        }
        let execute_time = started.elapsed();
        if !failures.is_empty() {
            return Err(DispatchError::VerificationIncomplete(failures));
        }

        let ordered = p.ast.modifiers.order_by.is_some();
        let same = |a: &ResultSet, b: &ResultSet| if ordered { a.ordered_eq(b) } else { a.multiset_eq(b) };
        let (ref_id, ref_rs, _) = &done[0];
        let entries: Vec<VerificationEntry> = done
            .iter()
            .enumerate()
            .map(|(i, (id, rs, el))| VerificationEntry {
                slot: id.clone(),
                verdict: if i == 0 {
                    Verdict::Reference
                } else if same(ref_rs, rs) {
                    Verdict::Agree
                } else {
                    Verdict::Disagree
                },
                rows: rs.len(),
                elapsed: *el,
            })
            .collect();
        let report = VerificationReport { ordered, entries };
        if let Some(i) = report.entries.iter().position(|e| e.verdict == Verdict::Disagree) {
            return Err(DispatchError::VerificationMismatch(Box::new(Mismatch {
                reference: ref_id.clone(),
                expected: ref_rs.clone(),
                slot: done[i].0.clone(),
                actual: done[i].1.clone(),
                report,
            })));
        }
        let winner = ref_id.clone();
        let won_pipeline = self
            .policy
            .slot(winner.as_str())
            .is_some_and(|s| s.language == QueryLanguage::Pipeline);
        let (_, result, _) = done.swap_remove(0);
        let outcome = QueryOutcome {
            result,
            label: p.label,
            decision: p.decision,
            translation: if won_pipeline { p.translation } else { None },
            winner,
            skipped: Vec::new(),
            timings: PhaseTimings {
                label: p.label_time,
                translate: p.translate_time,
                execute: execute_time,
            },
        };
        Ok((outcome, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::ntriples::{parse_ntriples, ParseMode};
    use crate::routing::default_policy;

    const MINI_KG: &str = include_str!("../../data/mini_kg.nt");

    fn graph() -> Arc<KnowledgeGraph> {
        Arc::new(
            parse_ntriples(MINI_KG, ParseMode::Strict)
                .unwrap()
                .0
                .into_iter()
                .collect(),
        )
    }

    fn reference() -> Dispatcher {
        Dispatcher::with_reference_engines(default_policy(), graph())
    }

    struct Nowhere;

    impl BackendAdapter for Nowhere {
        fn slot(&self) -> &SlotId {
            static FOO: std::sync::OnceLock<SlotId> = std::sync::OnceLock::new();
            FOO.get_or_init(|| SlotId::new("foo"))
        }
        fn capability(&self) -> Capability {
            Capability::AcceptsSparql
        }
        fn execute(&self, _: &QueryPayload, _: &CancelToken) -> Result<ResultSet, AdapterError> {
            unreachable!()
        }
    }

    #[test]
    fn registration_checks_slot_and_capability() {
        let d = Dispatcher::new(default_policy());
        assert_eq!(
            d.register_backend(Arc::new(Nowhere)),
            Err(DispatchError::UnknownSlot(SlotId::new("foo")))
        );
        let wrong = SparqlEngineAdapter::new(SlotId::DOC_STORE, graph());
        assert!(matches!(
            d.register_backend(Arc::new(wrong)),
            Err(DispatchError::CapabilityMismatch { .. })
        ));
        assert!(d.bound_slots().is_empty());
        d.register_backend(Arc::new(SparqlEngineAdapter::new(SlotId::BTREE_STORE, graph())))
            .unwrap();
        d.register_backend(Arc::new(SparqlEngineAdapter::new(SlotId::BTREE_STORE, graph())))
            .unwrap();
        assert_eq!(d.bound_slots(), [SlotId::new(SlotId::BTREE_STORE)]);
    }

    #[test]
    fn outcome_mirrors_label_and_policy() {
        let d = reference();
        let q = "SELECT ?unii WHERE { CISPLATIN UNII ?unii . }";
        let o = d.execute(q).unwrap();
        let ast = parse_query(q).unwrap();
        assert_eq!(o.label, label_query(&ast).unwrap());
        assert_eq!(o.decision, select_backends(&o.label, d.policy()));
        assert_eq!(o.result.rows, vec![vec![Some(Term::text("Q20Q"))]]);
        assert_eq!(o.translation.is_some(), o.winner == SlotId::DOC_STORE);
    }

    #[test]
    fn missing_adapter_without_fallback_fails_that_slot() {
        let d = Dispatcher::new(default_policy());
        d.register_backend(Arc::new(SparqlEngineAdapter::new(
            SlotId::EXHAUSTIVE_INDEX_STORE,
            graph(),
        )))
        .unwrap();
        let o = d
            .execute("SELECT ?x WHERE { ?x UNII ?u . ?x organization ?o . }")
            .unwrap();
        assert_eq!(o.winner, SlotId::EXHAUSTIVE_INDEX_STORE);
        assert!(o.translation.is_none());
        let err = d.execute("SELECT ?x WHERE { ?x UNII ?u . ?u p ?o . }").unwrap_err();
        assert!(matches!(err, DispatchError::AllBackendsFailed(ref f) if f.len() == 1));
        assert_eq!(err.exit_code(), 3);
        d.set_fallback(Some(Arc::new(SparqlEngineAdapter::new(
            SlotId::COLUMNAR_STORE,
            graph(),
        ))));
        assert_eq!(
            d.execute("SELECT ?x WHERE { ?x UNII ?u . ?u p ?o . }").unwrap().winner,
            SlotId::BTREE_STORE
        );
    }

    #[test]
    fn parse_errors_propagate() {
        let err = reference().execute("SELECT ?x WHERE { ?x p }").unwrap_err();
        assert!(matches!(err, DispatchError::Query(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn single_flight_adapters_are_serialized() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        struct Probe {
            slot: SlotId,
            inside: AtomicUsize,
            peak: AtomicUsize,
            inner: SparqlEngineAdapter,
        }
        impl BackendAdapter for Probe {
            fn slot(&self) -> &SlotId {
                &self.slot
            }
            fn capability(&self) -> Capability {
                Capability::AcceptsSparql
            }
            fn single_flight(&self) -> bool {
                true
            }
            fn execute(&self, p: &QueryPayload, c: &CancelToken) -> Result<ResultSet, AdapterError> {
                let n = self.inside.fetch_add(1, Ordering::SeqCst) + 1;
                self.peak.fetch_max(n, Ordering::SeqCst);
                thread::sleep(Duration::from_millis(5));
                self.inside.fetch_sub(1, Ordering::SeqCst);
                self.inner.execute(p, c)
            }
        }
        let probe = Arc::new(Probe {
            slot: SlotId::new(SlotId::COLUMNAR_STORE),
            inside: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
            inner: SparqlEngineAdapter::new(SlotId::COLUMNAR_STORE, graph()),
        });
        let d = Arc::new(Dispatcher::new(default_policy()));
        d.register_backend(probe.clone()).unwrap();
        let q = "SELECT ?y WHERE { ?x organization ?o . ?x FDA_Code ?c . ?c Xref ?y . }";
        let hs: Vec<_> = (0..4)
            .map(|_| {
                let d = d.clone();
                thread::spawn(move || d.execute(q).unwrap().winner)
            })
            .collect();
        for h in hs {
            assert_eq!(h.join().unwrap(), SlotId::COLUMNAR_STORE);
        }
        assert_eq!(probe.peak.load(Ordering::SeqCst), 1);
    }
}
