use std::io::Read;
use std::time::Duration;

use super::adapter::{AdapterError, BackendAdapter, CancelToken, Capability, QueryPayload};
use crate::model::ResultSet;
use crate::results;
use crate::routing::SlotId;

const RESULTS_MIME: &str = "application/sparql-results+json";
const MAX_ERROR_BODY: u64 = 4096;

/// How the query travels in the request body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PostStyle {
    /// `application/x-www-form-urlencoded` with a `query` field.
    #[default]
    Form,
    /// `application/sparql-query` with the raw text.
    Direct,
}

/// SPARQL protocol client occupying a slot with a remote endpoint.
pub struct HttpSparqlAdapter {
    slot: SlotId,
    url: String,
    style: PostStyle,
    agent: ureq::Agent,
}

impl HttpSparqlAdapter {
    pub fn new(slot: impl Into<SlotId>, url: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            url: url.into(),
            style: PostStyle::Form,
            agent: ureq::AgentBuilder::new().timeout(Duration::from_secs(60)).build(),
        }
    }

    pub fn with_style(mut self, style: PostStyle) -> Self {
        self.style = style;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.agent = ureq::AgentBuilder::new().timeout(timeout).build();
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl BackendAdapter for HttpSparqlAdapter {
    fn slot(&self) -> &SlotId {
        &self.slot
    }

    fn capability(&self) -> Capability {
        Capability::AcceptsSparql
    }

    fn execute(&self, payload: &QueryPayload, cancel: &CancelToken) -> Result<ResultSet, AdapterError> {
        let QueryPayload::Sparql { text, .. } = payload else {
            return Err(AdapterError::Unsupported {
                slot: self.slot.clone(),
                payload: payload.capability(),
            });
        };
        cancel.check()?;
        let req = self.agent.post(&self.url).set("Accept", RESULTS_MIME);
        let sent = match self.style {
            PostStyle::Form => req.send_form(&[("query", text.as_str())]),
            PostStyle::Direct => req.set("Content-Type", "application/sparql-query").send_string(text),
        };
        let resp = match sent {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let mut body = String::new();
                let _ = r.into_reader().take(MAX_ERROR_BODY).read_to_string(&mut body);
                return Err(AdapterError::Status { status, body });
            }
            Err(e) => return Err(AdapterError::Transport(e.to_string())),
        };
        let body = resp.into_string().map_err(|e| AdapterError::Transport(e.to_string()))?;
        cancel.check()?;
        results::from_json_str(&body).map_err(|e| AdapterError::Response(e.to_string()))
    }

    fn describe(&self) -> String {
        format!("{} (remote endpoint {})", self.slot, self.url)
    }
}
