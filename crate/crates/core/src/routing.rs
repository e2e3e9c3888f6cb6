//! Backend slots and the ordered rule list that maps query labels to them.
//!
//! A policy is plain data and can be loaded from a TOML file:
//!
//! ```toml
//! [[slots]]
//! id = "doc-store"
//! name = "MongoDB"
//! language = "pipeline"
//!
//! [[rules]]
//! id = "R1"
//! targets = ["doc-store"]
//! [rules.match]
//! shape = ["single-triple-pattern", "subject-subject"]
//! has_modifiers = false
//!
//! [[rules]]
//! id = "fallback"
//! targets = ["doc-store"]
//! ```
//!
//! Rules are tried in order and the first match wins. The last rule must have
//! an empty match so that every label is routed somewhere.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shape::{QueryLabel, Shape};

pub const DEFAULT_POLICY_TOML: &str = include_str!("../data/default_policy.toml");

/// Environment variable naming a policy file.
pub const CONFIG_ENV: &str = "SYMPHONY_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotId(pub String);

impl SlotId {
    pub const DOC_STORE: &'static str = "doc-store";
    pub const EXHAUSTIVE_INDEX_STORE: &'static str = "exhaustive-index-store";
    pub const BTREE_STORE: &'static str = "btree-store";
    pub const COLUMNAR_STORE: &'static str = "columnar-store";

    pub fn new(id: impl Into<String>) -> Self {
        SlotId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `SYMPHONY_ENDPOINT_COLUMNAR_STORE` for `columnar-store`.
    pub fn endpoint_env_var(&self) -> String {
        let suffix: String = self
            .0
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_uppercase()
                } else {
                    '_'
                }
            })
            .collect();
        format!("SYMPHONY_ENDPOINT_{suffix}")
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SlotId {
    fn from(s: &str) -> Self {
        SlotId(s.to_string())
    }
}

impl PartialEq<str> for SlotId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for SlotId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

/// What a slot's backend consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryLanguage {
    Sparql,
    Pipeline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendSlot {
    pub id: SlotId,
    pub name: String,
    pub language: QueryLanguage,
}

impl BackendSlot {
    pub fn new(id: &str, name: &str, language: QueryLanguage) -> Self {
        BackendSlot {
            id: SlotId::new(id),
            name: name.to_string(),
            language,
        }
    }
}

/// Conditions over a label. Absent fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleMatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Vec<Shape>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_modifiers: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_optional: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_filter: Option<bool>,
}

impl RuleMatch {
    pub fn is_catch_all(&self) -> bool {
        *self == RuleMatch::default()
    }

    pub fn matches(&self, label: &QueryLabel) -> bool {
        self.shape.as_ref().is_none_or(|s| s.contains(&label.shape))
            && self.has_modifiers.is_none_or(|b| b == label.has_modifiers)
            && self.has_optional.is_none_or(|b| b == label.has_optional)
            && self.has_filter.is_none_or(|b| b == label.has_filter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub targets: Vec<SlotId>,
    #[serde(rename = "match", default, skip_serializing_if = "RuleMatch::is_catch_all")]
    pub when: RuleMatch,
}

/// A remote SPARQL endpoint bound to a slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub slot: SlotId,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingPolicy {
    pub slots: Vec<BackendSlot>,
    pub rules: Vec<Rule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoints: Vec<Endpoint>,
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("duplicate slot id {0}")]
    DuplicateSlot(SlotId),
    #[error("rule {rule} targets unknown slot {slot}")]
    UnknownSlot { rule: String, slot: SlotId },
    #[error("rule {0} has no targets")]
    EmptyTargets(String),
    #[error("policy has no rules")]
    NoRules,
    #[error("last rule {0} is not a catch-all")]
    MissingCatchAll(String),
    #[error("endpoint bound to unknown slot {0}")]
    UnknownEndpointSlot(SlotId),
    #[error("invalid policy file: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("cannot serialize policy: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("cannot read policy file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn default_policy() -> RoutingPolicy {
    use QueryLanguage::*;
    let rule = |id: &str, targets: &[&str], when: RuleMatch| Rule {
        id: id.to_string(),
        targets: targets.iter().map(|&t| SlotId::new(t)).collect(),
        when,
    };
    RoutingPolicy {
        slots: vec![
            BackendSlot::new(SlotId::DOC_STORE, "MongoDB", Pipeline),
            BackendSlot::new(SlotId::EXHAUSTIVE_INDEX_STORE, "RDF-3X", Sparql),
            BackendSlot::new(SlotId::BTREE_STORE, "Blazegraph", Sparql),
            BackendSlot::new(SlotId::COLUMNAR_STORE, "Virtuoso", Sparql),
        ],
        rules: vec![
            rule(
                "R1",
                &[SlotId::DOC_STORE, SlotId::EXHAUSTIVE_INDEX_STORE],
                RuleMatch {
                    shape: Some(vec![Shape::SingleTriplePattern, Shape::SubjectSubject]),
                    has_modifiers: Some(false),
                    has_optional: Some(false),
                    has_filter: None,
                },
            ),
            rule(
                "R2",
                &[SlotId::BTREE_STORE],
                RuleMatch {
                    shape: Some(vec![Shape::SubjectObject]),
                    ..RuleMatch::default()
                },
            ),
            rule("R3", &[SlotId::COLUMNAR_STORE], RuleMatch::default()),
        ],
        endpoints: Vec::new(),
    }
}

impl RoutingPolicy {
    pub fn from_toml(text: &str) -> Result<Self, PolicyError> {
        let policy: RoutingPolicy = toml::from_str(text)?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn to_toml(&self) -> Result<String, PolicyError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// The file named by `explicit`, else by `SYMPHONY_CONFIG`, else the default.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, PolicyError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(default_policy()),
            },
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let mut ids = HashSet::new();
        for s in &self.slots {
            if !ids.insert(&s.id) {
                return Err(PolicyError::DuplicateSlot(s.id.clone()));
            }
        }
        for r in &self.rules {
            if r.targets.is_empty() {
                return Err(PolicyError::EmptyTargets(r.id.clone()));
            }
            if let Some(t) = r.targets.iter().find(|t| !ids.contains(t)) {
                return Err(PolicyError::UnknownSlot {
                    rule: r.id.clone(),
                    slot: t.clone(),
                });
            }
        }
        let last = self.rules.last().ok_or(PolicyError::NoRules)?;
        if !last.when.is_catch_all() {
            return Err(PolicyError::MissingCatchAll(last.id.clone()));
        }
        if let Some(e) = self.endpoints.iter().find(|e| !ids.contains(&e.slot)) {
            return Err(PolicyError::UnknownEndpointSlot(e.slot.clone()));
        }
        Ok(())
    }

    pub fn slot(&self, id: &str) -> Option<&BackendSlot> {
        self.slots.iter().find(|s| s.id == id)
    }

    /// Endpoint URL for a slot: the slot's environment variable wins over the file.
    pub fn endpoint(&self, id: &SlotId) -> Option<String> {
        self.endpoint_with(id, |k| std::env::var(k).ok())
    }

    pub fn endpoint_with(&self, id: &SlotId, env: impl Fn(&str) -> Option<String>) -> Option<String> {
        env(&id.endpoint_env_var())
            .filter(|u| !u.is_empty())
            .or_else(|| self.endpoints.iter().find(|e| &e.slot == id).map(|e| e.url.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteTarget {
    pub slot: BackendSlot,
    pub requires_translation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub targets: Vec<RouteTarget>,
    /// Id of the rule that matched.
    pub rationale: String,
}

impl RoutingDecision {
    pub fn slot_ids(&self) -> Vec<&SlotId> {
        self.targets.iter().map(|t| &t.slot.id).collect()
    }

    pub fn requires_translation(&self) -> bool {
        self.targets.iter().any(|t| t.requires_translation)
    }
}

impl fmt::Display for RoutingDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<&str> = self.targets.iter().map(|t| t.slot.id.as_str()).collect();
        write!(f, "[{}] ({})", ids.join(", "), self.rationale)
    }
}

/// Panics only on a policy that failed [`RoutingPolicy::validate`].
pub fn select_backends(label: &QueryLabel, policy: &RoutingPolicy) -> RoutingDecision {
    let rule = policy
        .rules
        .iter()
        .find(|r| r.when.matches(label))
        .expect("validated policy ends with a catch-all rule");
    let targets = rule
        .targets
        .iter()
        .map(|id| {
            let slot = policy
                .slot(id.as_str())
                .expect("validated policy targets known slots")
                .clone();
            RouteTarget {
                requires_translation: slot.language == QueryLanguage::Pipeline,
                slot,
            }
        })
        .collect();
    RoutingDecision {
        targets,
        rationale: rule.id.clone(),
    }
}
