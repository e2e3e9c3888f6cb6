use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::MqlError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageKind {
    Match,
    Lookup,
    Sort,
    Skip,
    Limit,
    Project,
    /// A stage name outside the supported vocabulary; kept so engines can reject it.
    Other(String),
}

impl StageKind {
    pub fn operator(&self) -> &str {
        match self {
            StageKind::Match => "$match",
            StageKind::Lookup => "$lookup",
            StageKind::Sort => "$sort",
            StageKind::Skip => "$skip",
            StageKind::Limit => "$limit",
            StageKind::Project => "$project",
            StageKind::Other(s) => s,
        }
    }

    pub fn from_operator(op: &str) -> StageKind {
        match op {
            "$match" => StageKind::Match,
            "$lookup" => StageKind::Lookup,
            "$sort" => StageKind::Sort,
            "$skip" => StageKind::Skip,
            "$limit" => StageKind::Limit,
            "$project" => StageKind::Project,
            other => StageKind::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MqlStage {
    pub kind: StageKind,
    pub body: Value,
}

impl MqlStage {
    pub fn new(kind: StageKind, body: Value) -> Self {
        MqlStage { kind, body }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert(self.kind.operator().to_string(), self.body.clone());
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self, MqlError> {
        match v.as_object() {
            Some(m) if m.len() == 1 => {
                let (op, body) = m.iter().next().expect("one entry");
                Ok(MqlStage::new(StageKind::from_operator(op), body.clone()))
            }
            _ => Err(MqlError::MalformedPipeline(format!(
                "stage must be a one-key object, got {v}"
            ))),
        }
    }
}

impl fmt::Display for MqlStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MqlPipeline {
    pub collection: String,
    pub stages: Vec<MqlStage>,
}

impl MqlPipeline {
    pub fn new(collection: impl Into<String>, stages: Vec<MqlStage>) -> Self {
        MqlPipeline {
            collection: collection.into(),
            stages,
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.stages.iter().map(MqlStage::to_json).collect())
    }

    /// Compact aggregation-pipeline text: a JSON array of one-key stage objects.
    pub fn to_text(&self) -> String {
        self.to_json().to_string()
    }

    /// One stage per line, for humans.
    pub fn to_pretty(&self) -> String {
        let lines: Vec<String> = self.stages.iter().map(|s| format!("  {s}")).collect();
        format!("[\n{}\n]", lines.join(",\n"))
    }

    pub fn from_text(collection: impl Into<String>, text: &str) -> Result<Self, MqlError> {
        let v: Value = serde_json::from_str(text).map_err(|e| MqlError::MalformedPipeline(e.to_string()))?;
        let items = v
            .as_array()
            .ok_or_else(|| MqlError::MalformedPipeline("pipeline must be an array".into()))?;
        let stages = items.iter().map(MqlStage::from_json).collect::<Result<_, _>>()?;
        Ok(MqlPipeline::new(collection, stages))
    }
}

impl fmt::Display for MqlPipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
