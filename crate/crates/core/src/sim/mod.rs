//! Discrete-step token simulation, trace segmentation and conformance.

mod conform;
mod engine;
mod scenario;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Attributes, EvalError};
use crate::model::StageRef;

pub use conform::{conformance, segment, Occurrence, Segmentation};
pub use engine::simulate;
pub use scenario::{Injection, Policy, Scenario, TokenSeed, DEFAULT_MAX_STEPS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: u64,
    pub thing: String,
    pub attributes: Attributes,
    pub at: StageRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Flow,
    Trigger,
}

/// One token movement along a flow, or one trigger firing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub arc: String,
    pub kind: RecordKind,
    pub token: u64,
    pub source: StageRef,
    pub target: StageRef,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    /// One past the last step in which anything happened.
    pub steps_used: u64,
    pub step_limit_exceeded: bool,
    pub stopped: bool,
    pub created: u64,
    /// Tokens removed at a Transfer stage with nowhere to go.
    pub consumed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub final_tokens: Vec<Token>,
    pub meta: TraceMeta,
}

impl Trace {
    /// JSON lines, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("guard on `{arc}` failed to evaluate for token {token}: {source}")]
    GuardTypeError {
        arc: String,
        token: u64,
        source: EvalError,
    },
    #[error("action at {stage} failed for token {token}: {source}")]
    ActionError {
        stage: StageRef,
        token: u64,
        source: EvalError,
    },
    #[error("trigger `{trigger}` fires into {stage} but the scenario has no mint seed for `{}`", .stage.machine)]
    UnseededCreate { trigger: String, stage: StageRef },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
