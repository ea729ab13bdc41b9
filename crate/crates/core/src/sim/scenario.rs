use serde::{Deserialize, Serialize};

use crate::expr::{Attributes, Expr, Stmt};
use crate::model::StageRef;

/// Thing type plus explicit attribute values; unspecified attributes take
/// the type's zero value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeed {
    pub thing: String,
    #[serde(default)]
    pub attributes: Attributes,
}

impl TokenSeed {
    pub fn new(thing: impl Into<String>) -> Self {
        TokenSeed {
            thing: thing.into(),
            attributes: Attributes::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub step: u64,
    pub at: StageRef,
    pub seed: TokenSeed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// First enabled flow in declaration order.
    #[default]
    Deterministic,
    /// Uniform choice among enabled flows from a seeded generator.
    SeededRandom,
}

pub const DEFAULT_MAX_STEPS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub initial: Vec<(StageRef, TokenSeed)>,
    pub injections: Vec<Injection>,
    /// Per-machine seed used when a trigger fires into that machine's
    /// Create stage.
    pub mints: Vec<(String, TokenSeed)>,
    pub policy: Policy,
    pub seed: u64,
    pub max_steps: u64,
    pub actions: Vec<(StageRef, Vec<Stmt>)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<Expr>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: None,
            initial: Vec::new(),
            injections: Vec::new(),
            mints: Vec::new(),
            policy: Policy::Deterministic,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            actions: Vec::new(),
            stop: None,
        }
    }
}

impl Scenario {
    pub fn mint_for(&self, machine: &str) -> Option<&TokenSeed> {
        self.mints
            .iter()
            .find(|(m, _)| m == machine)
            .map(|(_, s)| s)
    }

    pub fn actions_at<'a>(&'a self, stage: &'a StageRef) -> impl Iterator<Item = &'a Stmt> + 'a {
        self.actions
            .iter()
            .filter(move |(r, _)| r == stage)
            .flat_map(|(_, stmts)| stmts.iter())
    }
}
