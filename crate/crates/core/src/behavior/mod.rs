//! Dynamics over a static model: subdiagrams, regions, events and the
//! behavior graph that orders them.

mod graph;
mod regions;
mod subdiagram;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::StageRef;

pub use graph::{chronologies, infer_behavior, validate_behavior, BehaviorError};
pub use regions::{check_regions, region_of_arc, region_of_stage};
pub use subdiagram::{
    enumerate_subdiagrams, enumerate_subdiagrams_capped, is_connected, EnumerateError, DEFAULT_CAP,
};

/// A connected piece of the static diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subdiagram {
    pub stages: BTreeSet<StageRef>,
    pub arcs: BTreeSet<String>,
}

impl Subdiagram {
    pub fn size(&self) -> usize {
        self.stages.len() + self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub label: String,
    pub body: Subdiagram,
}

/// Discrete time span: `duration` steps starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: u64,
    pub duration: u64,
}

impl Interval {
    /// `duration` is clamped to at least one step.
    pub fn new(start: u64, duration: u64) -> Self {
        Interval {
            start,
            duration: duration.max(1),
        }
    }

    pub fn end(&self) -> u64 {
        self.start + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: String,
    pub region: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
}

/// How declared intervals must relate along an edge `Ei -> Ej`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMode {
    /// `start(Ej) >= start(Ei)`
    #[default]
    Overlap,
    /// `start(Ej) >= start(Ei) + duration(Ei)`
    Strict,
}

impl fmt::Display for IntervalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalMode::Overlap => "overlap",
            IntervalMode::Strict => "strict",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorGraph {
    /// Vertices, in declaration order.
    pub events: Vec<Event>,
    pub edges: Vec<(String, String)>,
    pub initial: Vec<String>,
}

impl BehaviorGraph {
    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.id == id)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|(a, b)| a == from && b == to)
    }

    pub fn successors<'a>(&'a self, from: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(a, _)| a == from)
            .map(|(_, b)| b.as_str())
    }

    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges.iter().cloned().collect()
    }
}

/// A `behavior { ... }` declaration: the graph plus its interval mode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<IntervalMode>,
    pub graph: BehaviorGraph,
}
