//! Static thinging-machine model: machines, stages, flows, triggers and things.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;

/// The five generic stages a machine may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StageKind {
    Create,
    Process,
    Release,
    Receive,
    Transfer,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [
        StageKind::Create,
        StageKind::Process,
        StageKind::Release,
        StageKind::Receive,
        StageKind::Transfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageKind::Create => "Create",
            StageKind::Process => "Process",
            StageKind::Release => "Release",
            StageKind::Receive => "Receive",
            StageKind::Transfer => "Transfer",
        }
    }

    /// Case-insensitive keyword lookup.
    pub fn from_keyword(word: &str) -> Option<StageKind> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a solid flow `source -> target` is legal.
///
/// Within one machine the legal rows are Transfer→Receive, Receive→Process,
/// Receive→Release, Create→Process, Create→Release, Process→Release and
/// Release→Transfer. Across machines only Transfer→Transfer is legal.
pub fn flow_allowed(source: StageKind, target: StageKind, same_machine: bool) -> bool {
    use StageKind::*;
    if !same_machine {
        return source == Transfer && target == Transfer;
    }
    matches!(
        (source, target),
        (Transfer, Receive)
            | (Receive, Process)
            | (Receive, Release)
            | (Create, Process)
            | (Create, Release)
            | (Process, Release)
            | (Release, Transfer)
    )
}

/// Address of one stage instance. Machine ids are unique model-wide, so the
/// owning machine's id is a complete address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StageRef {
    pub machine: String,
    pub kind: StageKind,
}

impl StageRef {
    pub fn new(machine: impl Into<String>, kind: StageKind) -> Self {
        StageRef {
            machine: machine.into(),
            kind,
        }
    }
}

impl fmt::Display for StageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.machine, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Machine {
    pub id: String,
    pub name: String,
    /// Declared stages in declaration order. Duplicates are representable so
    /// the validator can report them.
    pub stages: Vec<StageKind>,
    pub submachines: Vec<Machine>,
}

impl Machine {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Machine {
            name: id.clone(),
            id,
            stages: Vec::new(),
            submachines: Vec::new(),
        }
    }

    pub fn with_stages(mut self, stages: &[StageKind]) -> Self {
        self.stages.extend_from_slice(stages);
        self
    }

    pub fn with_submachine(mut self, m: Machine) -> Self {
        self.submachines.push(m);
        self
    }

    pub fn declares(&self, kind: StageKind) -> bool {
        self.stages.contains(&kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowArc {
    pub id: String,
    pub source: StageRef,
    pub target: StageRef,
    pub thing: Option<String>,
    pub guard: Option<Expr>,
    /// Optional annotation, e.g. a step number drawn next to the arc.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerArc {
    pub id: String,
    pub source: StageRef,
    pub target: StageRef,
    pub guard: Option<Expr>,
    pub label: Option<String>,
}

/// Machine-to-machine shorthand `A => B`, expanded by [`desugar`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SugaredFlow {
    pub id: String,
    pub from: String,
    pub to: String,
    pub thing: Option<String>,
    pub guard: Option<Expr>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrType {
    Int,
    Text,
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrType::Int => "int",
            AttrType::Text => "text",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThingDecl {
    pub name: String,
    pub attributes: Vec<(String, AttrType)>,
}

impl ThingDecl {
    pub fn attribute(&self, name: &str) -> Option<AttrType> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }
}

/// Either kind of arc, borrowed from a model.
#[derive(Debug, Clone, Copy)]
pub enum ArcRef<'a> {
    Flow(&'a FlowArc),
    Trigger(&'a TriggerArc),
}

impl<'a> ArcRef<'a> {
    pub fn id(&self) -> &'a str {
        match self {
            ArcRef::Flow(f) => &f.id,
            ArcRef::Trigger(t) => &t.id,
        }
    }

    pub fn source(&self) -> &'a StageRef {
        match self {
            ArcRef::Flow(f) => &f.source,
            ArcRef::Trigger(t) => &t.source,
        }
    }

    pub fn target(&self) -> &'a StageRef {
        match self {
            ArcRef::Flow(f) => &f.target,
            ArcRef::Trigger(t) => &t.target,
        }
    }

    pub fn is_trigger(&self) -> bool {
        matches!(self, ArcRef::Trigger(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmModel {
    pub machines: Vec<Machine>,
    pub flows: Vec<FlowArc>,
    pub triggers: Vec<TriggerArc>,
    #[serde(default)]
    pub sugared: Vec<SugaredFlow>,
    pub things: Vec<ThingDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown machine `{0}`")]
    UnknownMachine(String),
    #[error("machine `{machine}` does not declare a {kind} stage")]
    StageNotDeclared { machine: String, kind: StageKind },
}

impl TmModel {
    /// Depth-first, pre-order walk over the machine tree.
    pub fn walk(&self) -> Vec<&Machine> {
        fn go<'a>(m: &'a Machine, out: &mut Vec<&'a Machine>) {
            out.push(m);
            for s in &m.submachines {
                go(s, out);
            }
        }
        let mut out = Vec::new();
        for m in &self.machines {
            go(m, &mut out);
        }
        out
    }

    pub fn machine(&self, id: &str) -> Option<&Machine> {
        self.walk().into_iter().find(|m| m.id == id)
    }

    pub fn thing(&self, name: &str) -> Option<&ThingDecl> {
        self.things.iter().find(|t| t.name == name)
    }

    /// Flows first, then triggers, each in declaration order.
    pub fn arcs(&self) -> impl Iterator<Item = ArcRef<'_>> {
        self.flows
            .iter()
            .map(ArcRef::Flow)
            .chain(self.triggers.iter().map(ArcRef::Trigger))
    }

    pub fn arc(&self, id: &str) -> Option<ArcRef<'_>> {
        self.arcs().find(|a| a.id() == id)
    }

    /// Every declared stage, in machine walk order then declaration order.
    /// Duplicate declarations are reported once.
    pub fn stage_refs(&self) -> Vec<StageRef> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for m in self.walk() {
            for &k in &m.stages {
                let r = StageRef::new(m.id.clone(), k);
                if seen.insert(r.clone()) {
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn arc_count(&self) -> usize {
        self.flows.len() + self.triggers.len() + self.sugared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.machines.is_empty() && self.arc_count() == 0 && self.things.is_empty()
    }

    /// Map from machine id to its parent id (roots absent).
    pub fn parents(&self) -> HashMap<&str, &str> {
        fn go<'a>(m: &'a Machine, out: &mut HashMap<&'a str, &'a str>) {
            for s in &m.submachines {
                out.insert(s.id.as_str(), m.id.as_str());
                go(s, out);
            }
        }
        let mut out = HashMap::new();
        for m in &self.machines {
            go(m, &mut out);
        }
        out
    }
}

/// Find the machine owning `r` and confirm it declares the stage.
pub fn resolve<'m>(
    model: &'m TmModel,
    r: &StageRef,
) -> Result<(&'m Machine, StageKind), ResolveError> {
    let m = model
        .machine(&r.machine)
        .ok_or_else(|| ResolveError::UnknownMachine(r.machine.clone()))?;
    if !m.declares(r.kind) {
        return Err(ResolveError::StageNotDeclared {
            machine: r.machine.clone(),
            kind: r.kind,
        });
    }
    Ok((m, r.kind))
}

fn machine_mut<'a>(machines: &'a mut [Machine], id: &str) -> Option<&'a mut Machine> {
    for m in machines {
        if m.id == id {
            return Some(m);
        }
        if let Some(found) = machine_mut(&mut m.submachines, id) {
            return Some(found);
        }
    }
    None
}

fn ensure_stage(model: &mut TmModel, machine: &str, kind: StageKind) {
    if let Some(m) = machine_mut(&mut model.machines, machine) {
        if !m.declares(kind) {
            m.stages.push(kind);
        }
    }
}

/// Expand every sugared `A => B` arc into the explicit
/// `A.Release -> A.Transfer -> B.Transfer -> B.Receive` chain, declaring the
/// four stages where missing. Generated ids are `<id>_rel`, `<id>_xfer` and
/// `<id>_recv`, suffixed with a counter if taken.
pub fn desugar(model: &TmModel) -> TmModel {
    if model.sugared.is_empty() {
        return model.clone();
    }
    let mut out = model.clone();
    let sugared = std::mem::take(&mut out.sugared);
    let mut taken: BTreeSet<String> = out.arcs().map(|a| a.id().to_string()).collect();
    for s in &sugared {
        taken.insert(s.id.clone());
    }
    let mut fresh = |base: String| -> String {
        let mut candidate = base.clone();
        let mut n = 2;
        while taken.contains(&candidate) {
            candidate = format!("{base}{n}");
            n += 1;
        }
        taken.insert(candidate.clone());
        candidate
    };

    use StageKind::*;
    for s in sugared {
        ensure_stage(&mut out, &s.from, Release);
        ensure_stage(&mut out, &s.from, Transfer);
        ensure_stage(&mut out, &s.to, Transfer);
        ensure_stage(&mut out, &s.to, Receive);
        let legs = [
            (
                "rel",
                StageRef::new(&s.from, Release),
                StageRef::new(&s.from, Transfer),
            ),
            (
                "xfer",
                StageRef::new(&s.from, Transfer),
                StageRef::new(&s.to, Transfer),
            ),
            (
                "recv",
                StageRef::new(&s.to, Transfer),
                StageRef::new(&s.to, Receive),
            ),
        ];
        for (suffix, source, target) in legs {
            let cross = suffix == "xfer";
            out.flows.push(FlowArc {
                id: fresh(format!("{}_{suffix}", s.id)),
                source,
                target,
                thing: s.thing.clone(),
                guard: if cross { s.guard.clone() } else { None },
                label: if cross { s.label.clone() } else { None },
            });
        }
    }
    out
}
