//! Synchronous step semantics.
//!
//! Each step: injections due at the step create tokens; then every token
//! that is ready, in id order, completes its stage (actions, then triggers)
//! once and tries to move along one enabled outgoing flow. A token entering
//! a Process stage becomes ready two steps later, any other stage one step
//! later. A stage targeted by a non-Create trigger is gated: a token there
//! completes only by consuming one enablement produced by an earlier trigger
//! firing.
//!
//! At a Transfer stage a token keeps its direction. One that came from
//! another machine goes inward to Receive (or onward, if the machine has no
//! inward flow); one that came from inside leaves along a Transfer→Transfer
//! flow. A token at a Transfer stage with no such flow is consumed.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{AttrValue, Attributes};
use crate::model::{desugar, resolve, AttrType, FlowArc, StageKind, StageRef, TmModel};

use super::{Policy, RecordKind, Scenario, SimError, Token, TokenSeed, Trace, TraceRecord};

struct Live {
    token: Token,
    ready_at: u64,
    completed: bool,
    /// Machine the token arrived from, when it crossed a machine boundary.
    came_from: Option<String>,
}

fn hold(kind: StageKind) -> u64 {
    if kind == StageKind::Process {
        2
    } else {
        1
    }
}

fn instantiate(model: &TmModel, seed: &TokenSeed) -> Result<Attributes, SimError> {
    let decl = model
        .thing(&seed.thing)
        .ok_or_else(|| SimError::InvalidScenario(format!("undeclared thing `{}`", seed.thing)))?;
    let mut attrs: Attributes = decl
        .attributes
        .iter()
        .map(|(n, t)| {
            let v = match t {
                AttrType::Int => AttrValue::Int(0),
                AttrType::Text => AttrValue::Text(String::new()),
            };
            (n.clone(), v)
        })
        .collect();
    for (name, value) in &seed.attributes {
        let ty = decl.attribute(name).ok_or_else(|| {
            SimError::InvalidScenario(format!("thing `{}` has no attribute `{name}`", seed.thing))
        })?;
        let matches = matches!(
            (ty, value),
            (AttrType::Int, AttrValue::Int(_)) | (AttrType::Text, AttrValue::Text(_))
        );
        if !matches {
            return Err(SimError::InvalidScenario(format!(
                "attribute `{name}` of `{}` must be {ty}",
                seed.thing
            )));
        }
        attrs.insert(name.clone(), value.clone());
    }
    Ok(attrs)
}

fn check_scenario(model: &TmModel, sc: &Scenario) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::InvalidScenario(m));
    if sc.max_steps == 0 {
        return bad("max_steps must be at least 1".into());
    }
    let seeds = sc
        .initial
        .iter()
        .map(|(at, s)| (at, s))
        .chain(sc.injections.iter().map(|i| (&i.at, &i.seed)));
    for (at, seed) in seeds {
        if let Err(e) = resolve(model, at) {
            return bad(format!("{at}: {e}"));
        }
        if at.kind != StageKind::Create {
            return bad(format!(
                "tokens can only be created at Create stages, not {at}"
            ));
        }
        instantiate(model, seed)?;
    }
    for (machine, seed) in &sc.mints {
        if model.machine(machine).is_none() {
            return bad(format!("mint for unknown machine `{machine}`"));
        }
        instantiate(model, seed)?;
    }
    for (at, _) in &sc.actions {
        if let Err(e) = resolve(model, at) {
            return bad(format!("action at {at}: {e}"));
        }
    }
    Ok(())
}

struct Engine<'a> {
    model: &'a TmModel,
    sc: &'a Scenario,
    tokens: BTreeMap<u64, Live>,
    next_id: u64,
    /// Steps at which pending enablements of gated stages become usable.
    enablements: HashMap<StageRef, Vec<u64>>,
    gated: HashSet<StageRef>,
    trace: Trace,
    rng: ChaCha8Rng,
}

impl<'a> Engine<'a> {
    fn create(&mut self, at: StageRef, seed: &TokenSeed, step: u64) -> Result<(), SimError> {
        let attributes = instantiate(self.model, seed)?;
        let id = self.next_id;
        self.next_id += 1;
        self.tokens.insert(
            id,
            Live {
                token: Token {
                    id,
                    thing: seed.thing.clone(),
                    attributes,
                    at,
                },
                ready_at: step + 1,
                completed: false,
                came_from: None,
            },
        );
        self.trace.meta.created += 1;
        Ok(())
    }

    /// Flows a token may take from its stage, ignoring guards.
    fn candidate_flows(&self, live: &Live) -> Vec<&'a FlowArc> {
        let at = &live.token.at;
        let from_here: Vec<&FlowArc> = self
            .model
            .flows
            .iter()
            .filter(|f| &f.source == at)
            .filter(|f| f.thing.as_ref().is_none_or(|t| *t == live.token.thing))
            .collect();
        if at.kind != StageKind::Transfer {
            return from_here;
        }
        let (inward, outward): (Vec<_>, Vec<_>) = from_here
            .into_iter()
            .partition(|f| f.target.machine == at.machine);
        match &live.came_from {
            Some(_) if !inward.is_empty() => inward,
            Some(origin) => outward
                .into_iter()
                .filter(|f| &f.target.machine != origin)
                .collect(),
            None => outward,
        }
    }

    fn take_enablement(&mut self, stage: &StageRef, step: u64) -> bool {
        let Some(pending) = self.enablements.get_mut(stage) else {
            return false;
        };
        match pending.iter().position(|&at| at <= step) {
            Some(i) => {
                pending.remove(i);
                true
            }
            None => false,
        }
    }

    /// Actions and triggers for a token finishing its stage.
    fn complete(&mut self, id: u64, step: u64) -> Result<(), SimError> {
        let at = self.tokens[&id].token.at.clone();
        for stmt in self.sc.actions_at(&at) {
            let live = self.tokens.get_mut(&id).expect("token exists");
            stmt.execute(&mut live.token.attributes)
                .map_err(|source| SimError::ActionError {
                    stage: at.clone(),
                    token: id,
                    source,
                })?;
        }
        for trig in self.model.triggers.iter().filter(|t| t.source == at) {
            if let Some(g) = &trig.guard {
                let attrs = &self.tokens[&id].token.attributes;
                let fire = g
                    .eval_guard(attrs)
                    .map_err(|source| SimError::GuardTypeError {
                        arc: trig.id.clone(),
                        token: id,
                        source,
                    })?;
                if !fire {
                    continue;
                }
            }
            self.trace.records.push(TraceRecord {
                step,
                arc: trig.id.clone(),
                kind: RecordKind::Trigger,
                token: id,
                source: trig.source.clone(),
                target: trig.target.clone(),
            });
            if trig.target.kind == StageKind::Create {
                let seed = self
                    .sc
                    .mint_for(&trig.target.machine)
                    .ok_or_else(|| SimError::UnseededCreate {
                        trigger: trig.id.clone(),
                        stage: trig.target.clone(),
                    })?
                    .clone();
                self.create(trig.target.clone(), &seed, step)?;
            } else {
                self.enablements
                    .entry(trig.target.clone())
                    .or_default()
                    .push(step + 1);
            }
        }
        self.tokens.get_mut(&id).expect("token exists").completed = true;
        Ok(())
    }

    /// Returns whether anything happened to the token.
    fn advance(&mut self, id: u64, step: u64) -> Result<bool, SimError> {
        let live = &self.tokens[&id];
        if live.ready_at > step {
            return Ok(false);
        }
        let mut active = false;
        if !live.completed {
            let at = live.token.at.clone();
            if self.gated.contains(&at) && !self.take_enablement(&at, step) {
                return Ok(false);
            }
            self.complete(id, step)?;
            active = true;
        }

        let live = &self.tokens[&id];
        let candidates = self.candidate_flows(live);
        if candidates.is_empty() {
            if live.token.at.kind == StageKind::Transfer {
                self.tokens.remove(&id);
                self.trace.meta.consumed += 1;
                return Ok(true);
            }
            return Ok(active);
        }
        let mut enabled = Vec::new();
        for f in candidates {
            let ok = match &f.guard {
                None => true,
                Some(g) => g.eval_guard(&live.token.attributes).map_err(|source| {
                    SimError::GuardTypeError {
                        arc: f.id.clone(),
                        token: id,
                        source,
                    }
                })?,
            };
            if ok {
                enabled.push(f);
            }
        }
        if enabled.is_empty() {
            return Ok(active);
        }
        let flow = match self.sc.policy {
            Policy::Deterministic => enabled[0],
            Policy::SeededRandom => enabled[self.rng.gen_range(0..enabled.len())],
        };
        let live = self.tokens.get_mut(&id).expect("token exists");
        self.trace.records.push(TraceRecord {
            step,
            arc: flow.id.clone(),
            kind: RecordKind::Flow,
            token: id,
            source: flow.source.clone(),
            target: flow.target.clone(),
        });
        live.came_from =
            (flow.source.machine != flow.target.machine).then(|| flow.source.machine.clone());
        live.token.at = flow.target.clone();
        live.ready_at = step + hold(flow.target.kind);
        live.completed = false;
        Ok(true)
    }

    fn stop_requested(&self) -> bool {
        let Some(stop) = &self.sc.stop else {
            return false;
        };
        self.tokens
            .values()
            .any(|l| stop.eval_guard(&l.token.attributes) == Ok(true))
    }

    fn pending_after(&self, step: u64) -> bool {
        self.sc.injections.iter().any(|i| i.step > step)
            || self.tokens.values().any(|l| l.ready_at > step)
            || self.enablements.values().flatten().any(|&at| at > step)
    }

    fn run(mut self) -> Result<Trace, SimError> {
        for (at, seed) in &self.sc.initial {
            self.create(at.clone(), seed, 0)?;
        }
        let mut last_active: Option<u64> = (!self.tokens.is_empty()).then_some(0);
        let mut step = 0;
        loop {
            if step >= self.sc.max_steps {
                self.trace.meta.step_limit_exceeded = true;
                break;
            }
            let mut active = false;
            for inj in self.sc.injections.iter().filter(|i| i.step == step) {
                self.create(inj.at.clone(), &inj.seed, step)?;
                active = true;
            }
            let ids: Vec<u64> = self.tokens.keys().copied().collect();
            for id in ids {
                if self.tokens.contains_key(&id) {
                    active |= self.advance(id, step)?;
                }
            }
            if active {
                last_active = Some(step);
            }
            if self.stop_requested() {
                self.trace.meta.stopped = true;
                break;
            }
            if !active && !self.pending_after(step) {
                break;
            }
            step += 1;
        }
        self.trace.meta.steps_used = last_active.map_or(0, |s| s + 1);
        self.trace.final_tokens = self.tokens.into_values().map(|l| l.token).collect();
        Ok(self.trace)
    }
}

/// Run `scenario` against `model` (desugared first). Fully reproducible for a
/// given model and scenario, including the random seed.
pub fn simulate(model: &TmModel, scenario: &Scenario) -> Result<Trace, SimError> {
    let model = desugar(model);
    check_scenario(&model, scenario)?;
    let gated = model
        .triggers
        .iter()
        .filter(|t| t.target.kind != StageKind::Create)
        .map(|t| t.target.clone())
        .collect();
    let engine = Engine {
        model: &model,
        sc: scenario,
        tokens: BTreeMap::new(),
        next_id: 0,
        enablements: HashMap::new(),
        gated,
        trace: Trace::default(),
        rng: ChaCha8Rng::seed_from_u64(scenario.seed),
    };
    engine.run()
}
