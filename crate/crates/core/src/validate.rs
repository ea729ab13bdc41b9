//! Static checks over a parsed model.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::diag::{codes, Diagnostic, ValidationReport};
use crate::expr::Expr;
use crate::model::{desugar, flow_allowed, resolve, ResolveError, StageKind, StageRef, TmModel};

/// Validate a model. Sugared arcs are expanded before checking. Static
/// contradictions such as opposing flows are warnings, never errors.
pub fn validate(model: &TmModel) -> ValidationReport {
    let model = desugar(model);
    let mut report = ValidationReport::default();

    let mut machine_ids = HashSet::new();
    for m in model.walk() {
        if !machine_ids.insert(m.id.as_str()) {
            report.push(Diagnostic::error(
                codes::DUPLICATE_ID,
                format!("machine id `{}` declared more than once", m.id),
            ));
        }
        let mut kinds = HashSet::new();
        for k in &m.stages {
            if !kinds.insert(*k) {
                report.push(Diagnostic::error(
                    codes::DUPLICATE_STAGE,
                    format!("machine `{}` declares {k} more than once", m.id),
                ));
            }
        }
    }
    let mut arc_ids = HashSet::new();
    for a in model.arcs() {
        if !arc_ids.insert(a.id()) {
            report.push(Diagnostic::error(
                codes::DUPLICATE_ID,
                format!("arc id `{}` declared more than once", a.id()),
            ));
        }
    }

    let all_attrs: BTreeSet<&str> = model
        .things
        .iter()
        .flat_map(|t| t.attributes.iter().map(|(n, _)| n.as_str()))
        .collect();

    let check_ref = |report: &mut ValidationReport, arc: &str, r: &StageRef| -> bool {
        match resolve(&model, r) {
            Ok(_) => true,
            Err(e) => {
                report.push(Diagnostic::error(
                    codes::UNRESOLVED_REF,
                    format!("arc `{arc}`: {r} does not resolve ({e})"),
                ));
                false
            }
        }
    };
    let check_guard =
        |report: &mut ValidationReport, arc: &str, guard: &Expr, allowed: &BTreeSet<&str>| {
            for a in guard.attributes() {
                if !allowed.contains(a) {
                    report.push(Diagnostic::error(
                        codes::UNDECLARED_ATTRIBUTE,
                        format!("guard on arc `{arc}` references undeclared attribute `{a}`"),
                    ));
                }
            }
        };

    for f in &model.flows {
        let ok_src = check_ref(&mut report, &f.id, &f.source);
        let ok_dst = check_ref(&mut report, &f.id, &f.target);
        if ok_src && ok_dst {
            let same = f.source.machine == f.target.machine;
            if !flow_allowed(f.source.kind, f.target.kind, same) {
                let scope = if same {
                    "same machine"
                } else {
                    "different machines"
                };
                let mut msg = format!(
                    "flow `{}`: {} -> {} is not a legal flow ({scope})",
                    f.id, f.source.kind, f.target.kind
                );
                if f.source.kind == StageKind::Process && f.target.kind == StageKind::Create {
                    msg.push_str("; creation by processing must be a trigger");
                }
                report.push(Diagnostic::error(codes::ADJACENCY, msg));
            }
        }
        let thing = match &f.thing {
            Some(t) => match model.thing(t) {
                Some(decl) => Some(decl),
                None => {
                    report.push(Diagnostic::error(
                        codes::UNDECLARED_THING,
                        format!("flow `{}` carries undeclared thing `{t}`", f.id),
                    ));
                    None
                }
            },
            None => None,
        };
        if let Some(g) = &f.guard {
            let allowed: BTreeSet<&str> = match thing {
                Some(decl) => decl.attributes.iter().map(|(n, _)| n.as_str()).collect(),
                None if f.thing.is_some() => BTreeSet::new(),
                None => all_attrs.clone(),
            };
            // An undeclared thing was already reported; skip the cascade.
            if f.thing.is_none() || thing.is_some() {
                check_guard(&mut report, &f.id, g, &allowed);
            }
        }
    }

    for t in &model.triggers {
        check_ref(&mut report, &t.id, &t.source);
        check_ref(&mut report, &t.id, &t.target);
        if t.source == t.target {
            report.push(Diagnostic::error(
                codes::TRIGGER_SELF_LOOP,
                format!(
                    "trigger `{}` has identical source and target {}",
                    t.id, t.source
                ),
            ));
        }
        if let Some(g) = &t.guard {
            check_guard(&mut report, &t.id, g, &all_attrs);
        }
    }

    // Opposing flows between the same machine pair over the same thing.
    let mut directions: BTreeMap<(String, String, Option<String>), (bool, bool)> = BTreeMap::new();
    for f in &model.flows {
        let (a, b) = (&f.source.machine, &f.target.machine);
        if a == b {
            continue;
        }
        let forward = a < b;
        let key = if forward {
            (a.clone(), b.clone(), f.thing.clone())
        } else {
            (b.clone(), a.clone(), f.thing.clone())
        };
        let e = directions.entry(key).or_default();
        if forward {
            e.0 = true;
        } else {
            e.1 = true;
        }
    }
    for ((a, b, thing), (fwd, back)) in &directions {
        if *fwd && *back {
            let what = thing.as_deref().unwrap_or("untyped things");
            report.push(Diagnostic::warning(
                codes::OPPOSING_FLOWS,
                format!("{what} flows both ways between `{a}` and `{b}`; the static model permits both directions"),
            ));
        }
    }

    // Machines with no arcs at all.
    let touched: HashSet<&str> = model
        .arcs()
        .flat_map(|a| [a.source().machine.as_str(), a.target().machine.as_str()])
        .collect();
    let mut idle = HashSet::new();
    for m in model.walk() {
        let leaf_or_staged = m.submachines.is_empty() || !m.stages.is_empty();
        if leaf_or_staged && !touched.contains(m.id.as_str()) {
            idle.insert(m.id.as_str());
            report.push(Diagnostic::warning(
                codes::NO_ARCS,
                format!("machine `{}` has no flows or triggers", m.id),
            ));
        }
    }

    // Stages not reachable from any Create stage.
    let roots: Vec<StageRef> = model
        .stage_refs()
        .into_iter()
        .filter(|r| r.kind == StageKind::Create)
        .collect();
    let reached = closure(&model, roots);
    for r in model.stage_refs() {
        if !reached.contains(&r) && !idle.contains(r.machine.as_str()) {
            report.push(Diagnostic::warning(
                codes::UNREACHABLE,
                format!("stage {r} is not reachable from any Create stage"),
            ));
        }
    }

    report
}

fn closure(model: &TmModel, roots: Vec<StageRef>) -> BTreeSet<StageRef> {
    let mut adj: HashMap<&StageRef, Vec<&StageRef>> = HashMap::new();
    for a in model.arcs() {
        adj.entry(a.source()).or_default().push(a.target());
    }
    let mut seen: BTreeSet<StageRef> = roots.iter().cloned().collect();
    let mut queue: VecDeque<StageRef> = roots.into();
    while let Some(s) = queue.pop_front() {
        if let Some(next) = adj.get(&s) {
            for &t in next {
                if seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                }
            }
        }
    }
    seen
}

/// Forward closure over flows and triggers from `roots` (roots included).
pub fn reachable_stages(
    model: &TmModel,
    roots: &BTreeSet<StageRef>,
) -> Result<BTreeSet<StageRef>, ResolveError> {
    let model = desugar(model);
    for r in roots {
        resolve(&model, r)?;
    }
    Ok(closure(&model, roots.iter().cloned().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FlowArc, Machine, TriggerArc};
    use StageKind::*;

    fn flow(id: &str, s: (&str, StageKind), t: (&str, StageKind)) -> FlowArc {
        FlowArc {
            id: id.into(),
            source: StageRef::new(s.0, s.1),
            target: StageRef::new(t.0, t.1),
            thing: None,
            guard: None,
            label: None,
        }
    }

    #[test]
    fn create_to_receive_is_adjacency_error() {
        let m = TmModel {
            machines: vec![Machine::new("a").with_stages(&[Create, Receive])],
            flows: vec![flow("f", ("a", Create), ("a", Receive))],
            ..Default::default()
        };
        let r = validate(&m);
        assert!(!r.ok);
        let d = r.errors().find(|d| d.code == codes::ADJACENCY).unwrap();
        assert!(d.message.contains("Create"));
        assert!(d.message.contains("Receive"));
        assert!(d.message.contains("same machine"));
    }

    #[test]
    fn single_machine_without_arcs_only_warns_no_arcs() {
        let m = TmModel {
            machines: vec![Machine::new("a").with_stages(&StageKind::ALL)],
            ..Default::default()
        };
        let r = validate(&m);
        assert!(r.ok);
        assert_eq!(r.diagnostics.len(), 1);
        assert_eq!(r.diagnostics[0].code, codes::NO_ARCS);
    }

    #[test]
    fn structural_errors() {
        let m = TmModel {
            machines: vec![Machine::new("a").with_stages(&[Process, Process, Create])],
            flows: vec![flow("f", ("a", Create), ("ghost", Process))],
            triggers: vec![TriggerArc {
                id: "t".into(),
                source: StageRef::new("a", Process),
                target: StageRef::new("a", Process),
                guard: Some(Expr::attr("nope")),
                label: None,
            }],
            ..Default::default()
        };
        let r = validate(&m);
        for code in [
            codes::DUPLICATE_STAGE,
            codes::UNRESOLVED_REF,
            codes::TRIGGER_SELF_LOOP,
            codes::UNDECLARED_ATTRIBUTE,
        ] {
            assert!(r.has_code(code), "missing {code}");
        }
    }

    #[test]
    fn reachability_follows_triggers() {
        let m = TmModel {
            machines: vec![
                Machine::new("a").with_stages(&[Create, Process]),
                Machine::new("b").with_stages(&[Create]),
            ],
            flows: vec![flow("f", ("a", Create), ("a", Process))],
            triggers: vec![TriggerArc {
                id: "t".into(),
                source: StageRef::new("a", Process),
                target: StageRef::new("b", Create),
                guard: None,
                label: None,
            }],
            ..Default::default()
        };
        let roots = BTreeSet::from([StageRef::new("a", Create)]);
        let got = reachable_stages(&m, &roots).unwrap();
        assert!(got.contains(&StageRef::new("b", Create)));
        assert!(reachable_stages(&m, &BTreeSet::new()).unwrap().is_empty());
        let bad = BTreeSet::from([StageRef::new("b", Process)]);
        assert!(reachable_stages(&m, &bad).is_err());
    }
}
