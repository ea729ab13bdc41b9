use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::diag::{codes, Diagnostic, ValidationReport};
use crate::model::{desugar, StageKind, TmModel};

use super::regions::{check_regions, region_of_stage};
use super::{BehaviorGraph, Event, IntervalMode, Region};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehaviorError {
    #[error("region check failed with {} error(s)", .0.errors().count())]
    RegionCheckFailed(ValidationReport),
    #[error("behavior graph has no initial events")]
    NoInitialEvents,
}

/// Region pairs `(i, j)`, `i != j`, joined by at least one flow or trigger
/// whose source lies in region `i` and target in region `j`. Ordered by
/// region declaration order.
fn boundary_pairs(model: &TmModel, regions: &[Region]) -> Vec<(usize, usize)> {
    let pos: HashMap<&str, usize> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect();
    let mut pairs = BTreeSet::new();
    for arc in model.arcs() {
        let (Some(a), Some(b)) = (
            region_of_stage(regions, arc.source()),
            region_of_stage(regions, arc.target()),
        ) else {
            continue;
        };
        if a.id != b.id {
            pairs.insert((pos[a.id.as_str()], pos[b.id.as_str()]));
        }
    }
    pairs.into_iter().collect()
}

/// One event per region (no intervals), an edge wherever an arc leaves one
/// region and enters another, and as initial events the regions holding a
/// Create stage that no other region's arc enters.
pub fn infer_behavior(model: &TmModel, regions: &[Region]) -> Result<BehaviorGraph, BehaviorError> {
    let report = check_regions(model, regions);
    if !report.ok {
        return Err(BehaviorError::RegionCheckFailed(report));
    }
    let model = desugar(model);
    let events = regions
        .iter()
        .map(|r| Event {
            id: r.id.clone(),
            region: r.id.clone(),
            interval: None,
        })
        .collect();
    let edges = boundary_pairs(&model, regions)
        .into_iter()
        .map(|(i, j)| (regions[i].id.clone(), regions[j].id.clone()))
        .collect();
    let initial = regions
        .iter()
        .filter(|r| {
            r.body.stages.iter().any(|s| {
                s.kind == StageKind::Create
                    && !model.arcs().any(|a| {
                        a.target() == s
                            && region_of_stage(regions, a.source())
                                .is_some_and(|src| src.id != r.id)
                    })
            })
        })
        .map(|r| r.id.clone())
        .collect();
    Ok(BehaviorGraph {
        events,
        edges,
        initial,
    })
}

/// Check a declared behavior graph against the regions and model.
pub fn validate_behavior(
    model: &TmModel,
    regions: &[Region],
    declared: &BehaviorGraph,
    mode: IntervalMode,
) -> ValidationReport {
    let inferred = match infer_behavior(model, regions) {
        Ok(g) => g,
        Err(BehaviorError::RegionCheckFailed(r)) => return r,
        Err(BehaviorError::NoInitialEvents) => {
            unreachable!("inference never requires initial events")
        }
    };
    let mut report = ValidationReport::default();
    let region_ids: HashSet<&str> = regions.iter().map(|r| r.id.as_str()).collect();

    let mut event_region: HashMap<&str, &str> = HashMap::new();
    for e in &declared.events {
        if event_region.insert(&e.id, &e.region).is_some() {
            report.push(Diagnostic::error(
                codes::DUPLICATE_ID,
                format!("event `{}` declared more than once", e.id),
            ));
        }
        if !region_ids.contains(e.region.as_str()) {
            report.push(Diagnostic::error(
                codes::DANGLING_REF,
                format!("event `{}` refers to unknown region `{}`", e.id, e.region),
            ));
        }
    }
    for id in &declared.initial {
        if !event_region.contains_key(id.as_str()) {
            report.push(Diagnostic::error(
                codes::UNKNOWN_EVENT,
                format!("initial event `{id}` is not declared"),
            ));
        }
    }

    let mut covered = HashSet::new();
    for (a, b) in &declared.edges {
        let (Some(&ra), Some(&rb)) = (event_region.get(a.as_str()), event_region.get(b.as_str()))
        else {
            for x in [a, b] {
                if !event_region.contains_key(x.as_str()) {
                    report.push(Diagnostic::error(
                        codes::UNKNOWN_EVENT,
                        format!("edge {a} -> {b} uses undeclared event `{x}`"),
                    ));
                }
            }
            continue;
        };
        if inferred.has_edge(ra, rb) {
            covered.insert((ra, rb));
        } else {
            report.push(Diagnostic::error(
                codes::UNSUPPORTED_EDGE,
                format!("edge {a} -> {b}: no arc leads from region `{ra}` into region `{rb}`"),
            ));
        }
        let (ea, eb) = (declared.event(a).unwrap(), declared.event(b).unwrap());
        if let (Some(ia), Some(ib)) = (ea.interval, eb.interval) {
            let earliest = match mode {
                IntervalMode::Overlap => ia.start,
                IntervalMode::Strict => ia.end(),
            };
            if ib.start < earliest {
                report.push(Diagnostic::error(
                    codes::INTERVAL_ORDER,
                    format!(
                        "edge {a} -> {b}: `{b}` starts at {} but must not start before {earliest} ({mode} mode)",
                        ib.start
                    ),
                ));
            }
        }
    }
    for (ra, rb) in &inferred.edges {
        if !covered.contains(&(ra.as_str(), rb.as_str())) {
            report.push(Diagnostic::warning(
                codes::MISSING_EDGE,
                format!(
                    "arcs lead from region `{ra}` into `{rb}` but no declared edge covers them"
                ),
            ));
        }
    }
    report
}

/// Walks from the initial events, in edge declaration order. A walk ends when
/// it reaches `max_len` events or an event without successors. Cycles are
/// followed until the length bound.
pub fn chronologies(
    graph: &BehaviorGraph,
    max_len: usize,
) -> Result<Vec<Vec<String>>, BehaviorError> {
    if graph.initial.is_empty() {
        return Err(BehaviorError::NoInitialEvents);
    }
    let mut out = Vec::new();
    if max_len == 0 {
        return Ok(out);
    }
    fn go<'a>(
        g: &'a BehaviorGraph,
        walk: &mut Vec<&'a str>,
        max_len: usize,
        out: &mut Vec<Vec<String>>,
    ) {
        let last = walk[walk.len() - 1];
        let succ: Vec<&str> = g.successors(last).collect();
        if walk.len() == max_len || succ.is_empty() {
            out.push(walk.iter().map(|s| s.to_string()).collect());
            return;
        }
        for s in succ {
            walk.push(s);
            go(g, walk, max_len, out);
            walk.pop();
        }
    }
    for init in &graph.initial {
        let mut walk = vec![init.as_str()];
        go(graph, &mut walk, max_len, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str)], initial: &[&str]) -> BehaviorGraph {
        let mut ids: Vec<&str> = edges
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .chain(initial.iter().copied())
            .collect();
        ids.dedup();
        let mut seen = HashSet::new();
        ids.retain(|i| seen.insert(*i));
        BehaviorGraph {
            events: ids
                .iter()
                .map(|i| Event {
                    id: i.to_string(),
                    region: i.to_string(),
                    interval: None,
                })
                .collect(),
            edges: edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            initial: initial.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn chronologies_follow_loops_to_bound() {
        let g = graph(&[("a", "b"), ("b", "a"), ("b", "c")], &["a"]);
        let walks = chronologies(&g, 4).unwrap();
        assert_eq!(walks, vec![vec!["a", "b", "a", "b"], vec!["a", "b", "c"]]);
    }

    #[test]
    fn single_vertex_and_no_initial() {
        let g = graph(&[], &["v"]);
        assert_eq!(chronologies(&g, 3).unwrap(), vec![vec!["v".to_string()]]);
        let none = graph(&[("a", "b")], &[]);
        assert_eq!(chronologies(&none, 3), Err(BehaviorError::NoInitialEvents));
    }
}
