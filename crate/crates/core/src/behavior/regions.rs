use std::collections::{BTreeMap, HashSet};

use crate::diag::{codes, Diagnostic, ValidationReport};
use crate::model::{desugar, resolve, StageRef, TmModel};

use super::subdiagram::is_connected;
use super::Region;

/// Check that each region is a connected subdiagram of `model` and that
/// regions are pairwise disjoint on both stages and arcs.
pub fn check_regions(model: &TmModel, regions: &[Region]) -> ValidationReport {
    let model = desugar(model);
    let mut report = ValidationReport::default();
    let mut ids = HashSet::new();

    for r in regions {
        if !ids.insert(r.id.as_str()) {
            report.push(Diagnostic::error(
                codes::DUPLICATE_ID,
                format!("region `{}` declared more than once", r.id),
            ));
        }
        if r.body.stages.is_empty() {
            report.push(Diagnostic::error(
                codes::EMPTY_REGION,
                format!("region `{}` contains no stages", r.id),
            ));
            continue;
        }
        let mut dangling = false;
        for s in &r.body.stages {
            if let Err(e) = resolve(&model, s) {
                dangling = true;
                report.push(Diagnostic::error(
                    codes::DANGLING_REF,
                    format!("region `{}`: stage {s} does not resolve ({e})", r.id),
                ));
            }
        }
        for a in &r.body.arcs {
            match model.arc(a) {
                None => {
                    dangling = true;
                    report.push(Diagnostic::error(
                        codes::DANGLING_REF,
                        format!("region `{}`: unknown arc `{a}`", r.id),
                    ));
                }
                Some(arc) => {
                    for end in [arc.source(), arc.target()] {
                        if !r.body.stages.contains(end) {
                            dangling = true;
                            report.push(Diagnostic::error(
                                codes::NOT_CONNECTED,
                                format!(
                                    "region `{}`: arc `{a}` endpoint {end} is outside the region",
                                    r.id
                                ),
                            ));
                        }
                    }
                }
            }
        }
        if !dangling && !is_connected(&model, &r.body) {
            report.push(Diagnostic::error(
                codes::NOT_CONNECTED,
                format!("region `{}` is not connected by its arcs", r.id),
            ));
        }
    }

    let mut stage_owner: BTreeMap<&StageRef, &str> = BTreeMap::new();
    let mut arc_owner: BTreeMap<&str, &str> = BTreeMap::new();
    for r in regions {
        for s in &r.body.stages {
            if let Some(prev) = stage_owner.insert(s, &r.id) {
                if prev != r.id {
                    report.push(Diagnostic::error(
                        codes::OVERLAP,
                        format!("regions `{prev}` and `{}` both contain stage {s}", r.id),
                    ));
                }
            }
        }
        for a in &r.body.arcs {
            if let Some(prev) = arc_owner.insert(a, &r.id) {
                if prev != r.id {
                    report.push(Diagnostic::error(
                        codes::OVERLAP,
                        format!("regions `{prev}` and `{}` both contain arc `{a}`", r.id),
                    ));
                }
            }
        }
    }
    report
}

/// The first region whose body contains `stage`.
pub fn region_of_stage<'r>(regions: &'r [Region], stage: &StageRef) -> Option<&'r Region> {
    regions.iter().find(|r| r.body.stages.contains(stage))
}

/// The first region whose body contains arc `id`.
pub fn region_of_arc<'r>(regions: &'r [Region], id: &str) -> Option<&'r Region> {
    regions.iter().find(|r| r.body.arcs.contains(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::Subdiagram;
    use crate::model::{FlowArc, Machine, StageKind::*};

    fn model() -> TmModel {
        TmModel {
            machines: vec![Machine::new("sum").with_stages(&[Receive, Process, Release])],
            flows: vec![FlowArc {
                id: "f".into(),
                source: StageRef::new("sum", Receive),
                target: StageRef::new("sum", Process),
                thing: None,
                guard: None,
                label: None,
            }],
            ..Default::default()
        }
    }

    fn region(id: &str, stages: &[StageRef], arcs: &[&str]) -> Region {
        Region {
            id: id.into(),
            label: String::new(),
            body: Subdiagram {
                stages: stages.iter().cloned().collect(),
                arcs: arcs.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    #[test]
    fn overlap_is_rejected() {
        let recv = StageRef::new("sum", Receive);
        let r = check_regions(
            &model(),
            &[
                region("a", std::slice::from_ref(&recv), &[]),
                region("b", &[recv], &[]),
            ],
        );
        assert!(!r.ok);
        assert!(r.has_code(codes::OVERLAP));
    }

    #[test]
    fn disconnected_body_is_rejected() {
        let r = check_regions(
            &model(),
            &[region(
                "a",
                &[StageRef::new("sum", Receive), StageRef::new("sum", Release)],
                &[],
            )],
        );
        assert!(r.has_code(codes::NOT_CONNECTED));
    }

    #[test]
    fn dangling_and_valid() {
        let bad = check_regions(
            &model(),
            &[region("a", &[StageRef::new("x", Create)], &["g"])],
        );
        assert!(bad.has_code(codes::DANGLING_REF));
        let good = check_regions(
            &model(),
            &[region(
                "a",
                &[StageRef::new("sum", Receive), StageRef::new("sum", Process)],
                &["f"],
            )],
        );
        assert!(good.ok, "{:?}", good.diagnostics);
    }
}
