use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::behavior::{region_of_arc, BehaviorGraph, Interval, Region};
use crate::diag::{codes, Diagnostic, ValidationReport};

use super::Trace;

/// One run of consecutive records inside a single region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub region: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    pub occurrences: Vec<Occurrence>,
    /// Indices of trace records whose arc belongs to no region.
    pub unattributed: Vec<usize>,
}

impl Segmentation {
    pub fn region_sequence(&self) -> Vec<&str> {
        self.occurrences.iter().map(|o| o.region.as_str()).collect()
    }

    pub fn notes(&self, trace: &Trace) -> Vec<Diagnostic> {
        self.unattributed
            .iter()
            .map(|&i| {
                let r = &trace.records[i];
                Diagnostic::note(
                    codes::UNATTRIBUTED,
                    format!("step {}: arc `{}` belongs to no region", r.step, r.arc),
                )
            })
            .collect()
    }
}

/// Map each record to the region owning its arc and group consecutive
/// records of one region into occurrences. Records on uncovered arcs are
/// set aside and do not split a run.
pub fn segment(trace: &Trace, regions: &[Region]) -> Segmentation {
    let mut seg = Segmentation::default();
    let mut current: Option<(String, u64, u64)> = None;
    for (i, rec) in trace.records.iter().enumerate() {
        let Some(region) = region_of_arc(regions, &rec.arc) else {
            seg.unattributed.push(i);
            continue;
        };
        match &mut current {
            Some((id, _, last)) if *id == region.id => *last = rec.step,
            _ => {
                if let Some((id, first, last)) = current.take() {
                    seg.occurrences.push(Occurrence {
                        region: id,
                        interval: Interval::new(first, last - first + 1),
                    });
                }
                current = Some((region.id.clone(), rec.step, rec.step));
            }
        }
    }
    if let Some((id, first, last)) = current {
        seg.occurrences.push(Occurrence {
            region: id,
            interval: Interval::new(first, last - first + 1),
        });
    }
    seg
}

/// Check an occurrence sequence against a behavior graph.
///
/// The first occurrence must match an initial event. Every later occurrence
/// must match an event reached by an edge from an event matched earlier in
/// the sequence; this admits plain walks as well as the interleaving of
/// branches that a fork (one event calling two others) produces. An
/// occurrence matches the events declared over its region.
pub fn conformance(occurrences: &[Occurrence], graph: &BehaviorGraph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut reached: BTreeSet<&str> = BTreeSet::new();
    let mut licensed: BTreeSet<&str> = graph.initial.iter().map(String::as_str).collect();
    for (k, occ) in occurrences.iter().enumerate() {
        let candidates: Vec<&str> = graph
            .events
            .iter()
            .filter(|e| e.region == occ.region && licensed.contains(e.id.as_str()))
            .map(|e| e.id.as_str())
            .collect();
        if candidates.is_empty() {
            let i = occ.interval;
            let range = format!("steps {}..{}", i.start, i.end() - 1);
            let msg = match k {
                0 => format!(
                    "sequence starts at `{}` ({range}), which is not an initial event",
                    occ.region
                ),
                _ => format!(
                    "transition {} -> {} ({range}) has no supporting edge",
                    occurrences[k - 1].region,
                    occ.region
                ),
            };
            report.push(Diagnostic::error(codes::NONCONFORMANT, msg));
            return report;
        }
        if k == 0 {
            licensed.clear();
        }
        for c in candidates {
            if reached.insert(c) {
                licensed.extend(graph.successors(c));
            }
        }
    }
    report
}
