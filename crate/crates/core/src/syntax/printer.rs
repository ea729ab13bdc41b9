use std::fmt::Write;

use crate::behavior::{BehaviorDecl, Region};
use crate::expr::{write_quoted, AttrValue, Attributes};
use crate::model::{Machine, TmModel};
use crate::sim::{Policy, Scenario, TokenSeed};

use super::Document;

fn quoted(s: &str) -> String {
    let mut out = String::new();
    write_quoted(&mut out, s).expect("writing to a String");
    out
}

fn arc_tail(
    out: &mut String,
    thing: &Option<String>,
    guard: &Option<crate::expr::Expr>,
    label: &Option<String>,
) {
    if let Some(t) = thing {
        write!(out, " on {t}").unwrap();
    }
    if let Some(g) = guard {
        write!(out, " when {g}").unwrap();
    }
    if let Some(l) = label {
        write!(out, " label {}", quoted(l)).unwrap();
    }
    out.push('\n');
}

fn machine(out: &mut String, m: &Machine, depth: usize) {
    let pad = "  ".repeat(depth);
    write!(out, "{pad}machine {}", m.id).unwrap();
    if m.name != m.id {
        write!(out, " {}", quoted(&m.name)).unwrap();
    }
    out.push_str(" {\n");
    if !m.stages.is_empty() {
        let kinds: Vec<_> = m.stages.iter().map(|k| k.as_str()).collect();
        writeln!(out, "{pad}  stages {}", kinds.join(", ")).unwrap();
    }
    for s in &m.submachines {
        machine(out, s, depth + 1);
    }
    writeln!(out, "{pad}}}").unwrap();
}

fn model_sections(m: &TmModel) -> Vec<String> {
    let mut sections = Vec::new();

    if !m.things.is_empty() {
        let mut s = String::new();
        for t in &m.things {
            write!(s, "thing {}", t.name).unwrap();
            if !t.attributes.is_empty() {
                let attrs: Vec<_> = t
                    .attributes
                    .iter()
                    .map(|(n, ty)| format!("{n}: {ty}"))
                    .collect();
                write!(s, " {{ {} }}", attrs.join(", ")).unwrap();
            }
            s.push('\n');
        }
        sections.push(s);
    }

    for mach in &m.machines {
        let mut s = String::new();
        machine(&mut s, mach, 0);
        sections.push(s);
    }

    if !m.flows.is_empty() || !m.sugared.is_empty() {
        let mut s = String::new();
        for f in &m.flows {
            write!(s, "flow {}: {} -> {}", f.id, f.source, f.target).unwrap();
            arc_tail(&mut s, &f.thing, &f.guard, &f.label);
        }
        for f in &m.sugared {
            write!(s, "flow {}: {} => {}", f.id, f.from, f.to).unwrap();
            arc_tail(&mut s, &f.thing, &f.guard, &f.label);
        }
        sections.push(s);
    }

    if !m.triggers.is_empty() {
        let mut s = String::new();
        for t in &m.triggers {
            write!(s, "trigger {}: {} -> {}", t.id, t.source, t.target).unwrap();
            arc_tail(&mut s, &None, &t.guard, &t.label);
        }
        sections.push(s);
    }
    sections
}

fn regions_section(regions: &[Region]) -> String {
    let mut s = String::from("regions {\n");
    for r in regions {
        write!(s, "  region {}", r.id).unwrap();
        if !r.label.is_empty() {
            write!(s, " {}", quoted(&r.label)).unwrap();
        }
        s.push_str(" {\n");
        if !r.body.stages.is_empty() {
            let refs: Vec<_> = r.body.stages.iter().map(|x| x.to_string()).collect();
            writeln!(s, "    stages {}", refs.join(", ")).unwrap();
        }
        if !r.body.arcs.is_empty() {
            let arcs: Vec<_> = r.body.arcs.iter().map(String::as_str).collect();
            writeln!(s, "    arcs {}", arcs.join(", ")).unwrap();
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

fn behavior_section(b: &BehaviorDecl) -> String {
    let mut s = String::from("behavior {\n");
    if let Some(mode) = b.mode {
        writeln!(s, "  mode {mode}").unwrap();
    }
    for e in &b.graph.events {
        write!(s, "  event {} region {}", e.id, e.region).unwrap();
        if let Some(i) = e.interval {
            write!(s, " at {} for {}", i.start, i.duration).unwrap();
        }
        s.push('\n');
    }
    for (a, b) in &b.graph.edges {
        writeln!(s, "  edge {a} -> {b}").unwrap();
    }
    if !b.graph.initial.is_empty() {
        writeln!(s, "  initial {}", b.graph.initial.join(", ")).unwrap();
    }
    s.push_str("}\n");
    s
}

fn join_sections(sections: Vec<String>) -> String {
    if sections.is_empty() {
        return "\n".to_string();
    }
    sections.join("\n")
}

/// Canonical text for a model. Sugared arcs are kept as written.
pub fn serialize(model: &TmModel) -> String {
    join_sections(model_sections(model))
}

pub fn serialize_document(doc: &Document) -> String {
    let mut sections = model_sections(&doc.model);
    if let Some(r) = &doc.regions {
        sections.push(regions_section(r));
    }
    if let Some(b) = &doc.behavior {
        sections.push(behavior_section(b));
    }
    join_sections(sections)
}

fn seed_text(seed: &TokenSeed) -> String {
    let mut s = seed.thing.clone();
    if !seed.attributes.is_empty() {
        s.push_str(" { ");
        s.push_str(&attrs_text(&seed.attributes));
        s.push_str(" }");
    }
    s
}

fn attrs_text(attrs: &Attributes) -> String {
    attrs
        .iter()
        .map(|(k, v)| match v {
            AttrValue::Int(i) => format!("{k} = {i}"),
            AttrValue::Text(t) => format!("{k} = {}", quoted(t)),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn serialize_scenario(sc: &Scenario) -> String {
    let mut s = String::new();
    if let Some(n) = &sc.name {
        writeln!(s, "scenario {n}").unwrap();
    }
    let policy = match sc.policy {
        Policy::Deterministic => "deterministic",
        Policy::SeededRandom => "random",
    };
    writeln!(s, "policy {policy}").unwrap();
    writeln!(s, "seed {}", sc.seed).unwrap();
    writeln!(s, "max_steps {}", sc.max_steps).unwrap();
    for (at, seed) in &sc.initial {
        writeln!(s, "token {at} {}", seed_text(seed)).unwrap();
    }
    for inj in &sc.injections {
        writeln!(s, "inject {} {} {}", inj.step, inj.at, seed_text(&inj.seed)).unwrap();
    }
    for (m, seed) in &sc.mints {
        writeln!(s, "mint {m} {}", seed_text(seed)).unwrap();
    }
    for (at, stmts) in &sc.actions {
        writeln!(s, "action {at} {{").unwrap();
        for st in stmts {
            writeln!(s, "  {st}").unwrap();
        }
        s.push_str("}\n");
    }
    if let Some(stop) = &sc.stop {
        writeln!(s, "stop when {stop}").unwrap();
    }
    s
}
