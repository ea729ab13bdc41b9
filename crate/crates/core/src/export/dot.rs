use std::fmt::Write;

use crate::behavior::BehaviorGraph;
use crate::model::{desugar, Machine, TmModel};

#[derive(Debug, Clone, Copy, Default)]
pub struct DotOptions {
    /// Label edges with arc ids when they carry no explicit label.
    pub arc_ids: bool,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn cluster(out: &mut String, m: &Machine, depth: usize) {
    let pad = "  ".repeat(depth);
    writeln!(
        out,
        "{pad}subgraph {} {{",
        quote(&format!("cluster_{}", m.id))
    )
    .unwrap();
    writeln!(out, "{pad}  label={};", quote(&m.name)).unwrap();
    for k in &m.stages {
        writeln!(
            out,
            "{pad}  {} [label={}];",
            quote(&format!("{}.{k}", m.id)),
            quote(k.as_str())
        )
        .unwrap();
    }
    for s in &m.submachines {
        cluster(out, s, depth + 1);
    }
    writeln!(out, "{pad}}}").unwrap();
}

/// Machines as nested clusters, stages as nodes, flows solid and triggers
/// dashed. Sugared arcs are expanded first.
pub fn model_to_dot(model: &TmModel, opts: DotOptions) -> String {
    let model = desugar(model);
    let mut out = String::from("digraph tm {\n  compound=true;\n  node [shape=box];\n");
    for m in &model.machines {
        cluster(&mut out, m, 1);
    }
    for arc in model.arcs() {
        let label = match arc {
            crate::model::ArcRef::Flow(f) => f.label.clone(),
            crate::model::ArcRef::Trigger(t) => t.label.clone(),
        }
        .or_else(|| opts.arc_ids.then(|| arc.id().to_string()));
        let mut attrs = Vec::new();
        if arc.is_trigger() {
            attrs.push("style=dashed".to_string());
        }
        if let Some(l) = label {
            attrs.push(format!("label={}", quote(&l)));
        }
        write!(
            out,
            "  {} -> {}",
            quote(&arc.source().to_string()),
            quote(&arc.target().to_string())
        )
        .unwrap();
        if !attrs.is_empty() {
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

/// Events as nodes (initial events double-circled), edges in declaration
/// order.
pub fn behavior_to_dot(graph: &BehaviorGraph) -> String {
    let mut out = String::from("digraph behavior {\n  node [shape=ellipse];\n");
    for e in &graph.events {
        let mut attrs = Vec::new();
        if let Some(i) = e.interval {
            attrs.push(format!(
                "label={}",
                quote(&format!("{} [{}, +{}]", e.id, i.start, i.duration))
            ));
        }
        if graph.initial.contains(&e.id) {
            attrs.push("peripheries=2".to_string());
        }
        write!(out, "  {}", quote(&e.id)).unwrap();
        if !attrs.is_empty() {
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(";\n");
    }
    for (a, b) in &graph.edges {
        writeln!(out, "  {} -> {};", quote(a), quote(b)).unwrap();
    }
    out.push_str("}\n");
    out
}
