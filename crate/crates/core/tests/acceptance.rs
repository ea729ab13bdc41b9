//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use std::collections::BTreeSet;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, TestRunner};
use tm_core::behavior::{
    check_regions, chronologies, enumerate_subdiagrams, infer_behavior, validate_behavior,
    IntervalMode, Region, Subdiagram,
};
use tm_core::diag::codes;
use tm_core::export::{model_to_dot, to_json, DotOptions, Kind};
use tm_core::expr::AttrValue;
use tm_core::sim::{conformance, segment, simulate, Policy, Scenario};
use tm_core::syntax::{parse_document, parse_scenario, serialize_document, serialize_scenario};
use tm_core::validate;

use common::*;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn stack_reproduction() -> Outcome {
    let d = doc("stack.tm");
    let r = validate(&d.model);
    ensure!(
        r.ok && r.diagnostics.is_empty(),
        "stack validation: {:?}",
        r.diagnostics
    );
    let regions = regions(&d);
    let ids: Vec<&str> = regions.iter().map(|r| r.id.as_str()).collect();
    let expected_ids: Vec<String> = (0..10).map(|i| format!("E{i}")).collect();
    ensure!(ids == expected_ids, "region ids {ids:?}");
    let rc = check_regions(&d.model, regions);
    ensure!(rc.ok, "check_regions: {:?}", rc.diagnostics);
    let g = infer_behavior(&d.model, regions).map_err(|e| e.to_string())?;
    let expected = edges(&[
        ("E0", "E1"),
        ("E0", "E6"),
        ("E1", "E2"),
        ("E2", "E3"),
        ("E2", "E4"),
        ("E4", "E5"),
        ("E3", "E0"),
        ("E6", "E7"),
        ("E6", "E8"),
        ("E8", "E9"),
    ]);
    ensure!(g.edge_set() == expected, "edges {:?}", g.edge_set());
    Ok(())
}

fn occurrence_run(model: &str, sc: &Scenario) -> Result<(Vec<String>, bool), String> {
    let d = doc(model);
    let t = simulate(&d.model, sc).map_err(|e| e.to_string())?;
    let seg = segment(&t, regions(&d));
    let g = infer_behavior(&d.model, regions(&d)).map_err(|e| e.to_string())?;
    let ok = conformance(&seg.occurrences, &g).ok;
    Ok((
        seg.region_sequence()
            .into_iter()
            .map(String::from)
            .collect(),
        ok,
    ))
}

fn mousetrap_reproduction() -> Outcome {
    let d = doc("mousetrap.tm");
    let g = infer_behavior(&d.model, regions(&d)).map_err(|e| e.to_string())?;
    ensure!(
        g.edge_set() == edges(&[("a", "b"), ("b", "c"), ("c", "d")]) && g.initial == ["a"],
        "graph {:?} initial {:?}",
        g.edges,
        g.initial
    );
    for seed in [0, 1, 42] {
        let mut sc = scenario("mousetrap.tms");
        sc.policy = Policy::SeededRandom;
        sc.seed = seed;
        let (seq, ok) = occurrence_run("mousetrap.tm", &sc)?;
        ensure!(seq == ["a", "b", "c", "d"], "seed {seed}: {seq:?}");
        ensure!(ok, "seed {seed}: not conformant");
    }
    Ok(())
}

fn formula_reproduction() -> Outcome {
    let d = doc("formula.tm");
    let sc = scenario("formula.tms");
    let t = simulate(&d.model, &sc).map_err(|e| e.to_string())?;
    // reference interpreter: sum of 1..=n
    let n = 3;
    let reference: i64 = (1..=n).sum();
    ensure!(reference == 6, "reference {reference}");
    let sum = &t.final_tokens[0].attributes["sum"];
    ensure!(*sum == AttrValue::Int(reference), "final sum {sum:?}");
    let seq: Vec<String> = segment(&t, regions(&d))
        .region_sequence()
        .into_iter()
        .map(String::from)
        .collect();
    let mut expected = Vec::new();
    for _ in 0..n {
        expected.extend(["sum", "add", "inc"]);
    }
    expected.push("out");
    ensure!(seq == expected, "occurrences {seq:?}");
    Ok(())
}

fn multiple_behaviors() -> Outcome {
    let d = doc("multiple.tm");
    let g = infer_behavior(&d.model, regions(&d)).map_err(|e| e.to_string())?;
    ensure!(
        g.edge_set() == edges(&[("E1", "E2"), ("E1", "E3"), ("E1", "E4")]),
        "edges {:?}",
        g.edges
    );
    let walks = chronologies(&g, 2).map_err(|e| e.to_string())?;
    ensure!(
        walks == [["E1", "E2"], ["E1", "E3"], ["E1", "E4"]],
        "walks {walks:?}"
    );
    Ok(())
}

fn one_lane_street() -> Outcome {
    let d = doc("one_lane.tm");
    let r = validate(&d.model);
    ensure!(r.ok, "static errors {:?}", r.diagnostics);
    let warn = r.warnings().any(|w| w.code == codes::OPPOSING_FLOWS);
    ensure!(warn, "no OPPOSING_FLOWS warning: {:?}", r.diagnostics);
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_tm"))
        .args(["check", "one_lane.tm"])
        .current_dir(corpus_dir())
        .env("TM_COLOR", "never")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.code() == Some(0),
        "tm check exit {:?}",
        out.status.code()
    );
    let decl = d.behavior.as_ref().ok_or("no behavior section")?;
    let events: BTreeSet<&str> = decl
        .graph
        .events
        .iter()
        .map(|e| e.region.as_str())
        .collect();
    ensure!(events == ["AM", "PM"].into(), "event regions {events:?}");
    let mode = decl.mode.unwrap_or_default();
    let rep = validate_behavior(&d.model, regions(&d), &decl.graph, mode);
    ensure!(
        rep.ok && !rep.has_code(codes::INTERVAL_ORDER),
        "behavior: {:?}",
        rep.diagnostics
    );
    Ok(())
}

fn paint_dry_precedence() -> Outcome {
    let d = doc("paint_dry.tm");
    let decl = d.behavior.as_ref().ok_or("no behavior section")?;
    ensure!(
        decl.mode == Some(IntervalMode::Strict),
        "mode {:?}",
        decl.mode
    );
    let rep = validate_behavior(&d.model, regions(&d), &decl.graph, IntervalMode::Strict);
    ensure!(rep.ok, "strict declaration: {:?}", rep.diagnostics);
    let find = |id: &str| -> &Region { regions(&d).iter().find(|r| r.id == id).unwrap() };
    let (paint, dry) = (find("paint"), find("dry"));
    let base = scenario("paint_dry.tms");
    for seed in 0..50u64 {
        for policy in [Policy::Deterministic, Policy::SeededRandom] {
            let mut sc = base.clone();
            sc.seed = seed;
            sc.policy = policy;
            let (at, tok) = sc.initial.remove(0);
            sc.injections.push(tm_core::sim::Injection {
                step: seed % 7,
                at,
                seed: tok,
            });
            let t = simulate(&d.model, &sc).map_err(|e| e.to_string())?;
            let steps = |r: &Region| -> Vec<u64> {
                t.records
                    .iter()
                    .filter(|x| r.body.arcs.contains(&x.arc))
                    .map(|x| x.step)
                    .collect()
            };
            let (p, q) = (steps(paint), steps(dry));
            ensure!(
                !p.is_empty() && !q.is_empty(),
                "seed {seed}: missing paint or dry records"
            );
            ensure!(
                p.iter().max() < q.iter().min(),
                "seed {seed}: paint {p:?} dry {q:?}"
            );
        }
    }
    let mut merged = d.clone();
    merged.merge_sidecar(doc("paint_dry_overlap.tmb"));
    let ov = merged.behavior.as_ref().unwrap();
    ensure!(
        ov.mode == Some(IntervalMode::Overlap),
        "sidecar mode {:?}",
        ov.mode
    );
    let rep = validate_behavior(&d.model, regions(&d), &ov.graph, IntervalMode::Overlap);
    ensure!(rep.ok, "overlap declaration: {:?}", rep.diagnostics);
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut checked = Vec::new();
    for f in corpus_files("tm") {
        let m =
            tm_core::parse(&std::fs::read_to_string(&f).unwrap()).map_err(|d| format!("{d:?}"))?;
        let flat = flatten(&m);
        if flat.stages.len() > 8 {
            continue;
        }
        let n = flat.stages.len() + flat.arcs.len();
        let got: BTreeSet<Subdiagram> = enumerate_subdiagrams(&m, n)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        let oracle = brute_force_subdiagrams(&m, n);
        let name = f.file_name().unwrap().to_string_lossy().into_owned();
        ensure!(
            got == oracle,
            "{name}: {} vs oracle {}",
            got.len(),
            oracle.len()
        );
        checked.push(name);
    }
    ensure!(checked.len() >= 4, "only {checked:?} have at most 8 stages");
    Ok(())
}

fn property_suites() -> Outcome {
    // parser round-trip on the full corpus
    for ext in ["tm", "tmb"] {
        for f in corpus_files(ext) {
            let d = parse_document(&std::fs::read_to_string(&f).unwrap())
                .map_err(|d| format!("{d:?}"))?;
            let again = parse_document(&serialize_document(&d)).map_err(|d| format!("{d:?}"))?;
            ensure!(again == d, "round-trip {}", f.display());
        }
    }
    for f in corpus_files("tms") {
        let s =
            parse_scenario(&std::fs::read_to_string(&f).unwrap()).map_err(|d| format!("{d:?}"))?;
        ensure!(
            parse_scenario(&serialize_scenario(&s)).ok() == Some(s),
            "round-trip {}",
            f.display()
        );
    }

    // 10,000 fuzz inputs
    let mut runner = TestRunner::new(Config::default());
    let strat = proptest::prop_oneof![
        proptest::arbitrary::any::<String>(),
        proptest::collection::vec(
            proptest::sample::select(vec![
                "machine", "flow", "trigger", "thing", "regions", "behavior", "{", "}", ":", "->",
                "=>", ".", ",", "Create", "Transfer", "a", "b", "\n", "when", "<", "1", "\"",
            ]),
            0..30
        )
        .prop_map(|v| v.join(" ")),
    ];
    for _ in 0..10_000 {
        let input = strat
            .new_tree(&mut runner)
            .map_err(|e| e.to_string())?
            .current();
        let r = std::panic::catch_unwind(|| {
            let _ = parse_document(&input);
            let _ = parse_scenario(&input);
        });
        ensure!(r.is_ok(), "parser panicked on {input:?}");
    }

    // determinism and token conservation on every corpus scenario
    for (model, sc) in corpus_scenarios() {
        let d = doc(&model);
        let s = scenario(&sc);
        let a = simulate(&d.model, &s).map_err(|e| format!("{sc}: {e}"))?;
        let b = simulate(&d.model, &s).map_err(|e| format!("{sc}: {e}"))?;
        ensure!(
            to_json(Kind::Trace, &a) == to_json(Kind::Trace, &b),
            "{sc}: nondeterministic"
        );
        ensure!(
            a.meta.created - a.meta.consumed == a.final_tokens.len() as u64,
            "{sc}: created {} consumed {} final {}",
            a.meta.created,
            a.meta.consumed,
            a.final_tokens.len()
        );
    }

    // region disjointness rejection
    let d = doc("formula.tm");
    let mut overlapping = regions(&d).to_vec();
    let stolen = overlapping[1].body.stages.iter().next().unwrap().clone();
    overlapping[0].body.stages.insert(stolen);
    let r = check_regions(&d.model, &overlapping);
    ensure!(
        !r.ok && r.has_code(codes::OVERLAP),
        "overlap accepted: {:?}",
        r.diagnostics
    );
    let mut shared_arc = regions(&d).to_vec();
    shared_arc.push(shared_arc[0].clone());
    shared_arc.last_mut().unwrap().id = "copy".into();
    ensure!(
        check_regions(&d.model, &shared_arc).has_code(codes::OVERLAP),
        "duplicate region accepted"
    );

    // DOT snapshot stability
    for name in ["mousetrap", "stack", "formula", "one_lane"] {
        let m = doc(&format!("{name}.tm")).model;
        let dot = model_to_dot(&m, DotOptions::default());
        ensure!(
            dot == model_to_dot(&m, DotOptions::default()),
            "{name}: DOT differs between runs"
        );
        let golden = std::fs::read_to_string(golden_dir().join(format!("{name}.dot")))
            .map_err(|e| e.to_string())?;
        ensure!(dot == golden, "{name}: DOT differs from snapshot");
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 stack reproduction", stack_reproduction),
        ("2 mousetrap reproduction", mousetrap_reproduction),
        ("3 formula reproduction", formula_reproduction),
        ("4 multiple behaviors", multiple_behaviors),
        ("5 one-lane street", one_lane_street),
        ("6 paint-dry precedence", paint_dry_precedence),
        ("7 subdiagram oracle equivalence", oracle_equivalence),
        ("8 property suites", property_suites),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(()) => println!("PASS criterion {name}"),
            Err(why) => {
                println!("FAIL criterion {name}: {why}");
                failed.push(name);
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
