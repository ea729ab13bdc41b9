mod common;

use proptest::prelude::*;
use tm_core::diag::codes;
use tm_core::model::{desugar, resolve, ResolveError, StageKind, StageRef};
use tm_core::syntax::{
    normalize_newlines, parse, parse_document, parse_scenario, serialize, serialize_document,
    serialize_scenario,
};

use common::*;

#[test]
fn corpus_documents_round_trip() {
    let mut files = corpus_files("tm");
    files.extend(corpus_files("tmb"));
    assert!(files.len() >= 10);
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = parse_document(&text).unwrap_or_else(|d| panic!("{}: {d:?}", f.display()));
        let printed = serialize_document(&doc);
        let again =
            parse_document(&printed).unwrap_or_else(|d| panic!("{}: reparse {d:?}", f.display()));
        assert_eq!(doc, again, "{}", f.display());
        // printing is a fixed point after one pass
        assert_eq!(printed, serialize_document(&again));
    }
}

#[test]
fn corpus_models_round_trip_through_serialize() {
    for f in corpus_files("tm") {
        let m = parse(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(parse(&serialize(&m)).unwrap(), m, "{}", f.display());
    }
}

#[test]
fn corpus_scenarios_round_trip() {
    for f in corpus_files("tms") {
        let sc = parse_scenario(&std::fs::read_to_string(&f).unwrap()).unwrap();
        assert_eq!(
            parse_scenario(&serialize_scenario(&sc)).unwrap(),
            sc,
            "{}",
            f.display()
        );
    }
}

#[test]
fn stack_canonical_form_is_frozen() {
    let m = parse(&read("stack.tm")).unwrap();
    assert_golden("stack.canonical.tm", &serialize(&m));
}

#[test]
fn mousetrap_has_four_machines() {
    let m = parse(&read("mousetrap.tm")).unwrap();
    let ids: Vec<&str> = m.walk().iter().map(|m| m.id.as_str()).collect();
    assert_eq!(ids, ["trap", "door", "bait", "mouse"]);
    assert!(m.triggers.iter().any(|t| t.target.machine == "mouse"));
    assert!(m.triggers.iter().any(|t| t.target.machine == "door"));
    assert!(m.flows.iter().any(|f| f.thing.as_deref() == Some("smell")));
}

#[test]
fn empty_input() {
    let m = parse("").unwrap();
    assert!(m.machines.is_empty());
    assert_eq!(serialize(&m), "\n");
}

#[test]
fn self_loop_flow() {
    let src = "machine bait { stages Release }\nflow f: bait.Release -> bait.Release\n";
    let d = parse(src).unwrap_err();
    assert_eq!(d[0].code, codes::DUPLICATE_ENDPOINT);
    let span = d[0].span.unwrap();
    assert_eq!((span.line, span.column), (2, 9));
}

#[test]
fn diagnostics_for_bad_input() {
    let cases = [
        ("machine m { stages Crate }", codes::UNKNOWN_STAGE),
        ("machine m { }\nmachine m { }", codes::DUPLICATE_ID),
        ("thing t\nthing t", codes::DUPLICATE_ID),
        (
            "flow f: a.Create -> b.Create\nflow f: a.Create -> b.Create",
            codes::DUPLICATE_ID,
        ),
        ("machine m {", codes::SYNTAX),
        ("blah", codes::SYNTAX),
        ("flow f: a.Create -> ", codes::SYNTAX),
    ];
    for (src, code) in cases {
        let d = parse(src).unwrap_err();
        assert!(d.iter().any(|d| d.code == code), "{src:?}: {d:?}");
    }
}

#[test]
fn sugar_survives_serialization() {
    let m = parse(&read("sugared.tm")).unwrap();
    assert_eq!(m.sugared.len(), 1);
    let text = serialize(&m);
    assert!(text.contains("speaker => listener"));
    assert_eq!(parse(&text).unwrap(), m);
}

#[test]
fn crlf_and_lf_parse_alike() {
    let lf = read("formula.tm");
    let crlf = lf.replace('\n', "\r\n");
    assert_eq!(normalize_newlines(&crlf), lf);
    assert_eq!(parse_document(&crlf).unwrap(), parse_document(&lf).unwrap());
}

#[test]
fn resolve_examples() {
    let trap = parse(&read("mousetrap.tm")).unwrap();
    let (m, k) = resolve(&trap, &StageRef::new("door", StageKind::Process)).unwrap();
    assert_eq!((m.id.as_str(), k), ("door", StageKind::Process));

    let empty = parse("").unwrap();
    assert!(matches!(
        resolve(&empty, &StageRef::new("x", StageKind::Create)),
        Err(ResolveError::UnknownMachine(_))
    ));

    let stack = parse(&read("stack.tm")).unwrap();
    assert!(stack.machine("storage").unwrap().stages.is_empty());
    assert!(matches!(
        resolve(&stack, &StageRef::new("storage", StageKind::Create)),
        Err(ResolveError::StageNotDeclared { .. })
    ));
}

#[test]
fn desugar_examples() {
    let one = parse(
        "machine bait { stages Create }\nmachine mouse { stages Process }\nflow s: bait => mouse",
    )
    .unwrap();
    let d = desugar(&one);
    assert!(d.sugared.is_empty());
    let chain: Vec<(String, String)> = d
        .flows
        .iter()
        .map(|f| (f.source.to_string(), f.target.to_string()))
        .collect();
    assert_eq!(
        chain,
        [
            ("bait.Release".to_string(), "bait.Transfer".to_string()),
            ("bait.Transfer".into(), "mouse.Transfer".into()),
            ("mouse.Transfer".into(), "mouse.Receive".into()),
        ]
    );
    assert!(d.machine("bait").unwrap().declares(StageKind::Release));
    assert!(d.machine("mouse").unwrap().declares(StageKind::Receive));

    let plain = parse(&read("formula.tm")).unwrap();
    assert_eq!(desugar(&plain), plain);

    let two = parse("machine a { }\nmachine b { }\nmachine c { }\nflow x: a => b\nflow y: a => c")
        .unwrap();
    let d = desugar(&two);
    assert_eq!(d.flows.len(), 6);
    let a = d.machine("a").unwrap();
    assert_eq!(a.stages, [StageKind::Release, StageKind::Transfer]);
}

#[test]
fn machine_walk_visits_each_once() {
    for f in corpus_files("tm") {
        let m = parse(&std::fs::read_to_string(&f).unwrap()).unwrap();
        let ids: Vec<&str> = m.walk().iter().map(|m| m.id.as_str()).collect();
        let unique: std::collections::BTreeSet<&str> = ids.iter().copied().collect();
        assert_eq!(ids.len(), unique.len());
    }
}

fn assert_spans_inside(text: &str, diags: &[tm_core::Diagnostic]) {
    let norm = normalize_newlines(text);
    let lines: Vec<&str> = norm.split('\n').collect();
    for d in diags {
        let s = d
            .span
            .unwrap_or_else(|| panic!("parser diagnostic without span: {d}"));
        assert!(s.line >= 1 && s.line <= lines.len(), "{d} in {text:?}");
        let width = lines[s.line - 1].chars().count();
        assert!(s.column >= 1 && s.column <= width + 1, "{d} in {text:?}");
        assert!(s.length >= 1);
    }
}

const WORDS: &[&str] = &[
    "thing", "machine", "flow", "trigger", "regions", "region", "behavior", "stages", "arcs",
    "event", "edge", "initial", "mode", "strict", "on", "when", "label", "at", "for", "Create",
    "Process", "Release", "Receive", "Transfer", "a", "b", "m", "x", "{", "}", ":", ",", ".", "->",
    "=>", "=", "<", "<=", "(", ")", "-", "+", "1", "42", "\"s\"", "\n", " ", "#c\n", ";", "int",
    "text",
];

fn tokens() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..40).prop_map(|w| w.join(" "))
}

fn mutated_corpus() -> impl Strategy<Value = String> {
    let files: Vec<String> = corpus_files("tm")
        .iter()
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    (
        prop::sample::select(files),
        any::<prop::sample::Index>(),
        any::<prop::sample::Index>(),
        ".{0,6}",
    )
        .prop_map(|(f, a, b, ins)| {
            let chars: Vec<char> = f.chars().collect();
            let (i, j) = (a.index(chars.len() + 1), b.index(chars.len() + 1));
            let (lo, hi) = (i.min(j), i.max(j).min(i.min(j) + 8));
            let mut out: String = chars[..lo].iter().collect();
            out.push_str(&ins);
            out.extend(&chars[hi..]);
            out
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, ..ProptestConfig::default() })]

    #[test]
    fn parser_never_panics(text in prop_oneof![any::<String>(), tokens(), mutated_corpus()]) {
        match parse_document(&text) {
            Ok(doc) => {
                let printed = serialize_document(&doc);
                prop_assert_eq!(parse_document(&printed).ok(), Some(doc));
            }
            Err(diags) => {
                prop_assert!(!diags.is_empty());
                assert_spans_inside(&text, &diags);
            }
        }
        if let Err(diags) = parse_scenario(&text) {
            assert_spans_inside(&text, &diags);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, ..ProptestConfig::default() })]

    #[test]
    fn desugar_is_idempotent(text in prop_oneof![tokens(), mutated_corpus()]) {
        if let Ok(m) = parse(&text) {
            let once = desugar(&m);
            prop_assert_eq!(desugar(&once), once);
        }
    }
}
