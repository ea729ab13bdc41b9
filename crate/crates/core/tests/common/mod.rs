#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use tm_core::behavior::{Region, Subdiagram};
use tm_core::model::{desugar, StageRef, TmModel};
use tm_core::sim::Scenario;
use tm_core::syntax::{parse_document, parse_scenario, Document};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn corpus_files(ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    v.sort();
    v
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn doc(name: &str) -> Document {
    parse_document(&read(name)).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

pub fn regions(d: &Document) -> &[Region] {
    d.regions.as_deref().expect("regions section")
}

pub fn scenario(name: &str) -> Scenario {
    parse_scenario(&read(name)).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

/// Every (model, scenario) pair shipped in the corpus: `x.tms` and
/// `x_*.tms` belong to `x.tm`.
pub fn corpus_scenarios() -> Vec<(String, String)> {
    let models: Vec<String> = corpus_files("tm")
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    let mut out = Vec::new();
    for s in corpus_files("tms") {
        let stem = s.file_stem().unwrap().to_string_lossy().into_owned();
        let model = models
            .iter()
            .filter(|m| stem == **m || stem.starts_with(&format!("{m}_")))
            .max_by_key(|m| m.len())
            .unwrap_or_else(|| panic!("no model for {stem}.tms"));
        out.push((format!("{model}.tm"), format!("{stem}.tms")));
    }
    out
}

/// Stages and arc endpoints of a desugared model, as plain vectors.
pub struct Flat {
    pub stages: Vec<StageRef>,
    pub arcs: Vec<(String, StageRef, StageRef)>,
}

pub fn flatten(model: &TmModel) -> Flat {
    let m = desugar(model);
    let stages = m.stage_refs();
    let arcs = m
        .arcs()
        .map(|a| (a.id().to_string(), a.source().clone(), a.target().clone()))
        .collect();
    Flat { stages, arcs }
}

/// Brute force: every subset of stages and arcs, kept when non-empty,
/// closed under arc endpoints, weakly connected and within `bound`.
pub fn brute_force_subdiagrams(model: &TmModel, bound: usize) -> BTreeSet<Subdiagram> {
    let f = flatten(model);
    let n = f.stages.len() + f.arcs.len();
    assert!(n <= 20, "brute force limited to 20 elements, got {n}");
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > bound {
            continue;
        }
        let stages: Vec<&StageRef> = (0..f.stages.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &f.stages[i])
            .collect();
        let arcs: Vec<&(String, StageRef, StageRef)> = (0..f.arcs.len())
            .filter(|i| mask & (1 << (f.stages.len() + i)) != 0)
            .map(|i| &f.arcs[i])
            .collect();
        if !arcs
            .iter()
            .all(|(_, s, t)| stages.contains(&s) && stages.contains(&t))
        {
            continue;
        }
        // union-find over the chosen stages
        let mut parent: Vec<usize> = (0..stages.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let idx = |r: &StageRef| stages.iter().position(|s| *s == r).unwrap();
        for (_, s, t) in &arcs {
            let (a, b) = (find(&mut parent, idx(s)), find(&mut parent, idx(t)));
            parent[a] = b;
        }
        let roots: BTreeSet<usize> = (0..stages.len()).map(|i| find(&mut parent, i)).collect();
        if roots.len() != 1 {
            continue;
        }
        out.insert(Subdiagram {
            stages: stages.into_iter().cloned().collect(),
            arcs: arcs.into_iter().map(|(id, _, _)| id.clone()).collect(),
        });
    }
    out
}

/// Brute force over all ordered region pairs: is there any arc from one
/// into the other?
pub fn brute_force_edges(model: &TmModel, regions: &[Region]) -> BTreeSet<(String, String)> {
    let f = flatten(model);
    let mut out = BTreeSet::new();
    for a in regions {
        for b in regions {
            if a.id == b.id {
                continue;
            }
            if f.arcs
                .iter()
                .any(|(_, s, t)| a.body.stages.contains(s) && b.body.stages.contains(t))
            {
                out.insert((a.id.clone(), b.id.clone()));
            }
        }
    }
    out
}

pub fn edges(pairs: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Compare with a golden file, or rewrite it when `TM_BLESS=1`.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var("TM_BLESS").as_deref() == Ok("1") {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}
