//! The `tm` command line: argument parsing and the per-command pipelines.
//!
//! [`run`] does all the work and returns the text to print, so tests can
//! drive it without spawning a process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::behavior::{
    check_regions, enumerate_subdiagrams, infer_behavior, validate_behavior, BehaviorError,
    IntervalMode, Region,
};
use crate::diag::{codes, Diagnostic, Severity, ValidationReport};
use crate::export::{behavior_to_dot, model_to_dot, to_json, DotOptions, Kind};
use crate::sim::{conformance, segment, simulate, Scenario};
use crate::syntax::{parse_document, parse_scenario, serialize_document, Document};
use crate::validate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Parse and validate models.
    Check,
    /// Check regions; list connected subdiagrams with `--bound`.
    Events,
    /// Infer the behavior graph, or validate the declared one.
    Behavior,
    /// Run a scenario and segment the trace into event occurrences.
    Simulate,
    /// Re-emit the model as canonical text, JSON or DOT.
    Export,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Overlap,
    Strict,
}

impl From<Mode> for IntervalMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Overlap => IntervalMode::Overlap,
            Mode::Strict => IntervalMode::Strict,
        }
    }
}

/// Input files: each `.tm` starts a unit; a `.tmb` sidecar or `.tms`
/// scenario that follows it belongs to it.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "tm",
    version,
    about = "Thinging-machine models: check, behavior, simulate, export"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Interval mode for declared behavior; overrides the file's `mode`.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario's step limit.
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Size bound for subdiagram enumeration (`events`).
    #[arg(long)]
    pub bound: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scenario applied to every model without its own `.tms`.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Unit {
    model: PathBuf,
    sidecars: Vec<PathBuf>,
    scenario: Option<PathBuf>,
}

#[derive(Default)]
struct FileOutput {
    code: i32,
    out: String,
    err: String,
}

impl FileOutput {
    fn fail(&mut self, code: i32) {
        self.code = self.code.max(code);
    }
}

fn ext(p: &Path) -> &str {
    p.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn group(paths: &[PathBuf]) -> Result<Vec<Unit>, String> {
    let mut units: Vec<Unit> = Vec::new();
    for p in paths {
        match ext(p) {
            "tmb" | "tms" => {
                let Some(u) = units.last_mut() else {
                    return Err(format!(
                        "{}: must follow the .tm file it belongs to",
                        p.display()
                    ));
                };
                if ext(p) == "tmb" {
                    u.sidecars.push(p.clone());
                } else {
                    u.scenario = Some(p.clone());
                }
            }
            _ => units.push(Unit {
                model: p.clone(),
                sidecars: Vec::new(),
                scenario: None,
            }),
        }
    }
    Ok(units)
}

fn read(path: &Path) -> Result<String, Diagnostic> {
    let bytes = std::fs::read(path)
        .map_err(|e| Diagnostic::error(codes::SYNTAX, format!("cannot read: {e}")))?;
    String::from_utf8(bytes).map_err(|e| {
        Diagnostic::error(
            codes::ENCODING,
            format!(
                "input is not valid UTF-8 (byte {})",
                e.utf8_error().valid_up_to()
            ),
        )
    })
}

struct Styler {
    color: bool,
}

impl Styler {
    fn severity(&self, s: Severity) -> String {
        if !self.color {
            return s.to_string();
        }
        let code = match s {
            Severity::Error => "31",
            Severity::Warning => "33",
            Severity::Note => "36",
        };
        format!("\x1b[1;{code}m{s}\x1b[0m")
    }

    fn diagnostic(&self, path: &Path, d: &Diagnostic) -> String {
        let mut s = format!("{}:", path.display());
        if let Some(span) = d.span {
            write!(s, "{}:{}:", span.line, span.column).unwrap();
        }
        format!(
            "{s} {}[{}]: {}",
            self.severity(d.severity),
            d.code,
            d.message
        )
    }

    fn report(&self, path: &Path, diags: &[Diagnostic], out: &mut String) {
        for d in diags {
            out.push_str(&self.diagnostic(path, d));
            out.push('\n');
        }
    }
}

fn load(unit: &Unit, styler: &Styler, fo: &mut FileOutput) -> Option<Document> {
    let mut parse_one = |path: &Path| -> Option<Document> {
        let text = match read(path) {
            Ok(t) => t,
            Err(d) => {
                styler.report(path, &[d], &mut fo.err);
                fo.fail(2);
                return None;
            }
        };
        match parse_document(&text) {
            Ok(doc) => Some(doc),
            Err(diags) => {
                styler.report(path, &diags, &mut fo.err);
                fo.fail(2);
                None
            }
        }
    };
    let mut doc = parse_one(&unit.model)?;
    for s in &unit.sidecars {
        let side = parse_one(s)?;
        doc.merge_sidecar(side);
    }
    Some(doc)
}

fn load_scenario(path: &Path, styler: &Styler, fo: &mut FileOutput) -> Option<Scenario> {
    let parsed = read(path)
        .map_err(|d| vec![d])
        .and_then(|t| parse_scenario(&t));
    match parsed {
        Ok(sc) => Some(sc),
        Err(diags) => {
            styler.report(path, &diags, &mut fo.err);
            fo.fail(2);
            None
        }
    }
}

/// Static validation, then region and behavior checks when present.
fn full_check(doc: &Document, mode: Option<Mode>) -> ValidationReport {
    let mut report = validate(&doc.model);
    if let Some(regions) = &doc.regions {
        let rr = check_regions(&doc.model, regions);
        let regions_ok = rr.ok;
        report.extend(rr);
        if let (true, Some(decl)) = (regions_ok, &doc.behavior) {
            let mode = mode.map(Into::into).or(decl.mode).unwrap_or_default();
            report.extend(validate_behavior(&doc.model, regions, &decl.graph, mode));
        }
    }
    report
}

fn require_regions<'d>(
    doc: &'d Document,
    path: &Path,
    styler: &Styler,
    fo: &mut FileOutput,
) -> Option<&'d [Region]> {
    match &doc.regions {
        Some(r) if !r.is_empty() => Some(r),
        _ => {
            let d = Diagnostic::error(codes::NO_REGIONS, "the model declares no regions");
            styler.report(path, &[d], &mut fo.err);
            fo.fail(1);
            None
        }
    }
}

fn finish_report(
    path: &Path,
    report: &ValidationReport,
    cfg: &RunConfig,
    styler: &Styler,
    fo: &mut FileOutput,
) {
    if !report.ok {
        fo.fail(1);
    }
    match cfg.format {
        Format::Json => fo.out.push_str(&to_json(Kind::Report, report)),
        _ => {
            styler.report(path, &report.diagnostics, &mut fo.out);
            let verdict = if report.ok { "ok" } else { "failed" };
            let w = report.warnings().count();
            let e = report.errors().count();
            writeln!(
                fo.out,
                "{}: {verdict} ({e} errors, {w} warnings)",
                path.display()
            )
            .unwrap();
        }
    }
}

fn cmd_check(unit: &Unit, cfg: &RunConfig, styler: &Styler) -> FileOutput {
    let mut fo = FileOutput::default();
    let Some(doc) = load(unit, styler, &mut fo) else {
        return fo;
    };
    let report = full_check(&doc, cfg.mode);
    finish_report(&unit.model, &report, cfg, styler, &mut fo);
    fo
}

fn cmd_events(unit: &Unit, cfg: &RunConfig, styler: &Styler) -> FileOutput {
    let mut fo = FileOutput::default();
    let Some(doc) = load(unit, styler, &mut fo) else {
        return fo;
    };
    if let Some(bound) = cfg.bound {
        let subs = match enumerate_subdiagrams(&doc.model, bound) {
            Ok(s) => s,
            Err(e) => {
                writeln!(fo.err, "{}: {e}", unit.model.display()).unwrap();
                fo.fail(1);
                return fo;
            }
        };
        match cfg.format {
            Format::Json => {
                let regions: Vec<Region> = subs
                    .into_iter()
                    .enumerate()
                    .map(|(i, body)| Region {
                        id: format!("S{i}"),
                        label: String::new(),
                        body,
                    })
                    .collect();
                fo.out.push_str(&to_json(Kind::Regions, &regions));
            }
            _ => {
                for s in &subs {
                    let stages: Vec<String> = s.stages.iter().map(|r| r.to_string()).collect();
                    let arcs: Vec<&str> = s.arcs.iter().map(String::as_str).collect();
                    writeln!(fo.out, "{{{}}} [{}]", stages.join(", "), arcs.join(", ")).unwrap();
                }
                writeln!(
                    fo.out,
                    "{}: {} subdiagrams",
                    unit.model.display(),
                    subs.len()
                )
                .unwrap();
            }
        }
        return fo;
    }
    let Some(regions) = require_regions(&doc, &unit.model, styler, &mut fo) else {
        return fo;
    };
    let report = check_regions(&doc.model, regions);
    if !report.ok {
        finish_report(&unit.model, &report, cfg, styler, &mut fo);
        return fo;
    }
    match cfg.format {
        Format::Json => fo.out.push_str(&to_json(Kind::Regions, &regions)),
        _ => {
            styler.report(&unit.model, &report.diagnostics, &mut fo.out);
            for r in regions {
                writeln!(
                    fo.out,
                    "{} {:?}: {} stages, {} arcs",
                    r.id,
                    r.label,
                    r.body.stages.len(),
                    r.body.arcs.len()
                )
                .unwrap();
            }
        }
    }
    fo
}

fn cmd_behavior(unit: &Unit, cfg: &RunConfig, styler: &Styler) -> FileOutput {
    let mut fo = FileOutput::default();
    let Some(doc) = load(unit, styler, &mut fo) else {
        return fo;
    };
    let Some(regions) = require_regions(&doc, &unit.model, styler, &mut fo) else {
        return fo;
    };
    let graph = match &doc.behavior {
        Some(decl) => {
            let mode = cfg.mode.map(Into::into).or(decl.mode).unwrap_or_default();
            let report = validate_behavior(&doc.model, regions, &decl.graph, mode);
            styler.report(&unit.model, &report.diagnostics, &mut fo.err);
            if !report.ok {
                fo.fail(1);
                return fo;
            }
            decl.graph.clone()
        }
        None => match infer_behavior(&doc.model, regions) {
            Ok(g) => g,
            Err(BehaviorError::RegionCheckFailed(report)) => {
                styler.report(&unit.model, &report.diagnostics, &mut fo.err);
                fo.fail(1);
                return fo;
            }
            Err(e) => {
                writeln!(fo.err, "{}: {e}", unit.model.display()).unwrap();
                fo.fail(1);
                return fo;
            }
        },
    };
    match cfg.format {
        Format::Dot => fo.out.push_str(&behavior_to_dot(&graph)),
        Format::Json => fo.out.push_str(&to_json(Kind::BehaviorGraph, &graph)),
        Format::Text => {
            writeln!(fo.out, "initial: {}", graph.initial.join(", ")).unwrap();
            for (a, b) in &graph.edges {
                writeln!(fo.out, "{a} -> {b}").unwrap();
            }
        }
    }
    fo
}

fn cmd_simulate(unit: &Unit, cfg: &RunConfig, styler: &Styler) -> FileOutput {
    let mut fo = FileOutput::default();
    let Some(doc) = load(unit, styler, &mut fo) else {
        return fo;
    };
    let Some(sc_path) = unit.scenario.as_ref().or(cfg.scenario.as_ref()) else {
        writeln!(
            fo.err,
            "{}: no scenario given (.tms file or --scenario)",
            unit.model.display()
        )
        .unwrap();
        fo.fail(1);
        return fo;
    };
    let Some(mut sc) = load_scenario(sc_path, styler, &mut fo) else {
        return fo;
    };
    if let Some(s) = cfg.seed {
        sc.seed = s;
    }
    if let Some(m) = cfg.max_steps {
        sc.max_steps = m;
    }
    let static_report = validate(&doc.model);
    if !static_report.ok {
        finish_report(&unit.model, &static_report, cfg, styler, &mut fo);
        return fo;
    }
    let trace = match simulate(&doc.model, &sc) {
        Ok(t) => t,
        Err(e) => {
            writeln!(fo.err, "{}: simulation failed: {e}", unit.model.display()).unwrap();
            fo.fail(1);
            return fo;
        }
    };
    match cfg.format {
        Format::Json => fo.out.push_str(&to_json(Kind::Trace, &trace)),
        _ => fo.out.push_str(&trace.to_jsonl()),
    }
    if trace.meta.step_limit_exceeded {
        writeln!(
            fo.err,
            "{}: step limit {} reached",
            unit.model.display(),
            sc.max_steps
        )
        .unwrap();
    }
    let Some(regions) = doc.regions.as_deref() else {
        return fo;
    };
    let seg = segment(&trace, regions);
    let seq: Vec<&str> = seg.region_sequence();
    writeln!(
        fo.err,
        "{}: occurrences: {}",
        unit.model.display(),
        seq.join(" ")
    )
    .unwrap();
    let graph = match &doc.behavior {
        Some(d) => Ok(d.graph.clone()),
        None => infer_behavior(&doc.model, regions),
    };
    match graph {
        Ok(g) => {
            let report = conformance(&seg.occurrences, &g);
            styler.report(&unit.model, &report.diagnostics, &mut fo.err);
            if !report.ok {
                fo.fail(1);
            }
        }
        Err(BehaviorError::RegionCheckFailed(report)) => {
            styler.report(&unit.model, &report.diagnostics, &mut fo.err);
            fo.fail(1);
        }
        Err(e) => {
            writeln!(fo.err, "{}: {e}", unit.model.display()).unwrap();
            fo.fail(1);
        }
    }
    fo
}

fn cmd_export(unit: &Unit, cfg: &RunConfig, styler: &Styler) -> FileOutput {
    let mut fo = FileOutput::default();
    let Some(doc) = load(unit, styler, &mut fo) else {
        return fo;
    };
    match cfg.format {
        Format::Dot => fo
            .out
            .push_str(&model_to_dot(&doc.model, DotOptions::default())),
        Format::Json => fo.out.push_str(&to_json(Kind::Document, &doc)),
        Format::Text => fo.out.push_str(&serialize_document(&doc)),
    }
    fo
}

/// Whether `TM_COLOR` (default `auto`) asks for ANSI styling.
pub fn color_from_env(is_terminal: bool) -> bool {
    match std::env::var("TM_COLOR").as_deref() {
        Ok("never") => false,
        _ => is_terminal,
    }
}

/// Execute one invocation. Files are processed concurrently; output is
/// collected per file and concatenated in input order. The exit code is the
/// worst over all files: 2 for unreadable or unparsable input, 1 for a
/// semantic failure, 0 otherwise.
pub fn run(cfg: &RunConfig, color: bool) -> Outcome {
    let units = match group(&cfg.paths) {
        Ok(u) => u,
        Err(msg) => {
            return Outcome {
                code: 2,
                stdout: String::new(),
                stderr: format!("{msg}\n"),
            }
        }
    };
    let styler = Styler { color };
    let cmd = match cfg.command {
        Command::Check => cmd_check,
        Command::Events => cmd_events,
        Command::Behavior => cmd_behavior,
        Command::Simulate => cmd_simulate,
        Command::Export => cmd_export,
    };
    let results: Vec<FileOutput> = std::thread::scope(|s| {
        let handles: Vec<_> = units
            .iter()
            .map(|u| s.spawn(|| cmd(u, cfg, &styler)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut outcome = Outcome {
        code: 0,
        stdout: String::new(),
        stderr: String::new(),
    };
    for r in results {
        outcome.code = outcome.code.max(r.code);
        outcome.stdout.push_str(&r.out);
        outcome.stderr.push_str(&r.err);
    }
    outcome
}
