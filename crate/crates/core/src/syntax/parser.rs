use std::collections::HashMap;

use crate::behavior::{BehaviorDecl, Event, Interval, IntervalMode, Region, Subdiagram};
use crate::diag::{codes, Diagnostic, SourceSpan};
use crate::expr::{AttrValue, Attributes, BinOp, Expr, Stmt};
use crate::model::{
    AttrType, FlowArc, Machine, StageKind, StageRef, SugaredFlow, ThingDecl, TriggerArc,
};
use crate::sim::{Injection, Policy, Scenario, TokenSeed};

use super::lexer::{normalize_newlines, tokenize, Tok, Token};
use super::Document;

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    seen: HashMap<&'static str, HashMap<String, SourceSpan>>,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, Vec<Diagnostic>> {
        let toks = tokenize(&normalize_newlines(text)).map_err(|d| vec![d])?;
        Ok(Parser {
            toks,
            pos: 0,
            diags: Vec::new(),
            seen: HashMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            codes::SYNTAX,
            format!("expected {expected}, found {}", Self::describe(self.peek())),
        )
        .at(self.span())
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<SourceSpan> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn string(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("string literal")),
        }
    }

    fn opt_string(&mut self) -> Option<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        }
    }

    fn uint(&mut self, what: &str) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(i as u64)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Sym(";")) {
            self.bump();
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    /// A statement ends at a newline, `;`, a closing brace or end of input.
    fn end_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline | Tok::Sym(";") => {
                self.bump();
                Ok(())
            }
            Tok::Sym("}") | Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of statement")),
        }
    }

    fn declare(&mut self, namespace: &'static str, id: &str, span: SourceSpan) {
        let table = self.seen.entry(namespace).or_default();
        if let Some(first) = table.get(id) {
            let msg = format!(
                "duplicate {namespace} `{id}` (first declared at {}:{})",
                first.line, first.column
            );
            self.diags
                .push(Diagnostic::error(codes::DUPLICATE_ID, msg).at(span));
        } else {
            table.insert(id.to_string(), span);
        }
    }

    fn stage_kind(&mut self) -> PResult<StageKind> {
        let (word, span) = self.ident("stage kind")?;
        StageKind::from_keyword(&word).ok_or_else(|| {
            Diagnostic::error(
                codes::UNKNOWN_STAGE,
                format!(
                    "unknown stage `{word}` (expected Create, Process, Release, Receive or Transfer)"
                ),
            )
            .at(span)
        })
    }

    fn stage_ref(&mut self) -> PResult<StageRef> {
        let (machine, _) = self.ident("machine id")?;
        self.expect_sym(".")?;
        let kind = self.stage_kind()?;
        Ok(StageRef { machine, kind })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("=") => BinOp::Eq,
                Tok::Sym("!=") => BinOp::Ne,
                Tok::Sym("<") => BinOp::Lt,
                Tok::Sym("<=") => BinOp::Le,
                Tok::Sym(">") => BinOp::Gt,
                Tok::Sym(">=") => BinOp::Ge,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.additive()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            if let Tok::Int(i) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-i));
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::Int(i))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Text(s))
            }
            Tok::Ident(a) => {
                self.bump();
                Ok(Expr::Attr(a))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn literal(&mut self) -> PResult<AttrValue> {
        let negative = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(AttrValue::Int(if negative { -i } else { i }))
            }
            Tok::Str(s) if !negative => {
                self.bump();
                Ok(AttrValue::Text(s))
            }
            _ => Err(self.unexpected("integer or string literal")),
        }
    }

    // ---- model items ----

    fn thing(&mut self) -> PResult<ThingDecl> {
        let (name, span) = self.ident("thing name")?;
        self.declare("thing", &name, span);
        let mut attributes: Vec<(String, AttrType)> = Vec::new();
        if self.eat_sym("{") {
            self.skip_separators_and_commas();
            while !self.is_sym("}") {
                let (attr, aspan) = self.ident("attribute name")?;
                if attributes.iter().any(|(a, _)| *a == attr) {
                    self.diags.push(
                        Diagnostic::error(
                            codes::DUPLICATE_ID,
                            format!("duplicate attribute `{attr}` in thing `{name}`"),
                        )
                        .at(aspan),
                    );
                }
                self.expect_sym(":")?;
                let ty = if self.eat_word("int") {
                    AttrType::Int
                } else if self.eat_word("text") {
                    AttrType::Text
                } else {
                    return Err(self.unexpected("`int` or `text`"));
                };
                attributes.push((attr, ty));
                if !self.is_sym("}") {
                    if !matches!(self.peek(), Tok::Sym(",") | Tok::Newline | Tok::Sym(";")) {
                        return Err(self.unexpected("`,` or `}`"));
                    }
                    self.skip_separators_and_commas();
                }
            }
            self.bump();
        }
        self.end_statement()?;
        Ok(ThingDecl { name, attributes })
    }

    fn skip_separators_and_commas(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Sym(";") | Tok::Sym(",")) {
            self.bump();
        }
    }

    fn machine(&mut self) -> PResult<Machine> {
        let (id, span) = self.ident("machine id")?;
        self.declare("machine", &id, span);
        let name = self.opt_string().unwrap_or_else(|| id.clone());
        self.expect_sym("{")?;
        let mut m = Machine {
            id,
            name,
            stages: Vec::new(),
            submachines: Vec::new(),
        };
        loop {
            self.skip_separators();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_word("stages") {
                if !matches!(self.peek(), Tok::Newline | Tok::Sym(";") | Tok::Sym("}")) {
                    m.stages.push(self.stage_kind()?);
                    while self.eat_sym(",") {
                        m.stages.push(self.stage_kind()?);
                    }
                }
                self.end_statement()?;
            } else if self.eat_word("machine") {
                let sub = self.machine()?;
                m.submachines.push(sub);
            } else {
                return Err(self.unexpected("`stages`, `machine` or `}`"));
            }
        }
        self.end_statement()?;
        Ok(m)
    }

    fn arc_tail(
        &mut self,
        allow_thing: bool,
    ) -> PResult<(Option<String>, Option<Expr>, Option<String>)> {
        let mut thing = None;
        let mut guard = None;
        let mut label = None;
        if allow_thing && self.eat_word("on") {
            thing = Some(self.ident("thing name")?.0);
        }
        if self.eat_word("when") {
            guard = Some(self.expr()?);
        }
        if self.eat_word("label") {
            label = Some(self.string()?);
        }
        self.end_statement()?;
        Ok((thing, guard, label))
    }

    fn flow(&mut self, doc: &mut Document) -> PResult<()> {
        let (id, span) = self.ident("arc id")?;
        self.declare("arc", &id, span);
        self.expect_sym(":")?;
        let from_span = self.span();
        let sugared = matches!(self.peek_at(1), Tok::Sym("=>"));
        if sugared {
            let (from, _) = self.ident("machine id")?;
            self.expect_sym("=>")?;
            let (to, _) = self.ident("machine id")?;
            if from == to {
                self.diags.push(
                    Diagnostic::error(
                        codes::DUPLICATE_ENDPOINT,
                        format!("arc `{id}` connects machine `{from}` to itself"),
                    )
                    .at(from_span),
                );
            }
            let (thing, guard, label) = self.arc_tail(true)?;
            doc.model.sugared.push(SugaredFlow {
                id,
                from,
                to,
                thing,
                guard,
                label,
            });
            return Ok(());
        }
        let source = self.stage_ref()?;
        self.expect_sym("->")?;
        let target = self.stage_ref()?;
        if source == target {
            self.diags.push(
                Diagnostic::error(
                    codes::DUPLICATE_ENDPOINT,
                    format!("flow `{id}` has identical endpoints {source}"),
                )
                .at(from_span),
            );
        }
        let (thing, guard, label) = self.arc_tail(true)?;
        doc.model.flows.push(FlowArc {
            id,
            source,
            target,
            thing,
            guard,
            label,
        });
        Ok(())
    }

    fn trigger(&mut self) -> PResult<TriggerArc> {
        let (id, span) = self.ident("arc id")?;
        self.declare("arc", &id, span);
        self.expect_sym(":")?;
        let source = self.stage_ref()?;
        self.expect_sym("->")?;
        let target = self.stage_ref()?;
        let (_, guard, label) = self.arc_tail(false)?;
        Ok(TriggerArc {
            id,
            source,
            target,
            guard,
            label,
        })
    }

    fn regions(&mut self) -> PResult<Vec<Region>> {
        self.skip_newlines();
        self.expect_sym("{")?;
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            if self.eat_sym("}") {
                break;
            }
            self.expect_word("region")?;
            let (id, span) = self.ident("region id")?;
            self.declare("region", &id, span);
            let label = self.opt_string().unwrap_or_default();
            self.expect_sym("{")?;
            let mut body = Subdiagram::default();
            loop {
                self.skip_separators();
                if self.eat_sym("}") {
                    break;
                }
                if self.eat_word("stages") {
                    body.stages.insert(self.stage_ref()?);
                    while self.eat_sym(",") {
                        self.skip_newlines();
                        body.stages.insert(self.stage_ref()?);
                    }
                } else if self.eat_word("arcs") {
                    body.arcs.insert(self.ident("arc id")?.0);
                    while self.eat_sym(",") {
                        self.skip_newlines();
                        body.arcs.insert(self.ident("arc id")?.0);
                    }
                } else {
                    return Err(self.unexpected("`stages`, `arcs` or `}`"));
                }
                self.end_statement()?;
            }
            self.end_statement()?;
            out.push(Region { id, label, body });
        }
        self.end_statement()?;
        Ok(out)
    }

    fn behavior(&mut self) -> PResult<BehaviorDecl> {
        self.skip_newlines();
        self.expect_sym("{")?;
        let mut decl = BehaviorDecl::default();
        loop {
            self.skip_separators();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_word("mode") {
                decl.mode = Some(if self.eat_word("strict") {
                    IntervalMode::Strict
                } else if self.eat_word("overlap") {
                    IntervalMode::Overlap
                } else {
                    return Err(self.unexpected("`strict` or `overlap`"));
                });
            } else if self.eat_word("event") {
                let (id, span) = self.ident("event id")?;
                self.declare("event", &id, span);
                self.expect_word("region")?;
                let (region, _) = self.ident("region id")?;
                let interval = if self.eat_word("at") {
                    let start = self.uint("start step")?;
                    self.expect_word("for")?;
                    let dspan = self.span();
                    let duration = self.uint("duration")?;
                    if duration == 0 {
                        return Err(Diagnostic::error(
                            codes::SYNTAX,
                            "event duration must be at least 1",
                        )
                        .at(dspan));
                    }
                    Some(Interval::new(start, duration))
                } else {
                    None
                };
                decl.graph.events.push(Event {
                    id,
                    region,
                    interval,
                });
            } else if self.eat_word("edge") {
                let (a, _) = self.ident("event id")?;
                self.expect_sym("->")?;
                let (b, _) = self.ident("event id")?;
                decl.graph.edges.push((a, b));
            } else if self.eat_word("initial") {
                decl.graph.initial.push(self.ident("event id")?.0);
                while self.eat_sym(",") {
                    decl.graph.initial.push(self.ident("event id")?.0);
                }
            } else {
                return Err(self.unexpected("`mode`, `event`, `edge`, `initial` or `}`"));
            }
            self.end_statement()?;
        }
        self.end_statement()?;
        Ok(decl)
    }

    fn document(&mut self) -> PResult<Document> {
        let mut doc = Document::default();
        loop {
            self.skip_separators();
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) => {
                    self.bump();
                    match w.as_str() {
                        "thing" => {
                            let t = self.thing()?;
                            doc.model.things.push(t);
                        }
                        "machine" => {
                            let m = self.machine()?;
                            doc.model.machines.push(m);
                        }
                        "flow" => self.flow(&mut doc)?,
                        "trigger" => {
                            let t = self.trigger()?;
                            doc.model.triggers.push(t);
                        }
                        "regions" => {
                            let regions = self.regions()?;
                            doc.regions.get_or_insert_with(Vec::new).extend(regions);
                        }
                        "behavior" => {
                            if doc.behavior.is_some() {
                                return Err(Diagnostic::error(
                                    codes::DUPLICATE_ID,
                                    "more than one behavior section",
                                )
                                .at(span));
                            }
                            doc.behavior = Some(self.behavior()?);
                        }
                        other => {
                            return Err(Diagnostic::error(
                                codes::SYNTAX,
                                format!(
                                    "unknown statement `{other}` (expected thing, machine, flow, trigger, regions or behavior)"
                                ),
                            )
                            .at(span));
                        }
                    }
                }
                _ => return Err(self.unexpected("statement")),
            }
        }
        Ok(doc)
    }

    // ---- scenarios ----

    fn seed(&mut self) -> PResult<TokenSeed> {
        let (thing, _) = self.ident("thing name")?;
        let mut attributes = Attributes::new();
        if self.eat_sym("{") {
            self.skip_separators_and_commas();
            while !self.is_sym("}") {
                let (name, span) = self.ident("attribute name")?;
                self.expect_sym("=")?;
                let v = self.literal()?;
                if attributes.insert(name.clone(), v).is_some() {
                    self.diags.push(
                        Diagnostic::error(
                            codes::DUPLICATE_ID,
                            format!("attribute `{name}` set twice"),
                        )
                        .at(span),
                    );
                }
                self.skip_separators_and_commas();
            }
            self.bump();
        }
        Ok(TokenSeed { thing, attributes })
    }

    fn scenario(&mut self) -> PResult<Scenario> {
        let mut sc = Scenario::default();
        loop {
            self.skip_separators();
            let span = self.span();
            let word = match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(w) => {
                    self.bump();
                    w
                }
                _ => return Err(self.unexpected("scenario statement")),
            };
            match word.as_str() {
                "scenario" => sc.name = Some(self.ident("scenario name")?.0),
                "policy" => {
                    sc.policy = if self.eat_word("deterministic") {
                        Policy::Deterministic
                    } else if self.eat_word("random") {
                        Policy::SeededRandom
                    } else {
                        return Err(self.unexpected("`deterministic` or `random`"));
                    }
                }
                "seed" => sc.seed = self.uint("seed value")?,
                "max_steps" => {
                    let s = self.span();
                    sc.max_steps = self.uint("step count")?;
                    if sc.max_steps == 0 {
                        return Err(Diagnostic::error(
                            codes::SYNTAX,
                            "max_steps must be at least 1",
                        )
                        .at(s));
                    }
                }
                "token" => {
                    let at = self.stage_ref()?;
                    let seed = self.seed()?;
                    sc.initial.push((at, seed));
                }
                "inject" => {
                    let step = self.uint("step")?;
                    let at = self.stage_ref()?;
                    let seed = self.seed()?;
                    sc.injections.push(Injection { step, at, seed });
                }
                "mint" => {
                    let (machine, mspan) = self.ident("machine id")?;
                    self.declare("mint", &machine, mspan);
                    let seed = self.seed()?;
                    sc.mints.push((machine, seed));
                }
                "action" => {
                    let at = self.stage_ref()?;
                    self.expect_sym("{")?;
                    let mut stmts = Vec::new();
                    loop {
                        self.skip_separators();
                        if self.eat_sym("}") {
                            break;
                        }
                        let (target, _) = self.ident("attribute name")?;
                        self.expect_sym(":=")?;
                        let value = self.expr()?;
                        stmts.push(Stmt { target, value });
                        self.end_statement()?;
                    }
                    sc.actions.push((at, stmts));
                }
                "stop" => {
                    self.expect_word("when")?;
                    sc.stop = Some(self.expr()?);
                }
                other => {
                    return Err(Diagnostic::error(
                        codes::SYNTAX,
                        format!("unknown scenario statement `{other}`"),
                    )
                    .at(span))
                }
            }
            self.end_statement()?;
        }
        Ok(sc)
    }
}

fn finish<T>(mut p: Parser, result: PResult<T>) -> Result<T, Vec<Diagnostic>> {
    match result {
        Ok(v) if p.diags.is_empty() => Ok(v),
        Ok(_) => Err(p.diags),
        Err(d) => {
            p.diags.push(d);
            Err(p.diags)
        }
    }
}

/// Parse a `.tm` or `.tmb` document.
pub fn parse_document(text: &str) -> Result<Document, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let r = p.document();
    finish(p, r)
}

/// Parse a `.tms` scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let r = p.scenario();
    finish(p, r)
}

/// Parse a standalone guard expression.
pub fn parse_expr(text: &str) -> Result<Expr, Vec<Diagnostic>> {
    let mut p = Parser::new(text)?;
    let r = p.expr().and_then(|e| {
        p.skip_newlines();
        if matches!(p.peek(), Tok::Eof) {
            Ok(e)
        } else {
            Err(p.unexpected("end of expression"))
        }
    });
    finish(p, r)
}
