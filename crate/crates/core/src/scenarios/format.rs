//! Scenario text format.
//!
//! ```text
//! [domain]
//! nodes A1 A2
//! dmax 3
//! symmetric link
//! var X Y : node
//! var D E : dist
//! track sp(A1,A2,_)
//! output sp
//!
//! [agent A1]
//! idb:
//!   sp(A1,A1,0).
//!   sp(A1,Y,D) :- spt(A1,Y,X,D).
//! hbe: link(A1,A2).
//! hin: sp(A2,Y,D) where Y != A1.
//! edb: link(A1,A2).
//!
//! [events]
//! send A2 -> A1
//! fail link(A1,A2)
//! @round 1: restore link(A1,A2)
//! ```
//!
//! Untimed event lines form the explicit script; `@round N:` lines attach an
//! environment change to the boundary after `N` fair rounds.

use std::collections::BTreeSet;
use std::fmt;

use super::{AgentBlock, PatternItem, Scenario, ScenarioError};
use crate::agents::{AgentId, EnvChange};
use crate::grounder::{AtomPattern, DomainSpec, PatternContext, TermPattern, VarType, VarTypes};
use crate::logic::{Atom, Constant, Symbol};
use crate::runtime::{Event, FamilyPattern, TimedChange};
use crate::syntax::{Cursor, Tok};
use crate::ParseError;

enum SectionKind {
    Domain,
    Agent(String),
    Events,
}

struct Section<'a> {
    kind: SectionKind,
    first_line: usize,
    lines: Vec<&'a str>,
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, ParseError> {
    let mut out: Vec<Section<'_>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let words: Vec<&str> = inner.split_whitespace().collect();
            let kind = match words.as_slice() {
                ["domain"] => SectionKind::Domain,
                ["events"] => SectionKind::Events,
                ["agent", id] => SectionKind::Agent(id.to_string()),
                _ => {
                    return Err(ParseError::new(
                        line,
                        1,
                        format!("unknown section header `{t}`"),
                    ))
                }
            };
            out.push(Section {
                kind,
                first_line: line + 1,
                lines: Vec::new(),
            });
            continue;
        }
        match out.last_mut() {
            Some(s) => s.lines.push(raw),
            None => {
                let code = t.split('%').next().unwrap_or("").trim();
                if !code.is_empty() {
                    return Err(ParseError::new(
                        line,
                        1,
                        "text before the first section header",
                    ));
                }
            }
        }
    }
    Ok(out)
}

/// Non-blank statement lines of a line-oriented section, with line numbers.
fn statements<'a>(s: &'a Section<'_>) -> impl Iterator<Item = (usize, &'a str)> {
    s.lines
        .iter()
        .enumerate()
        .map(move |(i, l)| (s.first_line + i, *l))
        .filter(|(_, l)| !l.split('%').next().unwrap_or("").trim().is_empty())
}

fn var_type(cur: &mut Cursor) -> Result<VarType, ParseError> {
    match cur.ident()?.as_str() {
        "node" => Ok(VarType::Node),
        "dist" => Ok(VarType::Dist),
        other => Err(cur.error(format!(
            "unknown variable type `{other}` (expected node or dist)"
        ))),
    }
}

fn family(cur: &mut Cursor) -> Result<FamilyPattern, ParseError> {
    let pred = cur.ident()?;
    let mut args = Vec::new();
    cur.expect(&Tok::LParen)?;
    loop {
        args.push(match cur.next() {
            Tok::Nat(n) => Some(Constant::Nat(n)),
            Tok::Ident(s) if s == "_" => None,
            Tok::Ident(s) => Some(Constant::sym(&s)),
            other => return Err(cur.error(format!("expected term, found {other}"))),
        });
        if cur.eat(&Tok::RParen) {
            break;
        }
        cur.expect(&Tok::Comma)?;
    }
    FamilyPattern::new(&pred, args)
        .ok_or_else(|| cur.error("tracked family needs exactly one `_` slot"))
}

fn expect_end(cur: &Cursor) -> Result<(), ParseError> {
    if cur.at_eof() {
        Ok(())
    } else {
        Err(cur.error(format!("unexpected {}", cur.peek())))
    }
}

fn parse_domain(sc: &mut Scenario, s: &Section<'_>) -> Result<(), ParseError> {
    for (line, text) in statements(s) {
        let mut cur = Cursor::new(text, line)?;
        let (l, c) = cur.here();
        let kw = cur.ident()?;
        match kw.as_str() {
            "nodes" => {
                while !cur.at_eof() {
                    sc.domain.nodes.push(Symbol::new(&cur.ident()?));
                }
            }
            "dmax" => sc.domain.distance_max = cur.nat()?,
            "symmetric" => {
                while !cur.at_eof() {
                    sc.domain.symmetric.insert(Symbol::new(&cur.ident()?));
                }
            }
            "var" => {
                let mut names = Vec::new();
                while !matches!(cur.peek(), Tok::Colon | Tok::Eof) {
                    names.push(cur.ident()?);
                }
                cur.expect(&Tok::Colon)?;
                let t = var_type(&mut cur)?;
                for n in names {
                    sc.var_types.insert(n, t);
                }
            }
            "track" => sc.tracks.push(family(&mut cur)?),
            "output" => {
                while !cur.at_eof() {
                    sc.outputs.insert(Symbol::new(&cur.ident()?));
                }
            }
            other => {
                return Err(ParseError::new(
                    l,
                    c,
                    format!("unknown domain statement `{other}`"),
                ))
            }
        }
        expect_end(&cur)?;
    }
    Ok(())
}

fn is_key(cur: &Cursor) -> bool {
    matches!(cur.peek(), Tok::Ident(_)) && *cur.peek_at(1) == Tok::Colon
}

fn item(ctx: &PatternContext<'_>, cur: &mut Cursor) -> Result<PatternItem, ParseError> {
    let atom = ctx.atom(cur)?;
    let mut constraints = Vec::new();
    if matches!(cur.peek(), Tok::Ident(w) if w == "where") {
        cur.next();
        loop {
            constraints.push(ctx.constraint(cur)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
    }
    cur.expect(&Tok::Dot)?;
    Ok(PatternItem { atom, constraints })
}

fn parse_agent(sc: &Scenario, id: &str, s: &Section<'_>) -> Result<AgentBlock, ParseError> {
    let ctx = PatternContext { domain: &sc.domain };
    let mut cur = Cursor::new(&s.lines.join("\n"), s.first_line)?;
    let mut b = AgentBlock::new(id);
    while !cur.at_eof() {
        if !is_key(&cur) {
            return Err(cur.error(format!(
                "expected `idb:`, `hbe:`, `hin:`, `edb:` or `in:`, found {}",
                cur.peek()
            )));
        }
        let key = cur.ident()?;
        let pos = cur.here();
        cur.next();
        while !cur.at_eof() && !is_key(&cur) {
            match key.as_str() {
                "idb" => b.idb.push(ctx.clause(&mut cur, &sc.var_types)?),
                "hbe" => b.hbe.push(item(&ctx, &mut cur)?),
                "hin" => b.hin.push(item(&ctx, &mut cur)?),
                "edb" => b.edb.push(item(&ctx, &mut cur)?),
                "in" => b.input.push(item(&ctx, &mut cur)?),
                other => {
                    return Err(ParseError::new(
                        pos.0,
                        pos.1,
                        format!("unknown agent key `{other}`"),
                    ))
                }
            }
        }
    }
    Ok(b)
}

fn ground_atom(ctx: &PatternContext<'_>, cur: &mut Cursor) -> Result<Atom, ParseError> {
    let (line, col) = cur.here();
    let p = ctx.atom(cur)?;
    let args = p
        .args
        .iter()
        .map(|t| match t {
            TermPattern::Const(c) => Ok(c.clone()),
            _ => Err(ParseError::new(
                line,
                col,
                format!("event atom `{p}` must be ground"),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ctx.domain.normalize(Atom {
        predicate: p.predicate,
        args,
    }))
}

/// `fail a, b restore c` (either group optional, at most once each).
fn env_change(ctx: &PatternContext<'_>, cur: &mut Cursor) -> Result<EnvChange, ParseError> {
    let mut became_true = BTreeSet::new();
    let mut became_false = BTreeSet::new();
    let mut seen = BTreeSet::new();
    while !cur.at_eof() {
        let (line, col) = cur.here();
        let kw = cur.ident()?;
        let target = match kw.as_str() {
            "fail" => &mut became_false,
            "restore" => &mut became_true,
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("expected `fail` or `restore`, found `{other}`"),
                ))
            }
        };
        if !seen.insert(kw.clone()) {
            return Err(ParseError::new(line, col, format!("`{kw}` given twice")));
        }
        let keyword =
            |c: &Cursor| matches!(c.peek(), Tok::Ident(w) if w == "fail" || w == "restore");
        if !cur.at_eof() && !keyword(cur) {
            loop {
                target.insert(ground_atom(ctx, cur)?);
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
    }
    if seen.is_empty() {
        return Err(cur.error("expected `fail` or `restore`"));
    }
    let (line, col) = cur.here();
    EnvChange::new(became_true, became_false).map_err(|e| ParseError::new(line, col, e.to_string()))
}

fn parse_events(sc: &mut Scenario, s: &Section<'_>) -> Result<(), ParseError> {
    let domain = sc.domain.clone();
    let ctx = PatternContext { domain: &domain };
    for (line, text) in statements(s) {
        let mut cur = Cursor::new(text, line)?;
        if cur.eat(&Tok::At) {
            let (l, c) = cur.here();
            if cur.ident()? != "round" {
                return Err(ParseError::new(l, c, "expected `@round N:`"));
            }
            let after_round = cur.nat()? as usize;
            cur.expect(&Tok::Colon)?;
            let change = env_change(&ctx, &mut cur)?;
            sc.timed.push(TimedChange {
                after_round,
                change,
            });
        } else if matches!(cur.peek(), Tok::Ident(w) if w == "send") {
            cur.next();
            let sender = cur.ident()?;
            cur.expect(&Tok::Arrow)?;
            let receiver = cur.ident()?;
            expect_end(&cur)?;
            sc.script.push(Event::Comm {
                sender: AgentId::new(&sender),
                receiver: AgentId::new(&receiver),
            });
        } else {
            sc.script.push(Event::Env(env_change(&ctx, &mut cur)?));
        }
    }
    Ok(())
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let sections = split_sections(text)?;
    let mut sc = Scenario::default();
    let mut domains = sections
        .iter()
        .filter(|s| matches!(s.kind, SectionKind::Domain));
    if let Some(d) = domains.next() {
        parse_domain(&mut sc, d)?;
    }
    if let Some(d) = domains.next() {
        return Err(ParseError::new(d.first_line - 1, 1, "second [domain] section").into());
    }
    for s in &sections {
        if let SectionKind::Agent(id) = &s.kind {
            let block = parse_agent(&sc, id, s)?;
            sc.agents.push(block);
        }
    }
    for s in sections
        .iter()
        .filter(|s| matches!(s.kind, SectionKind::Events))
    {
        parse_events(&mut sc, s)?;
    }
    if sc.agents.is_empty() {
        return Err(ScenarioError::NoAgents);
    }
    Ok(sc)
}

/// Replaces the scenario's event lists with those parsed from `text`, which
/// holds lines in the `[events]` syntax.
pub fn parse_events_into(sc: &mut Scenario, text: &str) -> Result<(), ScenarioError> {
    sc.script.clear();
    sc.timed.clear();
    let section = Section {
        kind: SectionKind::Events,
        first_line: 1,
        lines: text.lines().collect(),
    };
    Ok(parse_events(sc, &section)?)
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.atom)?;
        for (i, c) in self.constraints.iter().enumerate() {
            f.write_str(if i == 0 { " where " } else { ", " })?;
            write!(f, "{c}")?;
        }
        f.write_str(".")
    }
}

fn write_domain(f: &mut fmt::Formatter<'_>, d: &DomainSpec, vars: &VarTypes) -> fmt::Result {
    writeln!(f, "[domain]")?;
    if !d.nodes.is_empty() {
        let nodes: Vec<&str> = d.nodes.iter().map(Symbol::as_str).collect();
        writeln!(f, "nodes {}", nodes.join(" "))?;
    }
    writeln!(f, "dmax {}", d.distance_max)?;
    if !d.symmetric.is_empty() {
        let preds: Vec<&str> = d.symmetric.iter().map(Symbol::as_str).collect();
        writeln!(f, "symmetric {}", preds.join(" "))?;
    }
    for t in [VarType::Node, VarType::Dist] {
        let names: Vec<&str> = vars
            .iter()
            .filter(|(_, v)| **v == t)
            .map(|(n, _)| n.as_str())
            .collect();
        if !names.is_empty() {
            writeln!(f, "var {} : {t}", names.join(" "))?;
        }
    }
    Ok(())
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_domain(f, &self.domain, &self.var_types)?;
        for t in &self.tracks {
            writeln!(f, "track {t}")?;
        }
        if !self.outputs.is_empty() {
            let preds: Vec<&str> = self.outputs.iter().map(Symbol::as_str).collect();
            writeln!(f, "output {}", preds.join(" "))?;
        }
        for b in &self.agents {
            writeln!(f, "\n[agent {}]", b.id)?;
            if !b.idb.is_empty() {
                writeln!(f, "idb:")?;
                for c in &b.idb {
                    writeln!(f, "  {c}")?;
                }
            }
            for (key, items) in [
                ("hbe", &b.hbe),
                ("hin", &b.hin),
                ("edb", &b.edb),
                ("in", &b.input),
            ] {
                if items.is_empty() {
                    continue;
                }
                writeln!(f, "{key}:")?;
                for it in items {
                    writeln!(f, "  {it}")?;
                }
            }
        }
        if !self.script.is_empty() || !self.timed.is_empty() {
            writeln!(f, "\n[events]")?;
            for e in &self.script {
                writeln!(f, "{e}")?;
            }
            for t in &self.timed {
                writeln!(
                    f,
                    "@round {}: {}",
                    t.after_round,
                    Event::Env(t.change.clone())
                )?;
            }
        }
        Ok(())
    }
}

/// Atom pattern with constants only, for programmatic scenario construction.
pub(crate) fn const_pattern(a: &Atom) -> AtomPattern {
    AtomPattern {
        predicate: a.predicate.clone(),
        args: a.args.iter().cloned().map(TermPattern::Const).collect(),
    }
}
