//! Instantiation of schematic clauses over typed finite domains.
//!
//! Variables range over node constants or over the naturals `0..=dmax`.
//! Integer terms may carry a `+k` offset; instantiations whose integer terms
//! leave the domain are dropped. Comparisons are evaluated while grounding and
//! never appear in ground bodies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::logic::{Atom, Clause, Constant, GroundProgram, Literal, Symbol};
use crate::syntax::{Cursor, ParseError, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarType {
    Node,
    Dist,
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarType::Node => "node",
            VarType::Dist => "dist",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSpec {
    pub nodes: Vec<Symbol>,
    pub distance_max: u32,
    /// Binary predicates whose two arguments are unordered, e.g. `link`.
    pub symmetric: BTreeSet<Symbol>,
}

impl DomainSpec {
    pub fn new(nodes: &[&str], distance_max: u32) -> Self {
        DomainSpec {
            nodes: nodes.iter().map(|n| Symbol::new(n)).collect(),
            distance_max,
            symmetric: BTreeSet::new(),
        }
    }

    pub fn with_symmetric(mut self, predicate: &str) -> Self {
        self.symmetric.insert(Symbol::new(predicate));
        self
    }

    pub fn is_node(&self, s: &str) -> bool {
        self.nodes.iter().any(|n| n.as_str() == s)
    }

    /// Canonical form of an atom: arguments of symmetric predicates sorted.
    pub fn normalize(&self, mut a: Atom) -> Atom {
        if a.args.len() == 2 && self.symmetric.contains(&a.predicate) && a.args[0] > a.args[1] {
            a.args.swap(0, 1);
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermPattern {
    Const(Constant),
    Var(String),
    /// `Var+k`
    Offset(String, u32),
}

impl TermPattern {
    fn var(&self) -> Option<&str> {
        match self {
            TermPattern::Var(v) | TermPattern::Offset(v, _) => Some(v),
            TermPattern::Const(_) => None,
        }
    }
}

impl fmt::Display for TermPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermPattern::Const(c) => write!(f, "{c}"),
            TermPattern::Var(v) => f.write_str(v),
            TermPattern::Offset(v, k) => write!(f, "{v}+{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomPattern {
    pub predicate: Symbol,
    pub args: Vec<TermPattern>,
}

impl AtomPattern {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(TermPattern::var)
    }

    pub fn is_ground(&self) -> bool {
        self.vars().next().is_none()
    }
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LiteralPattern {
    pub atom: AtomPattern,
    pub positive: bool,
}

impl fmt::Display for LiteralPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "not {}", self.atom)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    fn holds(self, l: &Constant, r: &Constant) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Gt => l > r,
            CmpOp::Ge => l >= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub lhs: TermPattern,
    pub op: CmpOp,
    pub rhs: TermPattern,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

pub type VarTypes = BTreeMap<String, VarType>;

/// A clause with typed variables, standing for all of its ground instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchematicClause {
    pub head: AtomPattern,
    pub body: Vec<LiteralPattern>,
    pub constraints: Vec<Constraint>,
    pub var_types: VarTypes,
}

impl SchematicClause {
    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let all = self
            .head
            .vars()
            .chain(self.body.iter().flat_map(|l| l.atom.vars()))
            .chain(
                self.constraints
                    .iter()
                    .flat_map(|c| c.lhs.var().into_iter().chain(c.rhs.var())),
            );
        for v in all {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
        out
    }
}

impl fmt::Display for SchematicClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let items: Vec<String> = self
            .body
            .iter()
            .map(ToString::to_string)
            .chain(self.constraints.iter().map(ToString::to_string))
            .collect();
        if !items.is_empty() {
            write!(f, " :- {}", items.join(", "))?;
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("variable `{var}` has no declared type (or `{var}` is an undeclared constant) in `{clause}`")]
    UntypedVariable { var: String, clause: String },
    #[error("variable `{var}` in a constraint of `{clause}` occurs in neither the head nor a positive body literal")]
    UnboundVariable { var: String, clause: String },
    #[error("`{term}` in `{clause}` applies arithmetic or ordering to a node")]
    TypeMismatch { term: String, clause: String },
}

struct Binding<'a> {
    vars: &'a [String],
    values: Vec<Constant>,
}

impl Binding<'_> {
    fn lookup(&self, v: &str) -> &Constant {
        let i = self
            .vars
            .iter()
            .position(|x| x == v)
            .expect("variable collected");
        &self.values[i]
    }

    /// `None` when an integer term falls outside `0..=dmax`.
    fn term(&self, t: &TermPattern, dmax: u32) -> Option<Constant> {
        let c = match t {
            TermPattern::Const(c) => c.clone(),
            TermPattern::Var(v) => self.lookup(v).clone(),
            TermPattern::Offset(v, k) => match self.lookup(v) {
                Constant::Nat(n) => Constant::Nat(n.checked_add(*k)?),
                Constant::Sym(_) => return None,
            },
        };
        match c {
            Constant::Nat(n) if n > dmax => None,
            c => Some(c),
        }
    }

    fn atom(&self, p: &AtomPattern, d: &DomainSpec) -> Option<Atom> {
        let args = p
            .args
            .iter()
            .map(|t| self.term(t, d.distance_max))
            .collect::<Option<Vec<_>>>()?;
        Some(d.normalize(Atom {
            predicate: p.predicate.clone(),
            args,
        }))
    }
}

fn check_types(c: &SchematicClause, vars: &[String]) -> Result<(), GroundError> {
    let clause = c.to_string();
    for v in vars {
        if !c.var_types.contains_key(v) {
            return Err(GroundError::UntypedVariable {
                var: v.clone(),
                clause,
            });
        }
    }
    let is_node_var =
        |t: &TermPattern| matches!(t.var(), Some(v) if c.var_types[v] == VarType::Node);
    let mut terms = c
        .head
        .args
        .iter()
        .chain(c.body.iter().flat_map(|l| l.atom.args.iter()));
    if let Some(t) = terms.find(|t| matches!(t, TermPattern::Offset(..)) && is_node_var(t)) {
        return Err(GroundError::TypeMismatch {
            term: t.to_string(),
            clause,
        });
    }
    for k in &c.constraints {
        let ordered = !matches!(k.op, CmpOp::Eq | CmpOp::Ne);
        for t in [&k.lhs, &k.rhs] {
            if is_node_var(t) && (ordered || matches!(t, TermPattern::Offset(..))) {
                return Err(GroundError::TypeMismatch {
                    term: k.to_string(),
                    clause,
                });
            }
        }
    }
    let bound: BTreeSet<&str> = c
        .head
        .vars()
        .chain(
            c.body
                .iter()
                .filter(|l| l.positive)
                .flat_map(|l| l.atom.vars()),
        )
        .collect();
    for k in &c.constraints {
        for v in k.lhs.var().into_iter().chain(k.rhs.var()) {
            if !bound.contains(v) {
                return Err(GroundError::UnboundVariable {
                    var: v.to_string(),
                    clause,
                });
            }
        }
    }
    Ok(())
}

/// Every binding of the clause's variables that satisfies its constraints and
/// keeps all integer terms inside the domain.
fn for_each_instance(
    c: &SchematicClause,
    d: &DomainSpec,
    mut emit: impl FnMut(&Binding<'_>),
) -> Result<(), GroundError> {
    let vars = c.vars();
    check_types(c, &vars)?;
    let domains: Vec<Vec<Constant>> = vars
        .iter()
        .map(|v| match c.var_types[v] {
            VarType::Node => d.nodes.iter().cloned().map(Constant::Sym).collect(),
            VarType::Dist => (0..=d.distance_max).map(Constant::Nat).collect(),
        })
        .collect();
    if domains.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let b = Binding {
            vars: &vars,
            values: idx
                .iter()
                .zip(&domains)
                .map(|(&i, dom)| dom[i].clone())
                .collect(),
        };
        let ok = c.constraints.iter().all(|k| {
            match (b.term(&k.lhs, u32::MAX), b.term(&k.rhs, u32::MAX)) {
                (Some(l), Some(r)) => k.op.holds(&l, &r),
                _ => false,
            }
        });
        if ok {
            emit(&b);
        }
        // odometer
        let mut pos = vars.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

pub fn ground_clause(c: &SchematicClause, d: &DomainSpec) -> Result<BTreeSet<Clause>, GroundError> {
    let mut out = BTreeSet::new();
    for_each_instance(c, d, |b| {
        let Some(head) = b.atom(&c.head, d) else {
            return;
        };
        let body: Option<Vec<Literal>> = c
            .body
            .iter()
            .map(|l| {
                b.atom(&l.atom, d).map(|atom| Literal {
                    atom,
                    positive: l.positive,
                })
            })
            .collect();
        if let Some(body) = body {
            out.insert(Clause::new(head, body));
        }
    })?;
    Ok(out)
}

/// Union of all ground instances; `extra_universe` adds declared input and
/// environment atoms that may not occur in any clause.
pub fn ground_program(
    cs: &[SchematicClause],
    d: &DomainSpec,
    extra_universe: impl IntoIterator<Item = Atom>,
) -> Result<GroundProgram, GroundError> {
    let mut p = GroundProgram::default();
    for c in cs {
        for g in ground_clause(c, d)? {
            p.insert(g);
        }
    }
    Ok(p.with_universe(extra_universe))
}

/// Ground instances of an atom pattern filtered by `constraints`.
pub fn ground_pattern(
    pattern: &AtomPattern,
    constraints: &[Constraint],
    var_types: &VarTypes,
    d: &DomainSpec,
) -> Result<BTreeSet<Atom>, GroundError> {
    let as_fact = SchematicClause {
        head: pattern.clone(),
        body: Vec::new(),
        constraints: constraints.to_vec(),
        var_types: var_types.clone(),
    };
    Ok(ground_clause(&as_fact, d)?
        .into_iter()
        .map(|c| c.head().clone())
        .collect())
}

// Parsing. Uppercase-first identifiers that are not declared node constants
// are variables; everything else is a constant.

pub(crate) struct PatternContext<'a> {
    pub domain: &'a DomainSpec,
}

impl PatternContext<'_> {
    fn classify(&self, name: String) -> TermPattern {
        let upper = name.chars().next().is_some_and(|c| c.is_ascii_uppercase());
        if upper && !self.domain.is_node(&name) {
            TermPattern::Var(name)
        } else {
            TermPattern::Const(Constant::sym(&name))
        }
    }

    pub fn term(&self, cur: &mut Cursor) -> Result<TermPattern, ParseError> {
        let t = match cur.next() {
            Tok::Nat(n) => TermPattern::Const(Constant::Nat(n)),
            Tok::Ident(s) => self.classify(s),
            other => return Err(cur.error(format!("expected term, found {other}"))),
        };
        if let TermPattern::Var(v) = &t {
            if cur.eat(&Tok::Plus) {
                let k = cur.nat()?;
                return Ok(TermPattern::Offset(v.clone(), k));
            }
        }
        Ok(t)
    }

    pub fn atom(&self, cur: &mut Cursor) -> Result<AtomPattern, ParseError> {
        let pred = cur.ident()?;
        let mut args = Vec::new();
        if cur.eat(&Tok::LParen) {
            loop {
                args.push(self.term(cur)?);
                if cur.eat(&Tok::RParen) {
                    break;
                }
                cur.expect(&Tok::Comma)?;
            }
        }
        Ok(AtomPattern {
            predicate: Symbol::new(&pred),
            args,
        })
    }

    fn cmp_op(tok: &Tok) -> Option<CmpOp> {
        Some(match tok {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return None,
        })
    }

    pub fn constraint(&self, cur: &mut Cursor) -> Result<Constraint, ParseError> {
        let lhs = self.term(cur)?;
        let op = Self::cmp_op(cur.peek())
            .ok_or_else(|| cur.error(format!("expected comparison, found {}", cur.peek())))?;
        cur.next();
        let rhs = self.term(cur)?;
        Ok(Constraint { lhs, op, rhs })
    }

    fn starts_constraint(cur: &Cursor) -> bool {
        match (cur.peek(), cur.peek_at(1)) {
            (Tok::Nat(_), _) => true,
            (Tok::Ident(_), next) => *next == Tok::Plus || Self::cmp_op(next).is_some(),
            _ => false,
        }
    }

    /// `head [:- item, ...] .` where items are literals or comparisons.
    pub fn clause(
        &self,
        cur: &mut Cursor,
        var_types: &VarTypes,
    ) -> Result<SchematicClause, ParseError> {
        let head = self.atom(cur)?;
        let mut body = Vec::new();
        let mut constraints = Vec::new();
        if cur.eat(&Tok::If) {
            loop {
                if Self::starts_constraint(cur) {
                    constraints.push(self.constraint(cur)?);
                } else {
                    let positive = !(matches!(cur.peek(), Tok::Ident(s) if s == "not")
                        && matches!(cur.peek_at(1), Tok::Ident(_)));
                    if !positive {
                        cur.next();
                    }
                    body.push(LiteralPattern {
                        atom: self.atom(cur)?,
                        positive,
                    });
                }
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        cur.expect(&Tok::Dot)?;
        Ok(SchematicClause {
            head,
            body,
            constraints,
            var_types: var_types.clone(),
        })
    }
}

/// Parses schematic clauses (one or more, `.`-terminated) for the given
/// domain and variable typing.
pub fn parse_schematic(
    text: &str,
    domain: &DomainSpec,
    var_types: &VarTypes,
) -> Result<Vec<SchematicClause>, ParseError> {
    let ctx = PatternContext { domain };
    let mut cur = Cursor::new(text, 1)?;
    let mut out = Vec::new();
    while !cur.at_eof() {
        out.push(ctx.clause(&mut cur, var_types)?);
    }
    Ok(out)
}
