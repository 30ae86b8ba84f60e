//! Distance-vector routing agents over an undirected network.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use super::format::const_pattern;
use super::{AgentBlock, PatternItem, Scenario, ScenarioError};
use crate::agents::AgentId;
use crate::grounder::{
    parse_schematic, CmpOp, Constraint, DomainSpec, TermPattern, VarType, VarTypes,
};
use crate::logic::{Atom, Constant, Interpretation, Symbol};
use crate::system::MultiAgentSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("self-loop at {0}")]
    SelfLoop(Symbol),
    #[error("edge mentions unknown node {0}")]
    UnknownNode(Symbol),
    #[error("node {0} listed twice")]
    DuplicateNode(Symbol),
}

/// Undirected graph; each edge is stored once with its endpoints sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    nodes: Vec<Symbol>,
    edges: BTreeSet<(Symbol, Symbol)>,
}

fn edge(a: &Symbol, b: &Symbol) -> (Symbol, Symbol) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl Topology {
    pub fn new(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self, TopologyError> {
        let mut syms: Vec<Symbol> = Vec::new();
        for n in nodes {
            let s = Symbol::new(n);
            if syms.contains(&s) {
                return Err(TopologyError::DuplicateNode(s));
            }
            syms.push(s);
        }
        syms.sort();
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (a, b) = (Symbol::new(a), Symbol::new(b));
            for n in [&a, &b] {
                if !syms.contains(n) {
                    return Err(TopologyError::UnknownNode(n.clone()));
                }
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            set.insert(edge(&a, &b));
        }
        Ok(Topology {
            nodes: syms,
            edges: set,
        })
    }

    /// The five-node network A1-A2, A1-A4, A2-A3, A2-A5, A3-A5, A4-A5.
    pub fn five_node() -> Self {
        Topology::new(
            &["A1", "A2", "A3", "A4", "A5"],
            &[
                ("A1", "A2"),
                ("A1", "A4"),
                ("A2", "A3"),
                ("A2", "A5"),
                ("A3", "A5"),
                ("A4", "A5"),
            ],
        )
        .expect("valid topology")
    }

    pub fn nodes(&self) -> &[Symbol] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(Symbol, Symbol)> {
        &self.edges
    }

    pub fn neighbors(&self, n: &Symbol) -> Vec<Symbol> {
        self.edges
            .iter()
            .filter_map(|(a, b)| {
                if a == n {
                    Some(b.clone())
                } else if b == n {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn link_atom(a: &Symbol, b: &Symbol) -> Atom {
        let (a, b) = edge(a, b);
        Atom::new("link", vec![Constant::Sym(a), Constant::Sym(b)])
    }
}

/// Node count plus one.
pub fn default_routing_dmax(t: &Topology) -> u32 {
    t.nodes.len() as u32 + 1
}

fn routing_clauses(me: &str) -> String {
    format!(
        "sp({me},{me},0).
         sp({me},Y,D) :- spt({me},Y,X,D).
         spt({me},Y,X,D+1) :- link({me},X), sp(X,Y,D), not spl({me},Y,D+1).
         spl({me},{me},D+1).
         spl({me},Y,D+1) :- link({me},X), sp(X,Y,E), E < D."
    )
}

/// Scenario form of [`routing_system`], with every link intact.
pub fn routing_scenario(t: &Topology, dmax: u32) -> Result<Scenario, ScenarioError> {
    if dmax < 1 {
        return Err(ScenarioError::DmaxTooSmall(dmax));
    }
    let names: Vec<&str> = t.nodes.iter().map(Symbol::as_str).collect();
    let domain = DomainSpec::new(&names, dmax).with_symmetric("link");
    let var_types: VarTypes = [
        ("X", VarType::Node),
        ("Y", VarType::Node),
        ("D", VarType::Dist),
        ("E", VarType::Dist),
    ]
    .into_iter()
    .map(|(v, ty)| (v.to_string(), ty))
    .collect();
    let mut agents = Vec::new();
    for n in &t.nodes {
        let mut b = AgentBlock::new(n.as_str());
        b.idb = parse_schematic(&routing_clauses(n.as_str()), &domain, &var_types)
            .expect("routing clauses parse");
        for m in t.neighbors(n) {
            let link = PatternItem::ground(const_pattern(&Topology::link_atom(n, &m)));
            b.hbe.push(link.clone());
            b.edb.push(link);
            let sp = crate::grounder::AtomPattern {
                predicate: Symbol::new("sp"),
                args: vec![
                    TermPattern::Const(Constant::Sym(m.clone())),
                    TermPattern::Var("Y".into()),
                    TermPattern::Var("D".into()),
                ],
            };
            b.hin.push(PatternItem {
                atom: sp,
                constraints: vec![Constraint {
                    lhs: TermPattern::Var("Y".into()),
                    op: CmpOp::Ne,
                    rhs: TermPattern::Const(Constant::Sym(n.clone())),
                }],
            });
        }
        agents.push(b);
    }
    Ok(Scenario {
        domain,
        var_types,
        outputs: [Symbol::new("sp")].into_iter().collect(),
        agents,
        ..Scenario::default()
    })
}

/// One routing agent per node: `HBE_i` holds the incident links, `HIN_i` the
/// neighbours' `sp` atoms for destinations other than `i`.
pub fn routing_system(t: &Topology, dmax: u32) -> Result<MultiAgentSystem, ScenarioError> {
    routing_scenario(t, dmax)?.build()
}

/// `SP_{i,k}`: the agent's own `sp(i,·,·)` atoms.
pub fn routing_output(agent: &AgentId, model: &Interpretation) -> BTreeSet<Atom> {
    model
        .iter()
        .filter(|a| {
            a.predicate.as_str() == "sp"
                && a.args
                    .first()
                    .is_some_and(|c| c.to_string() == agent.as_str())
        })
        .cloned()
        .collect()
}

/// All-pairs hop counts on the graph without `failed` links; unreachable
/// pairs are absent.
pub fn bfs_oracle(t: &Topology, failed: &[(&str, &str)]) -> BTreeMap<(Symbol, Symbol), u32> {
    let down: BTreeSet<(Symbol, Symbol)> = failed
        .iter()
        .map(|(a, b)| edge(&Symbol::new(a), &Symbol::new(b)))
        .collect();
    let mut out = BTreeMap::new();
    for src in &t.nodes {
        let mut dist: BTreeMap<Symbol, u32> = BTreeMap::new();
        dist.insert(src.clone(), 0);
        let mut queue = VecDeque::from([src.clone()]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for v in t.neighbors(&u) {
                if down.contains(&edge(&u, &v)) || dist.contains_key(&v) {
                    continue;
                }
                dist.insert(v.clone(), du + 1);
                queue.push_back(v);
            }
        }
        for (dst, d) in dist {
            out.insert((src.clone(), dst), d);
        }
    }
    out
}
