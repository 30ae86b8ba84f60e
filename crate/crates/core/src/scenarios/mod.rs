//! Scenario files, the built-in example systems, network topologies and the
//! shortest-path oracle.

mod chain;
mod format;
mod routing;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::agents::{AgentId, AgentSpec, AgentState};
use crate::grounder::{
    ground_clause, ground_pattern, AtomPattern, Constraint, DomainSpec, GroundError,
    SchematicClause, VarTypes,
};
use crate::logic::{Atom, GroundProgram, Interpretation, Symbol};
use crate::runtime::{Event, FamilyPattern, TimedChange};
use crate::system::{build_system, MultiAgentSystem, SystemError};
use crate::ParseError;

pub use chain::{chain_scenario, chain_system};
pub use format::{parse_events_into, parse_scenario};
pub use routing::{
    bfs_oracle, default_routing_dmax, routing_output, routing_scenario, routing_system, Topology,
    TopologyError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("scenario defines no agents")]
    NoAgents,
    #[error("agent {agent}: {source}")]
    Ground { agent: AgentId, source: GroundError },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("integer bound must be at least 1 for routing, got {0}")]
    DmaxTooSmall(u32),
    #[error("no output predicate declared for this scenario")]
    NoOutputDeclared,
    #[error("unknown built-in scenario `{0}`")]
    UnknownBuiltin(String),
}

/// An atom pattern restricted by comparisons, e.g. `sp(A2,Y,D) where Y != A1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternItem {
    pub atom: AtomPattern,
    pub constraints: Vec<Constraint>,
}

impl PatternItem {
    pub fn ground(atom: AtomPattern) -> Self {
        PatternItem {
            atom,
            constraints: Vec::new(),
        }
    }

    fn expand(&self, var_types: &VarTypes, d: &DomainSpec) -> Result<BTreeSet<Atom>, GroundError> {
        ground_pattern(&self.atom, &self.constraints, var_types, d)
    }

    fn has_vars(&self) -> bool {
        !self.atom.is_ground()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentBlock {
    pub id: AgentId,
    pub idb: Vec<SchematicClause>,
    pub hbe: Vec<PatternItem>,
    pub hin: Vec<PatternItem>,
    pub edb: Vec<PatternItem>,
    pub input: Vec<PatternItem>,
}

impl AgentBlock {
    pub fn new(id: &str) -> Self {
        AgentBlock {
            id: AgentId::new(id),
            idb: Vec::new(),
            hbe: Vec::new(),
            hin: Vec::new(),
            edb: Vec::new(),
            input: Vec::new(),
        }
    }
}

/// A parsed scenario: the domain, schematic agents and event lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub domain: DomainSpec,
    pub var_types: VarTypes,
    /// Families watched by the divergence probe.
    pub tracks: Vec<FamilyPattern>,
    /// Output predicates; see [`Scenario::output_projection`].
    pub outputs: BTreeSet<Symbol>,
    pub agents: Vec<AgentBlock>,
    /// Explicit event list, replayed before any fair rounds.
    pub script: Vec<Event>,
    /// Environment changes attached to fair-round boundaries.
    pub timed: Vec<TimedChange>,
}

struct Grounded {
    idb: GroundProgram,
    hbe: BTreeSet<Atom>,
    declared_hin: BTreeSet<Atom>,
    pattern_hin: BTreeSet<Atom>,
    edb: BTreeSet<Atom>,
    input: BTreeSet<Atom>,
}

impl Scenario {
    pub fn with_dmax(mut self, dmax: u32) -> Self {
        self.domain.distance_max = dmax;
        self
    }

    pub fn dmax(&self) -> u32 {
        self.domain.distance_max
    }

    /// Grounds every agent and assembles the system.
    ///
    /// Input atoms written with variables are kept only when some other agent
    /// can produce them, and clauses with a positive body atom the agent can
    /// never hold are dropped; both steps repeat until nothing changes.
    pub fn build(&self) -> Result<MultiAgentSystem, ScenarioError> {
        if self.agents.is_empty() {
            return Err(ScenarioError::NoAgents);
        }
        let d = &self.domain;
        let mut ground = Vec::with_capacity(self.agents.len());
        for b in &self.agents {
            let err = |source| ScenarioError::Ground {
                agent: b.id.clone(),
                source,
            };
            let mut idb = GroundProgram::default();
            for c in &b.idb {
                for g in ground_clause(c, d).map_err(err)? {
                    idb.insert(g);
                }
            }
            let set = |items: &[PatternItem],
                       only_vars: Option<bool>|
             -> Result<BTreeSet<Atom>, ScenarioError> {
                let mut out = BTreeSet::new();
                for it in items
                    .iter()
                    .filter(|it| only_vars.is_none_or(|v| it.has_vars() == v))
                {
                    out.extend(it.expand(&self.var_types, d).map_err(err)?);
                }
                Ok(out)
            };
            ground.push(Grounded {
                hbe: set(&b.hbe, None)?,
                declared_hin: set(&b.hin, Some(false))?,
                pattern_hin: set(&b.hin, Some(true))?,
                edb: set(&b.edb, None)?,
                input: set(&b.input, None)?,
                idb,
            });
        }
        let hins = prune(&mut ground);
        let specs = self
            .agents
            .iter()
            .zip(ground)
            .zip(hins)
            .map(|((b, g), hin)| {
                AgentSpec::new(
                    b.id.clone(),
                    g.idb,
                    g.hbe,
                    hin,
                    AgentState::new(g.edb, g.input),
                )
            })
            .collect();
        let mut sys = build_system(specs)?;
        sys.dmax = Some(d.distance_max);
        Ok(sys)
    }

    /// Model atoms with a declared output predicate whose first argument is
    /// the agent's own id (all atoms of nullary output predicates).
    pub fn output_projection(
        &self,
        agent: &AgentId,
        model: &Interpretation,
    ) -> Result<BTreeSet<Atom>, ScenarioError> {
        if self.outputs.is_empty() {
            return Err(ScenarioError::NoOutputDeclared);
        }
        Ok(model
            .iter()
            .filter(|a| self.outputs.contains(&a.predicate))
            .filter(|a| {
                a.args
                    .first()
                    .is_none_or(|c| c.to_string() == agent.as_str())
            })
            .cloned()
            .collect())
    }
}

/// Returns each agent's HIN after iterated pruning.
fn prune(ground: &mut [Grounded]) -> Vec<BTreeSet<Atom>> {
    loop {
        let produced: Vec<BTreeSet<Atom>> = ground
            .iter()
            .map(|g| {
                g.idb
                    .heads()
                    .into_iter()
                    .chain(g.hbe.iter().cloned())
                    .collect()
            })
            .collect();
        let hins: Vec<BTreeSet<Atom>> = (0..ground.len())
            .map(|i| {
                let by_others =
                    |a: &Atom| (0..ground.len()).any(|j| j != i && produced[j].contains(a));
                let mut hin = ground[i].declared_hin.clone();
                hin.extend(
                    ground[i]
                        .pattern_hin
                        .iter()
                        .filter(|a| by_others(a))
                        .cloned(),
                );
                hin
            })
            .collect();
        let mut changed = false;
        for (i, g) in ground.iter_mut().enumerate() {
            let known = |a: &Atom| produced[i].contains(a) || hins[i].contains(a);
            let kept: Vec<_> = g
                .idb
                .clauses()
                .filter(|c| c.positive_body().all(known))
                .cloned()
                .collect();
            if kept.len() != g.idb.len() {
                changed = true;
                g.idb = GroundProgram::new(kept);
            }
        }
        if !changed {
            return hins;
        }
    }
}

const EXAMPLE3: &str = include_str!("../../scenarios/example3.scenario");
const ROUTING5: &str = include_str!("../../scenarios/routing5.scenario");
const ROUTING5_EXAMPLE6: &str = include_str!("../../scenarios/routing5-example6-script.scenario");

/// Names accepted by [`builtin`]; `chain(N)` takes any natural `N`.
pub const BUILTIN_NAMES: &[&str] = &[
    "example3",
    "routing5",
    "routing5-example6-script",
    "chain(N)",
];

pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    let text = match name {
        "example3" => EXAMPLE3,
        "routing5" => ROUTING5,
        "routing5-example6-script" => ROUTING5_EXAMPLE6,
        _ => {
            let n = name
                .strip_prefix("chain(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.parse::<u32>().ok())
                .ok_or_else(|| ScenarioError::UnknownBuiltin(name.to_string()))?;
            return Ok(chain_scenario(n));
        }
    };
    parse_scenario(text)
}
