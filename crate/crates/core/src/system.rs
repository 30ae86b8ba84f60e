//! Multiagent system assembly, the superagent, the I/O graph and the
//! IO-acyclic / bounded / IO-finite classification.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::agents::{validate_agent, AgentId, AgentSpec, Violation};
use crate::logic::{
    dependency_graph, least_model, stable_model_acyclic, stable_models_bruteforce, Atom,
    DependencyGraph, GroundProgram, Interpretation, DEFAULT_BRUTEFORCE_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("invalid system: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("superagent program is cyclic and has {models} stable models in this environment")]
    NoUniqueModel { models: usize },
    #[error(
        "superagent program is cyclic and its universe ({size} atoms) is too large to enumerate"
    )]
    NoUniqueModelGuarantee { size: usize },
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
}

/// Pair `(receiver, sender)` with nonempty dependency `D(receiver, sender)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    pub receiver: usize,
    pub sender: usize,
    pub atoms: BTreeSet<Atom>,
}

#[derive(Debug, Clone)]
pub struct MultiAgentSystem {
    agents: Vec<AgentSpec>,
    index: BTreeMap<AgentId, usize>,
    env_atoms: BTreeSet<Atom>,
    dependencies: Vec<Dependency>,
    /// Integer-domain bound the system was grounded at, when applicable.
    pub dmax: Option<u32>,
}

impl MultiAgentSystem {
    /// Agents sorted by id.
    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn agent(&self, id: &AgentId) -> Option<&AgentSpec> {
        self.index.get(id).map(|&i| &self.agents[i])
    }

    pub fn position(&self, id: &AgentId) -> Result<usize, SystemError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| SystemError::UnknownAgent(id.clone()))
    }

    /// `∪ HBE_i`.
    pub fn env_atoms(&self) -> &BTreeSet<Atom> {
        &self.env_atoms
    }

    pub fn input_atoms(&self) -> BTreeSet<Atom> {
        self.agents
            .iter()
            .flat_map(|a| a.hin.iter().cloned())
            .collect()
    }

    /// Dependent pairs in canonical order (receiver index, then sender index).
    pub fn dependencies(&self) -> &[Dependency] {
        &self.dependencies
    }

    pub fn dependency_between(&self, receiver: usize, sender: usize) -> Option<&Dependency> {
        self.dependencies
            .iter()
            .find(|d| d.receiver == receiver && d.sender == sender)
    }
}

pub fn build_system(specs: Vec<AgentSpec>) -> Result<MultiAgentSystem, SystemError> {
    let mut violations: Vec<Violation> = Vec::new();
    let mut agents = specs;
    agents.sort_by(|a, b| a.id.cmp(&b.id));
    for w in agents.windows(2) {
        if w[0].id == w[1].id {
            violations.push(Violation::DuplicateAgent {
                agent: w[0].id.clone(),
            });
        }
    }
    for a in &agents {
        violations.extend(validate_agent(a));
    }
    for (i, a) in agents.iter().enumerate() {
        for b in &agents[i + 1..] {
            for atom in a.heads().intersection(b.heads()) {
                if a.idb.definition(atom) != b.idb.definition(atom) {
                    violations.push(Violation::SharedDefinitionMismatch {
                        atom: atom.clone(),
                        first: a.id.clone(),
                        second: b.id.clone(),
                    });
                }
            }
        }
    }
    for a in &agents {
        for atom in &a.hin {
            if !agents.iter().any(|b| b.produces(atom)) {
                violations.push(Violation::UncoveredInput {
                    agent: a.id.clone(),
                    atom: atom.clone(),
                });
            }
        }
    }
    for a in &agents {
        for b in &agents {
            if a.id == b.id {
                // Reported by validate_agent.
                continue;
            }
            for atom in a.hbe.intersection(b.heads()) {
                violations.push(Violation::EnvironmentDefined {
                    atom: atom.clone(),
                    sensed_by: a.id.clone(),
                    defined_by: b.id.clone(),
                });
            }
        }
    }
    if !violations.is_empty() {
        violations.sort();
        violations.dedup();
        return Err(SystemError::Invalid(violations));
    }
    let index = agents
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.clone(), i))
        .collect();
    let env_atoms = agents.iter().flat_map(|a| a.hbe.iter().cloned()).collect();
    let mut dependencies = Vec::new();
    for (r, recv) in agents.iter().enumerate() {
        for (s, send) in agents.iter().enumerate() {
            if r == s {
                continue;
            }
            let atoms = crate::agents::dependency(recv, send);
            if !atoms.is_empty() {
                dependencies.push(Dependency {
                    receiver: r,
                    sender: s,
                    atoms,
                });
            }
        }
    }
    Ok(MultiAgentSystem {
        agents,
        index,
        env_atoms,
        dependencies,
        dmax: None,
    })
}

/// `P_A = (IDB_A, δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperAgent {
    pub idb_all: GroundProgram,
    pub initial_edb: BTreeSet<Atom>,
}

pub fn superagent(sys: &MultiAgentSystem) -> SuperAgent {
    let mut idb_all = GroundProgram::default();
    for a in &sys.agents {
        idb_all = idb_all.union(&a.idb);
    }
    let initial_edb = sys
        .agents
        .iter()
        .flat_map(|a| a.initial.edb.iter().cloned())
        .collect();
    SuperAgent {
        idb_all,
        initial_edb,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    /// Unique model of an acyclic program.
    Acyclic,
    /// Cyclic but negation-free: the least model is the only stable model.
    LeastModel,
    /// Cyclic with negation: exhaustive enumeration found exactly one model.
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceModel {
    pub model: Interpretation,
    pub method: ReferenceMethod,
}

/// Stable model of `IDB_A ∪ EDB`.
pub fn superagent_model(
    sa: &SuperAgent,
    stabilized_edb: &BTreeSet<Atom>,
) -> Result<ReferenceModel, SystemError> {
    let p = sa.idb_all.with_facts(stabilized_edb);
    if let Ok(model) = stable_model_acyclic(&p) {
        return Ok(ReferenceModel {
            model,
            method: ReferenceMethod::Acyclic,
        });
    }
    if p.is_negation_free() {
        let model = least_model(&p).expect("negation-free");
        return Ok(ReferenceModel {
            model,
            method: ReferenceMethod::LeastModel,
        });
    }
    match stable_models_bruteforce(&p, DEFAULT_BRUTEFORCE_CAP) {
        Ok(mut models) if models.len() == 1 => Ok(ReferenceModel {
            model: models.remove(0),
            method: ReferenceMethod::BruteForce,
        }),
        Ok(models) => Err(SystemError::NoUniqueModel {
            models: models.len(),
        }),
        Err(_) => Err(SystemError::NoUniqueModelGuarantee {
            size: p.universe().len(),
        }),
    }
}

/// The superagent's dependency graph restricted to the input atoms and every
/// atom relevant to one of them.
#[derive(Debug, Clone)]
pub struct IoGraph {
    pub graph: DependencyGraph,
}

impl IoGraph {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn is_acyclic(&self) -> bool {
        self.graph.is_acyclic()
    }
}

pub fn io_graph(sys: &MultiAgentSystem) -> IoGraph {
    let full = dependency_graph(&superagent(sys).idb_all);
    let inputs = sys.input_atoms();
    let mut keep = full.closure_from(inputs.iter());
    keep.extend(inputs);
    IoGraph {
        graph: full.restrict(&keep),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "basis", rename_all = "kebab-case")]
pub enum FinitenessBasis {
    /// A single ground instance is always finite; nothing was probed.
    SingleGrounding,
    /// Ground at `dmax` and `probe_dmax`; growth of the I/O graph means the
    /// unbounded system is (empirically) not IO-finite.
    Empirical {
        dmax: u32,
        probe_dmax: u32,
        nodes: usize,
        probe_nodes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub io_acyclic: bool,
    pub bounded: bool,
    pub io_finite: bool,
    pub idb_acyclic: bool,
    pub io_finite_basis: FinitenessBasis,
}

impl Classification {
    /// IO-acyclic systems have an acyclic combined rule base.
    pub fn io_acyclicity_implies_idb_acyclicity(&self) -> bool {
        !self.io_acyclic || self.idb_acyclic
    }
}

/// Classifies `sys`. `probe` is the same system grounded at a larger integer
/// bound; without it `io_finite` is vacuously true.
pub fn classify(sys: &MultiAgentSystem, probe: Option<&MultiAgentSystem>) -> Classification {
    let io = io_graph(sys);
    let idb_acyclic = dependency_graph(&superagent(sys).idb_all).is_acyclic();
    let (io_finite, io_finite_basis) = match probe {
        None => (true, FinitenessBasis::SingleGrounding),
        Some(p) => {
            let probe_nodes = io_graph(p).node_count();
            let nodes = io.node_count();
            (
                probe_nodes <= nodes,
                FinitenessBasis::Empirical {
                    dmax: sys.dmax.unwrap_or(0),
                    probe_dmax: p.dmax.unwrap_or(0),
                    nodes,
                    probe_nodes,
                },
            )
        }
    };
    Classification {
        io_acyclic: io.is_acyclic(),
        // Every atom of a ground instance has a finite definition.
        bounded: true,
        io_finite,
        idb_acyclic,
        io_finite_basis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::AgentState;
    use crate::logic::parse_program;

    fn atoms(xs: &[&str]) -> BTreeSet<Atom> {
        xs.iter().map(|s| Atom::parse(s)).collect()
    }

    fn example3() -> MultiAgentSystem {
        let a1 = AgentSpec::new(
            "A1",
            parse_program("a :- b, c. f :- a.").unwrap(),
            atoms(&["c"]),
            atoms(&["b"]),
            AgentState::new(atoms(&["c"]), []),
        );
        let a2 = AgentSpec::new(
            "A2",
            parse_program("b :- a, d. b :- e.").unwrap(),
            atoms(&["d", "e"]),
            atoms(&["a"]),
            AgentState::new(atoms(&["d", "e"]), []),
        );
        build_system(vec![a2, a1]).unwrap()
    }

    #[test]
    fn example3_builds_and_orders_agents() {
        let sys = example3();
        assert_eq!(sys.agents()[0].id.as_str(), "A1");
        assert_eq!(sys.dependencies().len(), 2);
        assert_eq!(sys.env_atoms(), &atoms(&["c", "d", "e"]));
    }

    #[test]
    fn shared_definition_mismatch_is_reported() {
        let a = AgentSpec::new(
            "A",
            parse_program("x :- y.").unwrap(),
            atoms(&["y"]),
            [],
            AgentState::default(),
        );
        let b = AgentSpec::new(
            "B",
            parse_program("x.").unwrap(),
            [],
            [],
            AgentState::default(),
        );
        let err = build_system(vec![a, b]).unwrap_err();
        let SystemError::Invalid(v) = err else {
            panic!()
        };
        assert!(matches!(v[0], Violation::SharedDefinitionMismatch { .. }));
    }

    #[test]
    fn uncovered_input_and_duplicate_ids() {
        let a = AgentSpec::new(
            "A",
            parse_program("x :- y.").unwrap(),
            [],
            atoms(&["y"]),
            AgentState::default(),
        );
        let a2 = AgentSpec::new("A", GroundProgram::default(), [], [], AgentState::default());
        let SystemError::Invalid(v) = build_system(vec![a, a2]).unwrap_err() else {
            panic!()
        };
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::UncoveredInput { .. })));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DuplicateAgent { .. })));
    }

    #[test]
    fn environment_atom_defined_elsewhere() {
        let a = AgentSpec::new(
            "A",
            GroundProgram::default(),
            atoms(&["e"]),
            [],
            AgentState::default(),
        );
        let b = AgentSpec::new(
            "B",
            parse_program("e.").unwrap(),
            [],
            [],
            AgentState::default(),
        );
        let SystemError::Invalid(v) = build_system(vec![a, b]).unwrap_err() else {
            panic!()
        };
        assert!(matches!(v[0], Violation::EnvironmentDefined { .. }));
    }

    #[test]
    fn example3_superagent() {
        let sa = superagent(&example3());
        assert_eq!(
            sa.idb_all.clause_set(),
            parse_program("a :- b, c. f :- a. b :- a, d. b :- e.")
                .unwrap()
                .clause_set()
        );
        assert_eq!(sa.initial_edb, atoms(&["c", "d", "e"]));
        let r = superagent_model(&sa, &atoms(&["c", "d"])).unwrap();
        assert_eq!(r.model, Interpretation::new(atoms(&["c", "d"])));
        assert_eq!(r.method, ReferenceMethod::LeastModel);
    }

    #[test]
    fn cyclic_superagent_with_negation_falls_back_to_enumeration() {
        let sa = SuperAgent {
            idb_all: parse_program("a :- not b. b :- not a.").unwrap(),
            initial_edb: BTreeSet::new(),
        };
        assert_eq!(
            superagent_model(&sa, &BTreeSet::new()),
            Err(SystemError::NoUniqueModel { models: 2 })
        );
        let sa = SuperAgent {
            idb_all: parse_program("a :- not b, c. b :- not a.").unwrap(),
            initial_edb: BTreeSet::new(),
        };
        let r = superagent_model(&sa, &BTreeSet::new()).unwrap();
        assert_eq!(r.method, ReferenceMethod::BruteForce);
        assert_eq!(r.model, Interpretation::new(atoms(&["b"])));
    }

    #[test]
    fn example3_io_graph_drops_f() {
        let io = io_graph(&example3());
        assert_eq!(
            io.graph.nodes().iter().cloned().collect::<BTreeSet<_>>(),
            atoms(&["a", "b", "c", "d", "e"])
        );
        assert_eq!(io.edge_count(), 6 - 1);
    }

    #[test]
    fn example3_classification() {
        let c = classify(&example3(), None);
        assert!(!c.io_acyclic);
        assert!(c.bounded);
        assert!(!c.idb_acyclic);
        assert!(c.io_acyclicity_implies_idb_acyclicity());
    }

    #[test]
    fn no_inputs_means_empty_io_graph() {
        let a = AgentSpec::new(
            "A",
            parse_program("x :- y.").unwrap(),
            atoms(&["y"]),
            [],
            AgentState::default(),
        );
        let sys = build_system(vec![a]).unwrap();
        assert_eq!(io_graph(&sys).node_count(), 0);
        let sa = superagent(&sys);
        assert_eq!(sa.idb_all, sys.agents()[0].idb);
    }
}
