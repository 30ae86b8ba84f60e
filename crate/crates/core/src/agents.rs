//! Agents `(IDB, HBE, HIN, δ)`, their states `(EDB, IN)`, and the two update
//! operators applied on communication and on environment change.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{AcyclicEvaluator, Atom, GroundProgram, Interpretation, LogicError, Symbol};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(s: &str) -> Self {
        AgentId(s.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

impl From<&Symbol> for AgentId {
    fn from(s: &Symbol) -> Self {
        AgentId::new(s.as_str())
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `σ = (EDB, IN)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub edb: BTreeSet<Atom>,
    pub input: BTreeSet<Atom>,
}

impl AgentState {
    pub fn new(edb: impl IntoIterator<Item = Atom>, input: impl IntoIterator<Item = Atom>) -> Self {
        AgentState {
            edb: edb.into_iter().collect(),
            input: input.into_iter().collect(),
        }
    }
}

/// An environment change `C = (T, F)`: atoms that became true and atoms that
/// became false.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EnvChange {
    became_true: BTreeSet<Atom>,
    became_false: BTreeSet<Atom>,
}

impl EnvChange {
    pub fn new(
        became_true: impl IntoIterator<Item = Atom>,
        became_false: impl IntoIterator<Item = Atom>,
    ) -> Result<Self, AgentError> {
        let c = EnvChange {
            became_true: became_true.into_iter().collect(),
            became_false: became_false.into_iter().collect(),
        };
        let both: BTreeSet<Atom> = c
            .became_true
            .intersection(&c.became_false)
            .cloned()
            .collect();
        if !both.is_empty() {
            return Err(AgentError::ContradictoryChange(both));
        }
        Ok(c)
    }

    pub fn fail(atoms: impl IntoIterator<Item = Atom>) -> Self {
        EnvChange {
            became_true: BTreeSet::new(),
            became_false: atoms.into_iter().collect(),
        }
    }

    pub fn restore(atoms: impl IntoIterator<Item = Atom>) -> Self {
        EnvChange {
            became_true: atoms.into_iter().collect(),
            became_false: BTreeSet::new(),
        }
    }

    pub fn became_true(&self) -> &BTreeSet<Atom> {
        &self.became_true
    }

    pub fn became_false(&self) -> &BTreeSet<Atom> {
        &self.became_false
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.became_true.iter().chain(&self.became_false)
    }

    pub fn is_empty(&self) -> bool {
        self.became_true.is_empty() && self.became_false.is_empty()
    }

    /// Whether an agent sensing `hbe` observes any part of this change.
    pub fn touches(&self, hbe: &BTreeSet<Atom>) -> bool {
        self.atoms().any(|a| hbe.contains(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("agent {0}: rule base is cyclic")]
    CyclicIdb(AgentId),
    #[error("agent {agent}: state atom {atom} outside HBE/HIN")]
    StateOutsideVocabulary { agent: AgentId, atom: Atom },
    #[error("payload {0:?} not contained in the dependency")]
    PayloadOutsideDependency(BTreeSet<Atom>),
    #[error("atoms {0:?} both became true and false")]
    ContradictoryChange(BTreeSet<Atom>),
}

/// A breach of an agent or system well-formedness condition. Validation
/// collects all of them rather than stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    CyclicIdb {
        agent: AgentId,
    },
    InputEnvironmentOverlap {
        agent: AgentId,
        atom: Atom,
    },
    HeadIsInput {
        agent: AgentId,
        atom: Atom,
    },
    HeadIsEnvironment {
        agent: AgentId,
        atom: Atom,
    },
    EdbOutsideHbe {
        agent: AgentId,
        atom: Atom,
    },
    InputOutsideHin {
        agent: AgentId,
        atom: Atom,
    },
    DuplicateAgent {
        agent: AgentId,
    },
    SharedDefinitionMismatch {
        atom: Atom,
        first: AgentId,
        second: AgentId,
    },
    UncoveredInput {
        agent: AgentId,
        atom: Atom,
    },
    EnvironmentDefined {
        atom: Atom,
        sensed_by: AgentId,
        defined_by: AgentId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CyclicIdb { agent } => write!(f, "agent {agent}: IDB is not acyclic"),
            Violation::InputEnvironmentOverlap { agent, atom } => {
                write!(
                    f,
                    "agent {agent}: {atom} is both an input and an environment atom"
                )
            }
            Violation::HeadIsInput { agent, atom } => {
                write!(f, "agent {agent}: input atom {atom} heads a clause")
            }
            Violation::HeadIsEnvironment { agent, atom } => {
                write!(f, "agent {agent}: environment atom {atom} heads a clause")
            }
            Violation::EdbOutsideHbe { agent, atom } => {
                write!(f, "agent {agent}: initial EDB atom {atom} not in HBE")
            }
            Violation::InputOutsideHin { agent, atom } => {
                write!(f, "agent {agent}: initial IN atom {atom} not in HIN")
            }
            Violation::DuplicateAgent { agent } => write!(f, "duplicate agent id {agent}"),
            Violation::SharedDefinitionMismatch {
                atom,
                first,
                second,
            } => {
                write!(f, "{atom} is defined differently by {first} and {second}")
            }
            Violation::UncoveredInput { agent, atom } => {
                write!(
                    f,
                    "agent {agent}: input {atom} is produced or sensed by no agent"
                )
            }
            Violation::EnvironmentDefined {
                atom,
                sensed_by,
                defined_by,
            } => write!(
                f,
                "environment atom {atom} (sensed by {sensed_by}) heads a clause of {defined_by}"
            ),
        }
    }
}

/// `A = (IDB, HBE, HIN, δ)`.
#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub id: AgentId,
    pub idb: GroundProgram,
    pub hbe: BTreeSet<Atom>,
    pub hin: BTreeSet<Atom>,
    pub initial: AgentState,
    heads: BTreeSet<Atom>,
    evaluator: OnceLock<Result<Arc<AcyclicEvaluator>, LogicError>>,
}

impl PartialEq for AgentSpec {
    fn eq(&self, o: &Self) -> bool {
        self.id == o.id
            && self.idb == o.idb
            && self.hbe == o.hbe
            && self.hin == o.hin
            && self.initial == o.initial
    }
}

impl AgentSpec {
    pub fn new(
        id: impl Into<AgentId>,
        idb: GroundProgram,
        hbe: impl IntoIterator<Item = Atom>,
        hin: impl IntoIterator<Item = Atom>,
        initial: AgentState,
    ) -> Self {
        let heads = idb.heads();
        AgentSpec {
            id: id.into(),
            idb,
            hbe: hbe.into_iter().collect(),
            hin: hin.into_iter().collect(),
            initial,
            heads,
            evaluator: OnceLock::new(),
        }
    }

    pub fn heads(&self) -> &BTreeSet<Atom> {
        &self.heads
    }

    /// `HB_i = head(IDB_i) ∪ HBE_i ∪ HIN_i`.
    pub fn vocabulary(&self) -> BTreeSet<Atom> {
        self.heads
            .iter()
            .chain(&self.hbe)
            .chain(&self.hin)
            .cloned()
            .collect()
    }

    pub fn in_vocabulary(&self, a: &Atom) -> bool {
        self.heads.contains(a) || self.hbe.contains(a) || self.hin.contains(a)
    }

    /// Atoms an agent can make available to others: its heads and sensed atoms.
    pub fn produces(&self, a: &Atom) -> bool {
        self.heads.contains(a) || self.hbe.contains(a)
    }

    pub fn universe(&self) -> BTreeSet<Atom> {
        self.idb
            .universe()
            .iter()
            .chain(&self.hbe)
            .chain(&self.hin)
            .cloned()
            .collect()
    }

    fn evaluator(&self) -> Result<&AcyclicEvaluator, AgentError> {
        self.evaluator
            .get_or_init(|| AcyclicEvaluator::new(&self.idb).map(Arc::new))
            .as_deref()
            .map_err(|_| AgentError::CyclicIdb(self.id.clone()))
    }

    pub fn check_state(&self, s: &AgentState) -> Result<(), AgentError> {
        let bad = s
            .edb
            .iter()
            .find(|a| !self.hbe.contains(*a))
            .or_else(|| s.input.iter().find(|a| !self.hin.contains(*a)));
        match bad {
            Some(atom) => Err(AgentError::StateOutsideVocabulary {
                agent: self.id.clone(),
                atom: atom.clone(),
            }),
            None => Ok(()),
        }
    }
}

pub fn validate_agent(a: &AgentSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if !crate::logic::dependency_graph(&a.idb).is_acyclic() {
        out.push(Violation::CyclicIdb {
            agent: a.id.clone(),
        });
    }
    for atom in a.hin.intersection(&a.hbe) {
        out.push(Violation::InputEnvironmentOverlap {
            agent: a.id.clone(),
            atom: atom.clone(),
        });
    }
    for atom in a.heads.intersection(&a.hin) {
        out.push(Violation::HeadIsInput {
            agent: a.id.clone(),
            atom: atom.clone(),
        });
    }
    for atom in a.heads.intersection(&a.hbe) {
        out.push(Violation::HeadIsEnvironment {
            agent: a.id.clone(),
            atom: atom.clone(),
        });
    }
    for atom in a.initial.edb.difference(&a.hbe) {
        out.push(Violation::EdbOutsideHbe {
            agent: a.id.clone(),
            atom: atom.clone(),
        });
    }
    for atom in a.initial.input.difference(&a.hin) {
        out.push(Violation::InputOutsideHin {
            agent: a.id.clone(),
            atom: atom.clone(),
        });
    }
    out
}

/// Stable model of `IDB ∪ EDB ∪ IN`.
pub fn agent_model(a: &AgentSpec, s: &AgentState) -> Result<Interpretation, AgentError> {
    a.check_state(s)?;
    Ok(a.evaluator()?.evaluate(s.edb.iter().chain(&s.input)))
}

/// `D(i,j) = HIN_i ∩ (head(IDB_j) ∪ HBE_j)`.
pub fn dependency(receiver: &AgentSpec, sender: &AgentSpec) -> BTreeSet<Atom> {
    receiver
        .hin
        .iter()
        .filter(|a| sender.produces(a))
        .cloned()
        .collect()
}

/// `S = D(i,j) ∩ M_j`.
pub fn message_payload(sender_model: &Interpretation, dep: &BTreeSet<Atom>) -> BTreeSet<Atom> {
    dep.iter()
        .filter(|a| sender_model.contains(a))
        .cloned()
        .collect()
}

/// `Upa_{i,j}(IN, S) = (IN \ D(i,j)) ∪ S`. Atoms of the dependency missing
/// from the payload are thereby retracted.
pub fn update_input(
    input: &BTreeSet<Atom>,
    dep: &BTreeSet<Atom>,
    payload: &BTreeSet<Atom>,
) -> Result<BTreeSet<Atom>, AgentError> {
    let stray: BTreeSet<Atom> = payload.difference(dep).cloned().collect();
    if !stray.is_empty() {
        return Err(AgentError::PayloadOutsideDependency(stray));
    }
    Ok(input.difference(dep).chain(payload).cloned().collect())
}

/// `Upe_i(EDB, C) = (EDB \ F_i) ∪ T_i` with `T_i = T ∩ HBE`, `F_i = F ∩ HBE`.
pub fn update_env(edb: &BTreeSet<Atom>, c: &EnvChange, hbe: &BTreeSet<Atom>) -> BTreeSet<Atom> {
    edb.iter()
        .filter(|a| !(c.became_false.contains(*a) && hbe.contains(*a)))
        .chain(c.became_true.iter().filter(|a| hbe.contains(*a)))
        .cloned()
        .collect()
}
