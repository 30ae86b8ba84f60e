//! Runs of a multiagent system: environment and communication transitions,
//! scripted and fair schedules, and the analyses evaluated on finite prefixes.

mod analysis;
mod export;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{
    agent_model, message_payload, update_env, update_input, AgentError, AgentId, AgentState,
    EnvChange,
};
use crate::logic::{Atom, Interpretation};
use crate::system::{io_graph, MultiAgentSystem, SystemError};

pub use analysis::{
    convergence_model, detect_fixpoint, divergence_probe, rounds_to_fixpoint,
    stabilized_environment, verdict, ConvergenceModel, DivergenceReport, FamilyPattern, RunStatus,
    Verdict, DEFAULT_DIVERGENCE_STREAK,
};
pub use export::{read_trace, replay, write_trace, RecordedTrace, RunMeta, TraceFileError};

/// `Δ = (σ_1, …, σ_n)`, indexed like [`MultiAgentSystem::agents`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalState(Vec<Arc<AgentState>>);

impl GlobalState {
    pub fn initial(sys: &MultiAgentSystem) -> Self {
        GlobalState(
            sys.agents()
                .iter()
                .map(|a| Arc::new(a.initial.clone()))
                .collect(),
        )
    }

    pub fn agent(&self, i: usize) -> &AgentState {
        &self.0[i]
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentState> {
        self.0.iter().map(|s| &**s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Event {
    Env(EnvChange),
    /// `sender ⇝ receiver`.
    Comm {
        sender: AgentId,
        receiver: AgentId,
    },
}

impl Event {
    pub fn send(sender: &str, receiver: &str) -> Self {
        Event::Comm {
            sender: sender.into(),
            receiver: receiver.into(),
        }
    }

    pub fn is_env(&self) -> bool {
        matches!(self, Event::Env(_))
    }
}

/// Same syntax as scenario event lines.
impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |s: &BTreeSet<Atom>| {
            s.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Event::Comm { sender, receiver } => write!(f, "send {sender} -> {receiver}"),
            Event::Env(c) => match (c.became_true().is_empty(), c.became_false().is_empty()) {
                (true, true) => f.write_str("fail"),
                (false, true) => write!(f, "restore {}", list(c.became_true())),
                (true, false) => write!(f, "fail {}", list(c.became_false())),
                (false, false) => write!(
                    f,
                    "restore {} fail {}",
                    list(c.became_true()),
                    list(c.became_false())
                ),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("environment change mentions {0}, which no agent senses")]
    UnknownEnvAtom(Atom),
    #[error("{receiver} does not depend on {sender}")]
    NoDependency { sender: AgentId, receiver: AgentId },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("event {position}: {source}")]
    AtEvent {
        position: usize,
        source: Box<RuntimeError>,
    },
    #[error("point {point}: agent {agent} holds several atoms of family {family}")]
    AmbiguousFamily {
        point: usize,
        agent: AgentId,
        family: String,
    },
    #[error("invalid round bounds {start}..{end} for a trace of {points} points")]
    InvalidRound {
        start: usize,
        end: usize,
        points: usize,
    },
}

fn check_env_change(sys: &MultiAgentSystem, c: &EnvChange) -> Result<(), RuntimeError> {
    match c.atoms().find(|a| !sys.env_atoms().contains(*a)) {
        Some(a) => Err(RuntimeError::UnknownEnvAtom(a.clone())),
        None => Ok(()),
    }
}

/// Environment transition: agents sensing part of `c` update their EDB.
pub fn env_transition(
    sys: &MultiAgentSystem,
    state: &GlobalState,
    c: &EnvChange,
) -> Result<GlobalState, RuntimeError> {
    check_env_change(sys, c)?;
    Ok(env_step(sys, state, c).0)
}

/// Applies `c`; also returns the indices of agents whose EDB changed.
fn env_step(
    sys: &MultiAgentSystem,
    state: &GlobalState,
    c: &EnvChange,
) -> (GlobalState, Vec<usize>) {
    let mut changed = Vec::new();
    let next = sys
        .agents()
        .iter()
        .zip(&state.0)
        .enumerate()
        .map(|(i, (a, s))| {
            if !c.touches(&a.hbe) {
                return s.clone();
            }
            let edb = update_env(&s.edb, c, &a.hbe);
            if edb == s.edb {
                return s.clone();
            }
            changed.push(i);
            Arc::new(AgentState {
                edb,
                input: s.input.clone(),
            })
        })
        .collect();
    (GlobalState(next), changed)
}

/// Communication transition `sender ⇝ receiver`, with the payload computed
/// from the sender's current state.
pub fn comm_transition(
    sys: &MultiAgentSystem,
    state: &GlobalState,
    sender: &AgentId,
    receiver: &AgentId,
) -> Result<GlobalState, RuntimeError> {
    let s = sys.position(sender)?;
    let model = agent_model(&sys.agents()[s], state.agent(s))?;
    Ok(comm_step(sys, state, sender, receiver, &model)?.0)
}

fn comm_step(
    sys: &MultiAgentSystem,
    state: &GlobalState,
    sender: &AgentId,
    receiver: &AgentId,
    sender_model: &Interpretation,
) -> Result<(GlobalState, Option<usize>), RuntimeError> {
    let s = sys.position(sender)?;
    let r = sys.position(receiver)?;
    let dep = sys
        .dependency_between(r, s)
        .ok_or_else(|| RuntimeError::NoDependency {
            sender: sender.clone(),
            receiver: receiver.clone(),
        })?;
    let payload = message_payload(sender_model, &dep.atoms);
    let current = state.agent(r);
    let input = update_input(&current.input, &dep.atoms, &payload)?;
    if input == current.input {
        return Ok((state.clone(), None));
    }
    let mut next = state.0.clone();
    next[r] = Arc::new(AgentState {
        edb: current.edb.clone(),
        input,
    });
    Ok((GlobalState(next), Some(r)))
}

pub fn apply(
    sys: &MultiAgentSystem,
    state: &GlobalState,
    e: &Event,
) -> Result<GlobalState, RuntimeError> {
    match e {
        Event::Env(c) => env_transition(sys, state, c),
        Event::Comm { sender, receiver } => comm_transition(sys, state, sender, receiver),
    }
}

/// A full communication round, as the points `start..=end` of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Round {
    pub start: usize,
    pub end: usize,
}

/// Finite run prefix `Δ_0 → Δ_1 → …` with the agents' models at every point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    states: Vec<GlobalState>,
    events: Vec<Event>,
    models: Vec<Vec<Arc<Interpretation>>>,
    rounds: Vec<Round>,
    quiescence_point: usize,
    horizon_hit: bool,
}

impl Trace {
    pub fn new(sys: &MultiAgentSystem) -> Result<Self, RuntimeError> {
        let state = GlobalState::initial(sys);
        let models = sys
            .agents()
            .iter()
            .zip(state.agents())
            .map(|(a, s)| agent_model(a, s).map(Arc::new))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace {
            states: vec![state],
            events: Vec::new(),
            models: vec![models],
            rounds: Vec::new(),
            quiescence_point: 0,
            horizon_hit: false,
        })
    }

    /// Appends the point reached by `e`.
    pub fn push(&mut self, sys: &MultiAgentSystem, e: Event) -> Result<(), RuntimeError> {
        let cur = self.states.last().expect("nonempty trace");
        let mut models = self.models.last().expect("nonempty trace").clone();
        let (next, changed) = match &e {
            Event::Env(c) => {
                check_env_change(sys, c)?;
                env_step(sys, cur, c)
            }
            Event::Comm { sender, receiver } => {
                let s = sys.position(sender)?;
                let (next, r) = comm_step(sys, cur, sender, receiver, &models[s])?;
                (next, r.into_iter().collect())
            }
        };
        for i in changed {
            models[i] = Arc::new(agent_model(&sys.agents()[i], next.agent(i))?);
        }
        if e.is_env() {
            self.quiescence_point = self.states.len();
        }
        self.states.push(next);
        self.models.push(models);
        self.events.push(e);
        Ok(())
    }

    pub fn states(&self) -> &[GlobalState] {
        &self.states
    }

    pub fn state(&self, point: usize) -> &GlobalState {
        &self.states[point]
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// `M_{i,k}`.
    pub fn model(&self, point: usize, agent: usize) -> &Interpretation {
        &self.models[point][agent]
    }

    pub fn models_at(&self, point: usize) -> impl Iterator<Item = &Interpretation> {
        self.models[point].iter().map(|m| &**m)
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    /// Point right after the last environment change (0 if there was none).
    pub fn quiescence_point(&self) -> usize {
        self.quiescence_point
    }

    /// Whether a fair run stopped at its round limit rather than at a fixpoint.
    pub fn horizon_hit(&self) -> bool {
        self.horizon_hit
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last_point(&self) -> usize {
        self.states.len() - 1
    }

    /// Whether no transition between `start` and `end` changed the state.
    pub(crate) fn is_stationary(&self, start: usize, end: usize) -> bool {
        self.states[start..=end].windows(2).all(|w| w[0] == w[1])
    }

    pub(crate) fn set_rounds(
        &mut self,
        rounds: Vec<Round>,
        horizon_hit: bool,
    ) -> Result<(), RuntimeError> {
        let points = self.len();
        if let Some(r) = rounds.iter().find(|r| r.start > r.end || r.end >= points) {
            return Err(RuntimeError::InvalidRound {
                start: r.start,
                end: r.end,
                points,
            });
        }
        self.rounds = rounds;
        self.horizon_hit = horizon_hit;
        Ok(())
    }
}

/// Folds `script` over the initial state.
pub fn run_scripted(
    sys: &MultiAgentSystem,
    script: impl IntoIterator<Item = Event>,
) -> Result<Trace, RuntimeError> {
    let mut trace = Trace::new(sys)?;
    for (position, e) in script.into_iter().enumerate() {
        trace.push(sys, e).map_err(|source| RuntimeError::AtEvent {
            position,
            source: Box::new(source),
        })?;
    }
    Ok(trace)
}

/// An environment change applied once `after_round` fair rounds have completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedChange {
    pub after_round: usize,
    pub change: EnvChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    /// Every dependent pair once per round, by receiver id then sender id.
    #[default]
    RoundRobin,
    /// Every dependent pair once per round, in an order drawn from the seed.
    Shuffled { seed: u64 },
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::RoundRobin => "round-robin",
            Policy::Shuffled { .. } => "shuffled",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Policy::RoundRobin => None,
            Policy::Shuffled { seed } => Some(*seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FairOptions {
    /// Defaults to [`default_max_rounds`].
    pub max_rounds: Option<usize>,
    pub policy: Policy,
}

/// `4 × |I/O graph nodes| + 16`.
pub fn default_max_rounds(sys: &MultiAgentSystem) -> usize {
    4 * io_graph(sys).node_count() + 16
}

/// Fair run from the initial state. Stops after the first round that changes
/// nothing once the environment script is exhausted, or after `max_rounds`.
pub fn run_fair(
    sys: &MultiAgentSystem,
    env_script: &[TimedChange],
    opts: FairOptions,
) -> Result<Trace, RuntimeError> {
    continue_fair(sys, Trace::new(sys)?, env_script, opts)
}

/// Extends `trace` with fair rounds; `after_round` counts rounds of this extension.
pub fn continue_fair(
    sys: &MultiAgentSystem,
    mut trace: Trace,
    env_script: &[TimedChange],
    opts: FairOptions,
) -> Result<Trace, RuntimeError> {
    let max_rounds = opts.max_rounds.unwrap_or_else(|| default_max_rounds(sys));
    let mut pending: Vec<&TimedChange> = env_script.iter().collect();
    pending.sort_by_key(|t| t.after_round);
    let mut pending = pending.into_iter().peekable();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.policy.seed().unwrap_or(0));
    let mut pairs: Vec<(AgentId, AgentId)> = sys
        .dependencies()
        .iter()
        .map(|d| {
            (
                sys.agents()[d.sender].id.clone(),
                sys.agents()[d.receiver].id.clone(),
            )
        })
        .collect();
    let mut rounds = trace.rounds.clone();
    for r in 0..max_rounds {
        while let Some(t) = pending.next_if(|t| t.after_round <= r) {
            trace.push(sys, Event::Env(t.change.clone()))?;
        }
        if let Policy::Shuffled { .. } = opts.policy {
            pairs.shuffle(&mut rng);
        }
        let start = trace.last_point();
        for (sender, receiver) in &pairs {
            trace.push(
                sys,
                Event::Comm {
                    sender: sender.clone(),
                    receiver: receiver.clone(),
                },
            )?;
        }
        let end = trace.last_point();
        rounds.push(Round { start, end });
        if pending.peek().is_none() && trace.is_stationary(start, end) {
            trace.rounds = rounds;
            trace.horizon_hit = false;
            return Ok(trace);
        }
    }
    trace.rounds = rounds;
    trace.horizon_hit = true;
    Ok(trace)
}
