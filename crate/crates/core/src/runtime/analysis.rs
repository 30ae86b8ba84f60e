use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{RuntimeError, Trace};
use crate::agents::AgentId;
use crate::logic::{Atom, Constant, Interpretation, Symbol};
use crate::system::{superagent, superagent_model, MultiAgentSystem, ReferenceMethod};

/// Consecutive strict increases needed before divergence is reported.
pub const DEFAULT_DIVERGENCE_STREAK: usize = 3;

/// First round starting at or after quiescence in which no transition changed
/// the state; returns the point where that round starts. A fair run that hit
/// its horizon still had environment changes pending at every such round.
pub fn detect_fixpoint(trace: &Trace) -> Option<usize> {
    if trace.horizon_hit() {
        return None;
    }
    let h = trace.quiescence_point();
    trace
        .rounds()
        .iter()
        .find(|r| r.start >= h && trace.is_stationary(r.start, r.end))
        .map(|r| r.start)
}

/// Rounds after quiescence that still changed something before the fixpoint.
pub fn rounds_to_fixpoint(trace: &Trace) -> Option<usize> {
    let fix = detect_fixpoint(trace)?;
    let h = trace.quiescence_point();
    Some(
        trace
            .rounds()
            .iter()
            .filter(|r| r.start >= h && r.start < fix)
            .count(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConvergenceModel {
    pub model: Interpretation,
    /// Atoms some but not all of the agents that know them hold at `point`.
    pub non_convergent: BTreeSet<Atom>,
}

/// `Conv(R)` evaluated at `point`, normally the fixpoint.
pub fn convergence_model(sys: &MultiAgentSystem, trace: &Trace, point: usize) -> ConvergenceModel {
    let vocab: Vec<BTreeSet<Atom>> = sys.agents().iter().map(|a| a.vocabulary()).collect();
    let all: BTreeSet<&Atom> = vocab.iter().flatten().collect();
    let mut model = BTreeSet::new();
    let mut non_convergent = BTreeSet::new();
    for a in all {
        let mut held = vocab
            .iter()
            .enumerate()
            .filter(|(_, v)| v.contains(a))
            .map(|(i, _)| trace.model(point, i).contains(a));
        let first = held.next().expect("atom comes from some vocabulary");
        if held.all(|h| h == first) {
            if first {
                model.insert(a.clone());
            }
        } else {
            non_convergent.insert(a.clone());
        }
    }
    ConvergenceModel {
        model: Interpretation::from(model),
        non_convergent,
    }
}

/// `∪ EDB_i` at the quiescence point.
pub fn stabilized_environment(trace: &Trace) -> BTreeSet<Atom> {
    trace
        .state(trace.quiescence_point())
        .agents()
        .flat_map(|s| s.edb.iter().cloned())
        .collect()
}

/// An atom pattern with exactly one open natural-number slot, e.g. `sp(A1,A5,_)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FamilyPattern {
    predicate: Symbol,
    args: Vec<Option<Constant>>,
    slot: usize,
}

impl FamilyPattern {
    /// `args` must contain exactly one `None`.
    pub fn new(predicate: &str, args: Vec<Option<Constant>>) -> Option<Self> {
        let mut open = args.iter().enumerate().filter(|(_, a)| a.is_none());
        let slot = open.next()?.0;
        if open.next().is_some() {
            return None;
        }
        Some(FamilyPattern {
            predicate: Symbol::new(predicate),
            args,
            slot,
        })
    }

    pub fn value(&self, a: &Atom) -> Option<u32> {
        if a.predicate != self.predicate || a.args.len() != self.args.len() {
            return None;
        }
        let fixed = a
            .args
            .iter()
            .zip(&self.args)
            .all(|(c, p)| p.as_ref().is_none_or(|p| p == c));
        if fixed {
            a.args[self.slot].as_nat()
        } else {
            None
        }
    }
}

impl fmt::Display for FamilyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| {
                a.as_ref()
                    .map_or_else(|| "_".to_string(), ToString::to_string)
            })
            .collect();
        write!(f, "{}({})", self.predicate, args.join(","))
    }
}

impl Serialize for FamilyPattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub family: FamilyPattern,
    pub agent: AgentId,
    /// `(point, value)` samples ending with the increasing streak.
    pub samples: Vec<(usize, u32)>,
    pub streak: usize,
}

/// Sample points: round starts plus the end of the last round, or every point
/// when the trace has no rounds.
fn sample_points(trace: &Trace) -> Vec<usize> {
    if trace.rounds().is_empty() {
        return (0..trace.len()).collect();
    }
    let mut pts: Vec<usize> = trace.rounds().iter().map(|r| r.start).collect();
    pts.extend(trace.rounds().last().map(|r| r.end));
    pts.dedup();
    pts
}

/// Reports the first agent (by id) whose family value strictly increases at
/// `streak` consecutive samples.
pub fn divergence_probe(
    sys: &MultiAgentSystem,
    trace: &Trace,
    family: &FamilyPattern,
    streak: usize,
) -> Result<Option<DivergenceReport>, RuntimeError> {
    let points = sample_points(trace);
    for (i, agent) in sys.agents().iter().enumerate() {
        let mut samples: Vec<(usize, u32)> = Vec::new();
        let mut run = 0;
        for &p in &points {
            let mut values = trace.model(p, i).iter().filter_map(|a| family.value(a));
            let v = values.next();
            if values.next().is_some() {
                return Err(RuntimeError::AmbiguousFamily {
                    point: p,
                    agent: agent.id.clone(),
                    family: family.to_string(),
                });
            }
            match v {
                None => {
                    samples.clear();
                    run = 0;
                }
                Some(v) => {
                    run = match samples.last() {
                        Some(&(_, prev)) if v > prev => run + 1,
                        _ => 0,
                    };
                    samples.push((p, v));
                    if run >= streak {
                        return Ok(Some(DivergenceReport {
                            family: family.clone(),
                            agent: agent.id.clone(),
                            samples,
                            streak,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Fixpoint,
    Divergence,
    InconclusiveHorizon,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Fixpoint => "fixpoint",
            RunStatus::Divergence => "divergence",
            RunStatus::InconclusiveHorizon => "inconclusive-horizon",
        }
    }
}

/// Outcome of a single run. It witnesses (or refutes) weak stabilization for
/// that run only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: RunStatus,
    pub fixpoint: Option<usize>,
    pub rounds_to_fixpoint: Option<usize>,
    pub strongly_convergent: bool,
    pub convergence_model: Option<Interpretation>,
    pub non_convergent: BTreeSet<Atom>,
    pub stabilized_edb: BTreeSet<Atom>,
    pub reference_model: Option<Interpretation>,
    pub reference_method: Option<ReferenceMethod>,
    pub reference_error: Option<String>,
    pub weakly_stabilizing_witnessed: bool,
    pub divergence: Option<DivergenceReport>,
}

pub fn verdict(
    sys: &MultiAgentSystem,
    trace: &Trace,
    families: &[FamilyPattern],
) -> Result<Verdict, RuntimeError> {
    let fixpoint = detect_fixpoint(trace);
    let conv = fixpoint.map(|p| convergence_model(sys, trace, p));
    let stabilized_edb = stabilized_environment(trace);
    let (reference_model, reference_method, reference_error) =
        match superagent_model(&superagent(sys), &stabilized_edb) {
            Ok(r) => (Some(r.model), Some(r.method), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
    let mut divergence = None;
    for f in families {
        divergence = divergence_probe(sys, trace, f, DEFAULT_DIVERGENCE_STREAK)?;
        if divergence.is_some() {
            break;
        }
    }
    let weakly_stabilizing_witnessed = match (&conv, &reference_model) {
        (Some(c), Some(r)) => c.non_convergent.is_empty() && c.model == *r,
        _ => false,
    };
    let status = if divergence.is_some() {
        RunStatus::Divergence
    } else if fixpoint.is_some() {
        RunStatus::Fixpoint
    } else {
        RunStatus::InconclusiveHorizon
    };
    let (convergence_model, non_convergent) = match conv {
        Some(c) => (Some(c.model), c.non_convergent),
        None => (None, BTreeSet::new()),
    };
    Ok(Verdict {
        status,
        fixpoint,
        rounds_to_fixpoint: rounds_to_fixpoint(trace),
        strongly_convergent: fixpoint.is_some(),
        convergence_model,
        non_convergent,
        stabilized_edb,
        reference_model,
        reference_method,
        reference_error,
        weakly_stabilizing_witnessed,
        divergence,
    })
}
