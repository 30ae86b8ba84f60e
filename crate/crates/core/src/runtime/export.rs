//! Line-delimited JSON trace files: a header record, one record per point,
//! and the verdict last.

use std::collections::BTreeSet;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{run_scripted, Event, Policy, Round, RuntimeError, Trace, Verdict};
use crate::agents::{AgentId, EnvChange};
use crate::logic::{parse_atom, Atom};
use crate::system::MultiAgentSystem;

pub const TRACE_FORMAT_VERSION: u32 = 1;

/// Run parameters echoed in the header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMeta {
    pub scenario: String,
    pub dmax: Option<u32>,
    pub policy: Policy,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    record: String,
    version: u32,
    scenario: String,
    dmax: Option<u32>,
    policy: String,
    seed: Option<u64>,
    max_rounds: Option<usize>,
    agents: Vec<String>,
    points: usize,
    quiescence: usize,
    rounds: Vec<[usize; 2]>,
    horizon_hit: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum EventRecord {
    Send {
        sender: String,
        receiver: String,
    },
    Env {
        became_true: Vec<String>,
        became_false: Vec<String>,
    },
}

#[derive(Debug, Serialize)]
struct AgentRecord<'a> {
    id: &'a str,
    edb: &'a BTreeSet<Atom>,
    input: &'a BTreeSet<Atom>,
    model: &'a crate::logic::Interpretation,
}

#[derive(Debug, Serialize)]
struct PointRecord<'a> {
    record: &'static str,
    point: usize,
    event: Option<EventRecord>,
    agents: Vec<AgentRecord<'a>>,
}

#[derive(Debug, Serialize)]
struct VerdictRecord<'a> {
    record: &'static str,
    #[serde(flatten)]
    verdict: &'a Verdict,
}

#[derive(Debug, Deserialize)]
struct PointEvent {
    record: String,
    point: usize,
    event: Option<EventRecord>,
}

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trace has no header record")]
    MissingHeader,
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

fn event_record(e: &Event) -> EventRecord {
    let strs = |s: &BTreeSet<Atom>| s.iter().map(ToString::to_string).collect();
    match e {
        Event::Comm { sender, receiver } => EventRecord::Send {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
        },
        Event::Env(c) => EventRecord::Env {
            became_true: strs(c.became_true()),
            became_false: strs(c.became_false()),
        },
    }
}

pub fn write_trace(
    w: &mut impl Write,
    sys: &MultiAgentSystem,
    trace: &Trace,
    verdict: &Verdict,
    meta: &RunMeta,
) -> io::Result<()> {
    let header = Header {
        record: "header".into(),
        version: TRACE_FORMAT_VERSION,
        scenario: meta.scenario.clone(),
        dmax: meta.dmax,
        policy: meta.policy.name().into(),
        seed: meta.policy.seed(),
        max_rounds: meta.max_rounds,
        agents: sys.agents().iter().map(|a| a.id.to_string()).collect(),
        points: trace.len(),
        quiescence: trace.quiescence_point(),
        rounds: trace.rounds().iter().map(|r| [r.start, r.end]).collect(),
        horizon_hit: trace.horizon_hit(),
    };
    serde_json::to_writer(&mut *w, &header)?;
    writeln!(w)?;
    for k in 0..trace.len() {
        let agents = sys
            .agents()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = trace.state(k).agent(i);
                AgentRecord {
                    id: a.id.as_str(),
                    edb: &s.edb,
                    input: &s.input,
                    model: trace.model(k, i),
                }
            })
            .collect();
        let rec = PointRecord {
            record: "point",
            point: k,
            event: k.checked_sub(1).map(|j| event_record(&trace.events()[j])),
            agents,
        };
        serde_json::to_writer(&mut *w, &rec)?;
        writeln!(w)?;
    }
    serde_json::to_writer(
        &mut *w,
        &VerdictRecord {
            record: "verdict",
            verdict,
        },
    )?;
    writeln!(w)
}

/// The replayable content of a trace file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedTrace {
    pub meta: RunMeta,
    pub events: Vec<Event>,
    pub rounds: Vec<Round>,
    pub horizon_hit: bool,
}

pub fn read_trace(text: &str) -> Result<RecordedTrace, TraceFileError> {
    let malformed = |line: usize, message: String| TraceFileError::Malformed { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (hl, first) = lines.next().ok_or(TraceFileError::MissingHeader)?;
    let header: Header =
        serde_json::from_str(first).map_err(|e| malformed(hl + 1, e.to_string()))?;
    if header.record != "header" {
        return Err(TraceFileError::MissingHeader);
    }
    let policy = match (header.policy.as_str(), header.seed) {
        ("round-robin", _) => Policy::RoundRobin,
        ("shuffled", Some(seed)) => Policy::Shuffled { seed },
        (p, _) => return Err(malformed(hl + 1, format!("unknown policy {p}"))),
    };
    let atom = |line: usize, s: &str| parse_atom(s).map_err(|e| malformed(line, e.to_string()));
    let mut events = Vec::new();
    for (i, l) in lines {
        let value: serde_json::Value =
            serde_json::from_str(l).map_err(|e| malformed(i + 1, e.to_string()))?;
        if value.get("record").and_then(|r| r.as_str()) != Some("point") {
            continue;
        }
        let p: PointEvent =
            serde_json::from_value(value).map_err(|e| malformed(i + 1, e.to_string()))?;
        debug_assert_eq!(p.record, "point");
        if p.point != events.len() + 1 && p.point != 0 {
            return Err(malformed(
                i + 1,
                format!("unexpected point index {}", p.point),
            ));
        }
        let e = match p.event {
            None => continue,
            Some(EventRecord::Send { sender, receiver }) => Event::Comm {
                sender: AgentId::new(&sender),
                receiver: AgentId::new(&receiver),
            },
            Some(EventRecord::Env {
                became_true,
                became_false,
            }) => {
                let t = became_true
                    .iter()
                    .map(|s| atom(i + 1, s))
                    .collect::<Result<Vec<_>, _>>()?;
                let f = became_false
                    .iter()
                    .map(|s| atom(i + 1, s))
                    .collect::<Result<Vec<_>, _>>()?;
                Event::Env(EnvChange::new(t, f).map_err(|e| malformed(i + 1, e.to_string()))?)
            }
        };
        events.push(e);
    }
    Ok(RecordedTrace {
        meta: RunMeta {
            scenario: header.scenario,
            dmax: header.dmax,
            policy,
            max_rounds: header.max_rounds,
        },
        events,
        rounds: header
            .rounds
            .iter()
            .map(|&[start, end]| Round { start, end })
            .collect(),
        horizon_hit: header.horizon_hit,
    })
}

/// Re-executes a recorded event list, restoring its round structure.
pub fn replay(sys: &MultiAgentSystem, rec: &RecordedTrace) -> Result<Trace, RuntimeError> {
    let mut trace = run_scripted(sys, rec.events.iter().cloned())?;
    trace.set_rounds(rec.rounds.clone(), rec.horizon_hit)?;
    Ok(trace)
}
