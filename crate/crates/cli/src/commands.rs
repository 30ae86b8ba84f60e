use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;

use agentstab_core::agents::AgentState;
use agentstab_core::logic::{stable_models_bruteforce, Atom, Interpretation, LogicError};
use agentstab_core::runtime::{
    continue_fair, read_trace, replay as replay_trace, run_scripted, verdict, write_trace,
    FairOptions, Policy, RunMeta, RunStatus, Trace, Verdict,
};
use agentstab_core::scenarios::{
    builtin, chain_scenario, parse_events_into, parse_scenario, Scenario,
};
use agentstab_core::system::{classify, io_graph, MultiAgentSystem};
use serde_json::{json, Value};

use crate::output::{self, io_failure, record};
use crate::{Common, Failure, Format, PolicyArg, Schedule, EXIT_INCONCLUSIVE, EXIT_MISMATCH};

/// Dmax increment used by the IO-finiteness probe and the analyze sweep.
const PROBE_STEP: u32 = 2;
const ANALYZE_SWEEP_ROWS: u32 = 3;
const ORACLE_DEFAULT_ROUNDS: usize = 4;

fn load(c: &Common) -> Result<Scenario, Failure> {
    let path = Path::new(&c.scenario);
    let sc = if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        parse_scenario(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
    } else {
        builtin(&c.scenario).map_err(|e| Failure::input(format!("{e} (not a file either)")))?
    };
    Ok(match c.dmax {
        Some(d) => sc.with_dmax(d),
        None => sc,
    })
}

fn build(sc: &Scenario) -> Result<MultiAgentSystem, Failure> {
    sc.build().map_err(Failure::input)
}

fn fair_options(s: Schedule) -> FairOptions {
    let policy = match s.policy {
        PolicyArg::RoundRobin => Policy::RoundRobin,
        PolicyArg::Shuffled => Policy::Shuffled { seed: s.seed },
    };
    FairOptions {
        max_rounds: s.max_rounds,
        policy,
    }
}

fn execute(
    sys: &MultiAgentSystem,
    sc: &Scenario,
    opts: FairOptions,
) -> Result<(Trace, Verdict), Failure> {
    let prefix = run_scripted(sys, sc.script.clone()).map_err(Failure::input)?;
    let trace = continue_fair(sys, prefix, &sc.timed, opts).map_err(Failure::input)?;
    let v = verdict(sys, &trace, &sc.tracks).map_err(Failure::input)?;
    Ok((trace, v))
}

fn status_code(v: &Verdict) -> u8 {
    match v.status {
        RunStatus::Fixpoint => 0,
        RunStatus::Divergence | RunStatus::InconclusiveHorizon => EXIT_INCONCLUSIVE,
    }
}

fn emit_trace(
    c: &Common,
    sys: &MultiAgentSystem,
    sc: &Scenario,
    trace: &Trace,
    v: &Verdict,
    meta: &RunMeta,
) -> Result<(), Failure> {
    let mut w = output::open(c.out.as_deref())?;
    match c.format {
        Format::Ndrecords => write_trace(&mut w, sys, trace, v, meta),
        Format::Table => output::trace_table(&mut w, sys, sc, trace, v),
    }
    .and_then(|_| w.flush())
    .map_err(io_failure)
}

pub fn analyze(c: &Common) -> Result<u8, Failure> {
    let sc = load(c)?;
    let dmax = sc.dmax();
    let sweep: Vec<(u32, MultiAgentSystem)> = (0..ANALYZE_SWEEP_ROWS)
        .map(|k| dmax + k * PROBE_STEP)
        .map(|d| build(&sc.clone().with_dmax(d)).map(|s| (d, s)))
        .collect::<Result<_, _>>()?;
    let sys = &sweep[0].1;
    let class = classify(sys, Some(&sweep[1].1));
    let io = io_graph(sys);
    let rows: Vec<(u32, usize, usize)> = sweep
        .iter()
        .map(|(d, s)| {
            let g = io_graph(s);
            (*d, g.node_count(), g.edge_count())
        })
        .collect();

    let mut w = output::open(c.out.as_deref())?;
    match c.format {
        Format::Ndrecords => {
            let mut head =
                json!({ "record": "classification", "scenario": c.scenario, "dmax": dmax });
            if let (Value::Object(h), Ok(Value::Object(fields))) =
                (&mut head, serde_json::to_value(&class))
            {
                h.extend(fields);
                h.insert(
                    "io_acyclic_implies_idb_acyclic".into(),
                    class.io_acyclicity_implies_idb_acyclicity().into(),
                );
            }
            record(&mut w, &head)?;
            record(
                &mut w,
                &json!({
                    "record": "system",
                    "agents": sys.agents().len(),
                    "dependencies": sys.dependencies().len(),
                    "env_atoms": sys.env_atoms().len(),
                    "input_atoms": sys.input_atoms().len(),
                }),
            )?;
            record(
                &mut w,
                &json!({ "record": "io-graph", "nodes": io.node_count(), "edges": io.edge_count(), "acyclic": io.is_acyclic() }),
            )?;
            for (d, n, e) in &rows {
                record(
                    &mut w,
                    &json!({ "record": "dmax-sweep", "dmax": d, "io_nodes": n, "io_edges": e }),
                )?;
            }
        }
        Format::Table => {
            let basis = if matches!(
                class.io_finite_basis,
                agentstab_core::system::FinitenessBasis::SingleGrounding
            ) {
                "single grounding"
            } else {
                "empirical Dmax probe"
            };
            let kv = [
                ("scenario", c.scenario.clone()),
                ("dmax", dmax.to_string()),
                ("agents", sys.agents().len().to_string()),
                ("dependencies", sys.dependencies().len().to_string()),
                ("io_acyclic", class.io_acyclic.to_string()),
                ("bounded", class.bounded.to_string()),
                ("io_finite", format!("{} ({basis})", class.io_finite)),
                ("idb_acyclic", class.idb_acyclic.to_string()),
                (
                    "io graph",
                    format!("{} nodes, {} edges", io.node_count(), io.edge_count()),
                ),
            ];
            (|| {
                for (k, v) in kv {
                    writeln!(w, "{k:<13} {v}")?;
                }
                writeln!(w)?;
                let table: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(d, n, e)| vec![d.to_string(), n.to_string(), e.to_string()])
                    .collect();
                output::columns(&mut w, &["dmax", "io_nodes", "io_edges"], &table)
            })()
            .map_err(io_failure)?;
        }
    }
    w.flush().map_err(io_failure)?;
    Ok(0)
}

pub fn run(c: &Common, s: Schedule) -> Result<u8, Failure> {
    let sc = load(c)?;
    let sys = build(&sc)?;
    let opts = fair_options(s);
    let (trace, v) = execute(&sys, &sc, opts)?;
    let meta = RunMeta {
        scenario: c.scenario.clone(),
        dmax: sys.dmax,
        policy: opts.policy,
        max_rounds: s.max_rounds,
    };
    emit_trace(c, &sys, &sc, &trace, &v, &meta)?;
    Ok(status_code(&v))
}

pub fn replay(c: &Common, events: Option<&Path>, recorded: Option<&Path>) -> Result<u8, Failure> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
    };
    let mut sc = load(c)?;
    if let Some(p) = events {
        parse_events_into(&mut sc, &read(p)?)
            .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        if !sc.timed.is_empty() {
            return Err(Failure::input(
                "replay takes untimed events only; use `run` for `@round` changes",
            ));
        }
    }
    let sys = build(&sc)?;
    let (trace, meta) = match recorded {
        Some(p) => {
            let rec = read_trace(&read(p)?)
                .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            (replay_trace(&sys, &rec).map_err(Failure::input)?, rec.meta)
        }
        None => {
            let trace = run_scripted(&sys, sc.script.clone()).map_err(Failure::input)?;
            let meta = RunMeta {
                scenario: c.scenario.clone(),
                dmax: sys.dmax,
                policy: Policy::RoundRobin,
                max_rounds: None,
            };
            (trace, meta)
        }
    };
    let v = verdict(&sys, &trace, &sc.tracks).map_err(Failure::input)?;
    emit_trace(c, &sys, &sc, &trace, &v, &meta)?;
    Ok(0)
}

fn parse_range(text: &str) -> Result<(u32, u32), Failure> {
    let bad = || {
        Failure::input(format!(
            "invalid range `{text}`; expected A..B or a single value"
        ))
    };
    let num = |s: &str| s.trim().parse::<u32>().map_err(|_| bad());
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => (num(text)?, num(text)?),
    };
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

struct SweepRow {
    value: u32,
    io_nodes: usize,
    io_edges: usize,
    status: RunStatus,
    fixpoint: Option<usize>,
    rounds_to_fixpoint: Option<usize>,
    outputs: BTreeSet<Atom>,
}

fn sweep_point(sc: &Scenario, value: u32, opts: FairOptions) -> Result<SweepRow, Failure> {
    let sys = build(sc)?;
    let io = io_graph(&sys);
    let (trace, v) = execute(&sys, sc, opts)?;
    let at = v.fixpoint.unwrap_or(trace.last_point());
    let mut outputs = BTreeSet::new();
    if !sc.outputs.is_empty() {
        for (i, a) in sys.agents().iter().enumerate() {
            outputs.extend(
                sc.output_projection(&a.id, trace.model(at, i))
                    .map_err(Failure::input)?,
            );
        }
    }
    Ok(SweepRow {
        value,
        io_nodes: io.node_count(),
        io_edges: io.edge_count(),
        status: v.status,
        fixpoint: v.fixpoint,
        rounds_to_fixpoint: v.rounds_to_fixpoint,
        outputs,
    })
}

pub fn sweep(c: &Common, s: Schedule, range: &str) -> Result<u8, Failure> {
    let (lo, hi) = parse_range(range)?;
    let is_chain = c.scenario == "chain";
    let param = if is_chain { "n" } else { "dmax" };
    if is_chain && c.dmax.is_some() {
        return Err(Failure::input(
            "`--dmax` does not apply to the chain family",
        ));
    }
    let base = if is_chain { None } else { Some(load(c)?) };
    let scenario_at = |v: u32| match &base {
        Some(sc) => sc.clone().with_dmax(v),
        None => chain_scenario(v),
    };
    let opts = fair_options(s);
    let rows: Vec<SweepRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = (lo..=hi)
            .map(|v| {
                let sc = scenario_at(v);
                scope.spawn(move || sweep_point(&sc, v, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<_, _>>()
    })?;

    let mut w = output::open(c.out.as_deref())?;
    let opt = |v: Option<usize>| v.map_or(Value::Null, Value::from);
    let mut prev: Option<&BTreeSet<Atom>> = None;
    let mut table = Vec::new();
    for r in &rows {
        let same = prev.map(|p| *p == r.outputs);
        prev = Some(&r.outputs);
        match c.format {
            Format::Ndrecords => record(
                &mut w,
                &json!({
                    "record": "sweep-row",
                    "scenario": c.scenario,
                    "parameter": param,
                    "value": r.value,
                    "io_nodes": r.io_nodes,
                    "io_edges": r.io_edges,
                    "status": r.status,
                    "fixpoint": opt(r.fixpoint),
                    "rounds_to_fixpoint": opt(r.rounds_to_fixpoint),
                    "outputs": r.outputs.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "outputs_same_as_previous": same,
                }),
            )?,
            Format::Table => table.push(vec![
                r.value.to_string(),
                r.io_nodes.to_string(),
                r.io_edges.to_string(),
                r.status.as_str().to_string(),
                r.rounds_to_fixpoint.map_or("-".into(), |n| n.to_string()),
                r.outputs.len().to_string(),
                same.map_or("-".into(), |b| b.to_string()),
            ]),
        }
    }
    if c.format == Format::Table {
        let header = [
            param,
            "io_nodes",
            "io_edges",
            "status",
            "rounds",
            "outputs",
            "same_outputs",
        ];
        output::columns(&mut w, &header, &table).map_err(io_failure)?;
    }
    w.flush().map_err(io_failure)?;
    Ok(0)
}

pub fn oracle_check(
    c: &Common,
    s: Schedule,
    cap: usize,
    inject_fault: bool,
) -> Result<u8, Failure> {
    let sc = load(c)?;
    let sys = build(&sc)?;
    let opts = FairOptions {
        max_rounds: Some(s.max_rounds.unwrap_or(ORACLE_DEFAULT_ROUNDS)),
        ..fair_options(s)
    };
    let (trace, _) = execute(&sys, &sc, opts)?;

    let mut w = output::open(c.out.as_deref())?;
    let mut seen: HashSet<(usize, AgentState)> = HashSet::new();
    let mut skipped: BTreeSet<usize> = BTreeSet::new();
    let (mut checked, mut mismatches) = (0usize, 0usize);
    let mut lines: Vec<String> = Vec::new();
    for k in 0..trace.len() {
        for (i, agent) in sys.agents().iter().enumerate() {
            let state = trace.state(k).agent(i);
            if skipped.contains(&i) || !seen.insert((i, state.clone())) {
                continue;
            }
            let program = agent.idb.with_facts(state.edb.iter().chain(&state.input));
            let brute = match stable_models_bruteforce(&program, cap) {
                Ok(models) => models,
                Err(LogicError::UniverseTooLarge { size, cap }) => {
                    skipped.insert(i);
                    match c.format {
                        Format::Ndrecords => record(
                            &mut w,
                            &json!({ "record": "oracle-skip", "agent": agent.id, "universe": size, "cap": cap }),
                        )?,
                        Format::Table => lines.push(format!(
                            "skip {}: universe of {size} atoms exceeds cap {cap}",
                            agent.id
                        )),
                    }
                    continue;
                }
                Err(e) => return Err(Failure::input(e)),
            };
            let mut computed = trace.model(k, i).clone();
            if inject_fault && checked == 0 {
                computed = Interpretation::new(
                    computed
                        .iter()
                        .cloned()
                        .chain([Atom::prop("injected_fault")]),
                );
            }
            checked += 1;
            if brute != [computed.clone()] {
                mismatches += 1;
                let brute: Vec<String> = brute.iter().map(ToString::to_string).collect();
                match c.format {
                    Format::Ndrecords => record(
                        &mut w,
                        &json!({
                            "record": "oracle-mismatch",
                            "point": k,
                            "agent": agent.id,
                            "computed": computed,
                            "brute_force": brute,
                        }),
                    )?,
                    Format::Table => lines.push(format!(
                        "mismatch at point {k}, {}: computed {computed}, brute force [{}]",
                        agent.id,
                        brute.join(", ")
                    )),
                }
            }
        }
    }
    match c.format {
        Format::Ndrecords => record(
            &mut w,
            &json!({
                "record": "oracle-summary",
                "points": trace.len(),
                "checked": checked,
                "skipped_agents": skipped.len(),
                "mismatches": mismatches,
            }),
        )?,
        Format::Table => {
            (|| {
                for l in &lines {
                    writeln!(w, "{l}")?;
                }
                writeln!(
                    w,
                    "{checked} agent states checked over {} points, {} agents skipped, {mismatches} mismatches",
                    trace.len(),
                    skipped.len()
                )
            })()
            .map_err(io_failure)?;
        }
    }
    w.flush().map_err(io_failure)?;
    Ok(if mismatches > 0 { EXIT_MISMATCH } else { 0 })
}
