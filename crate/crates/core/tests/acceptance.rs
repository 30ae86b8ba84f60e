//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use agentstab_core::agents::EnvChange;
use agentstab_core::logic::{
    is_stable_model, stable_model_acyclic, stable_models_bruteforce, Atom, Clause, GroundProgram,
    Interpretation,
};
use agentstab_core::runtime::{
    continue_fair, convergence_model, detect_fixpoint, read_trace, replay, rounds_to_fixpoint,
    run_fair, run_scripted, verdict, write_trace, FairOptions, FamilyPattern, Policy, RunMeta,
    RunStatus, TimedChange, Trace,
};
use agentstab_core::scenarios::{
    bfs_oracle, builtin, chain_system, routing_output, routing_system, Topology,
};
use agentstab_core::system::{classify, io_graph, superagent, superagent_model, MultiAgentSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Option<Duration>);

fn atoms(xs: &[&str]) -> BTreeSet<Atom> {
    xs.iter().map(|s| Atom::parse(s)).collect()
}

fn interp(xs: &[&str]) -> Interpretation {
    Interpretation::parse(xs.iter().copied())
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn example3_table() -> Check {
    let sc = builtin("example3").map_err(|e| e.to_string())?;
    let sys = sc.build().map_err(|e| e.to_string())?;
    let t = run_scripted(&sys, sc.script.clone()).map_err(|e| e.to_string())?;
    let rows: [[&[&str]; 6]; 5] = [
        [&["c"], &[], &["c"], &["d", "e"], &[], &["b", "d", "e"]],
        [
            &["c"],
            &["b"],
            &["a", "b", "c", "f"],
            &["d", "e"],
            &[],
            &["b", "d", "e"],
        ],
        [
            &["c"],
            &["b"],
            &["a", "b", "c", "f"],
            &["d", "e"],
            &["a"],
            &["a", "b", "d", "e"],
        ],
        [
            &["c"],
            &["b"],
            &["a", "b", "c", "f"],
            &["d"],
            &["a"],
            &["a", "b", "d"],
        ],
        [
            &["c"],
            &["b"],
            &["a", "b", "c", "f"],
            &["d"],
            &["a"],
            &["a", "b", "d"],
        ],
    ];
    for (k, row) in rows.iter().enumerate() {
        for agent in 0..2 {
            let s = t.state(k).agent(agent);
            let [edb, input, model] = [row[3 * agent], row[3 * agent + 1], row[3 * agent + 2]];
            ensure!(
                s.edb == atoms(edb),
                "point {k} agent {agent}: EDB {:?}",
                s.edb
            );
            ensure!(
                s.input == atoms(input),
                "point {k} agent {agent}: IN {:?}",
                s.input
            );
            ensure!(
                *t.model(k, agent) == interp(model),
                "point {k} agent {agent}: model {}",
                t.model(k, agent)
            );
        }
    }
    Ok("points 0-4 match for both agents".into())
}

fn weak_stabilization_refutation() -> Check {
    let sys = builtin("example3")
        .and_then(|s| s.build())
        .map_err(|e| e.to_string())?;
    let script = [TimedChange {
        after_round: 1,
        change: EnvChange::fail(atoms(&["e"])),
    }];
    let opts = FairOptions {
        max_rounds: Some(10),
        ..Default::default()
    };
    let t = run_fair(&sys, &script, opts).map_err(|e| e.to_string())?;
    let v = verdict(&sys, &t, &[]).map_err(|e| e.to_string())?;
    let fix = v.fixpoint.ok_or("no fixpoint")?;
    ensure!(
        *t.model(fix, 0) == interp(&["a", "b", "c", "f"]),
        "M_1 = {}",
        t.model(fix, 0)
    );
    ensure!(
        *t.model(fix, 1) == interp(&["a", "b", "d"]),
        "M_2 = {}",
        t.model(fix, 1)
    );
    ensure!(
        v.convergence_model == Some(interp(&["a", "b", "c", "d", "f"])),
        "Conv = {:?}",
        v.convergence_model
    );
    ensure!(
        v.stabilized_edb == atoms(&["c", "d"]),
        "EDB = {:?}",
        v.stabilized_edb
    );
    ensure!(
        v.reference_model == Some(interp(&["c", "d"])),
        "reference = {:?}",
        v.reference_model
    );
    ensure!(
        !v.weakly_stabilizing_witnessed,
        "witnessed weak stabilization"
    );
    Ok("Conv={a,b,c,d,f}, EDB={c,d}, reference={c,d}, not weakly stabilizing".into())
}

type Row = [&'static [&'static str]; 3];

fn count_to_infinity_replay() -> Check {
    const A1: [Row; 9] = [
        [&["link(A1,A2)", "link(A1,A4)"], &[], &["sp(A1,A1,0)"]],
        [&["link(A1,A2)", "link(A1,A4)"], &[], &["sp(A1,A1,0)"]],
        [&["link(A1,A2)", "link(A1,A4)"], &[], &["sp(A1,A1,0)"]],
        [
            &["link(A1,A2)", "link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)"],
            &["sp(A1,A1,0)", "sp(A1,A2,1)", "sp(A1,A5,2)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)"],
            &["sp(A1,A1,0)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)", "sp(A4,A4,0)", "sp(A4,A5,1)"],
            &["sp(A1,A1,0)", "sp(A1,A4,1)", "sp(A1,A5,2)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)", "sp(A4,A4,0)", "sp(A4,A5,1)"],
            &["sp(A1,A1,0)", "sp(A1,A4,1)", "sp(A1,A5,2)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)", "sp(A4,A4,0)", "sp(A4,A5,1)"],
            &["sp(A1,A1,0)", "sp(A1,A4,1)", "sp(A1,A5,2)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A2,A2,0)", "sp(A2,A5,1)", "sp(A4,A4,0)", "sp(A4,A5,3)"],
            &["sp(A1,A1,0)", "sp(A1,A4,1)", "sp(A1,A5,4)"],
        ],
    ];
    const A4: [Row; 9] = [
        [&["link(A1,A4)", "link(A4,A5)"], &[], &["sp(A4,A4,0)"]],
        [&["link(A1,A4)", "link(A4,A5)"], &[], &["sp(A4,A4,0)"]],
        [
            &["link(A1,A4)", "link(A4,A5)"],
            &["sp(A5,A5,0)"],
            &["sp(A4,A4,0)", "sp(A4,A5,1)"],
        ],
        [
            &["link(A1,A4)", "link(A4,A5)"],
            &["sp(A5,A5,0)"],
            &["sp(A4,A4,0)", "sp(A4,A5,1)"],
        ],
        [
            &["link(A1,A4)", "link(A4,A5)"],
            &["sp(A5,A5,0)"],
            &["sp(A4,A4,0)", "sp(A4,A5,1)"],
        ],
        [
            &["link(A1,A4)", "link(A4,A5)"],
            &["sp(A5,A5,0)"],
            &["sp(A4,A4,0)", "sp(A4,A5,1)"],
        ],
        [&["link(A1,A4)"], &["sp(A5,A5,0)"], &["sp(A4,A4,0)"]],
        [
            &["link(A1,A4)"],
            &["sp(A5,A5,0)", "sp(A1,A1,0)", "sp(A1,A5,2)"],
            &["sp(A4,A4,0)", "sp(A4,A1,1)", "sp(A4,A5,3)"],
        ],
        [
            &["link(A1,A4)"],
            &["sp(A5,A5,0)", "sp(A1,A1,0)", "sp(A1,A5,2)"],
            &["sp(A4,A4,0)", "sp(A4,A1,1)", "sp(A4,A5,3)"],
        ],
    ];
    let sc = builtin("routing5-example6-script").map_err(|e| e.to_string())?;
    let sys = sc.build().map_err(|e| e.to_string())?;
    let t = run_scripted(&sys, sc.script.clone()).map_err(|e| e.to_string())?;
    for (idx, rows) in [(0usize, &A1), (3, &A4)] {
        let id = &sys.agents()[idx].id;
        for (k, [edb, input, sp]) in rows.iter().enumerate() {
            let s = t.state(k).agent(idx);
            ensure!(s.edb == atoms(edb), "{id} point {k}: EDB {:?}", s.edb);
            ensure!(s.input == atoms(input), "{id} point {k}: IN {:?}", s.input);
            let out = routing_output(id, t.model(k, idx));
            ensure!(out == atoms(sp), "{id} point {k}: SP {out:?}");
        }
    }
    let t = continue_fair(&sys, t, &[], FairOptions::default()).map_err(|e| e.to_string())?;
    let fam =
        FamilyPattern::new("sp", vec![Some(sym("A1")), Some(sym("A5")), None]).expect("one slot");
    let series: Vec<Option<u32>> = t
        .rounds()
        .iter()
        .map(|r| t.model(r.end, 0).iter().find_map(|a| fam.value(a)))
        .collect();
    let present: Vec<u32> = series.iter().map_while(|v| *v).collect();
    ensure!(present.len() >= 3, "ramp too short: {series:?}");
    ensure!(
        present.windows(2).all(|w| w[1] == w[0] + 2),
        "not +2 per round: {series:?}"
    );
    ensure!(
        present.last() == sys.dmax.as_ref(),
        "ramp does not reach the cap: {series:?}"
    );
    ensure!(
        series[present.len()..].iter().all(Option::is_none),
        "value reappears: {series:?}"
    );
    let v = verdict(&sys, &t, &sc.tracks).map_err(|e| e.to_string())?;
    ensure!(v.status == RunStatus::Divergence, "status {:?}", v.status);
    Ok(format!(
        "rows 0-8 match; sp(A1,A5,_) at round ends {present:?}; probe fired"
    ))
}

fn sym(s: &str) -> agentstab_core::logic::Constant {
    agentstab_core::logic::Constant::sym(s)
}

fn check_against_bfs(
    sys: &MultiAgentSystem,
    t: &Trace,
    failed: &[(&str, &str)],
) -> Result<(), String> {
    let fix = detect_fixpoint(t).ok_or("no fixpoint")?;
    let oracle = bfs_oracle(&Topology::five_node(), failed);
    for (i, a) in sys.agents().iter().enumerate() {
        let expect: BTreeSet<Atom> = oracle
            .iter()
            .filter(|((src, _), _)| src.as_str() == a.id.as_str())
            .map(|((src, dst), d)| Atom::parse(&format!("sp({src},{dst},{d})")))
            .collect();
        let got = routing_output(&a.id, t.model(fix, i));
        ensure!(got == expect, "{}: {got:?} != {expect:?}", a.id);
    }
    Ok(())
}

fn routing_correctness() -> Check {
    let t1 = Topology::five_node();
    let sys = routing_system(&t1, 6).map_err(|e| e.to_string())?;
    let intact = run_fair(&sys, &[], FairOptions::default()).map_err(|e| e.to_string())?;
    check_against_bfs(&sys, &intact, &[])?;
    let fix = detect_fixpoint(&intact).expect("checked");
    ensure!(
        routing_output(&"A1".into(), intact.model(fix, 0)).contains(&Atom::parse("sp(A1,A3,2)")),
        "sp(A1,A3,2)"
    );
    for after_round in [0, 3] {
        let script = [TimedChange {
            after_round,
            change: EnvChange::fail([Topology::link_atom(&"A1".into(), &"A2".into())]),
        }];
        let t = run_fair(&sys, &script, FairOptions::default()).map_err(|e| e.to_string())?;
        check_against_bfs(&sys, &t, &[("A1", "A2")])
            .map_err(|e| format!("failure after round {after_round}: {e}"))?;
    }
    Ok("intact and link(A1,A2)-failed runs equal BFS distances".into())
}

/// Least model by naive iteration, used as an independent oracle.
fn naive_least(clauses: &[(Atom, Vec<Atom>)]) -> BTreeSet<Atom> {
    let mut m = BTreeSet::new();
    loop {
        let before = m.len();
        for (h, body) in clauses {
            if body.iter().all(|b| m.contains(b)) {
                m.insert(h.clone());
            }
        }
        if m.len() == before {
            return m;
        }
    }
}

fn naive_is_stable(p: &GroundProgram, s: &BTreeSet<Atom>) -> bool {
    let reduct: Vec<(Atom, Vec<Atom>)> = p
        .clauses()
        .filter(|c: &&Clause| c.body().iter().all(|l| l.positive || !s.contains(&l.atom)))
        .map(|c| {
            let pos = c
                .body()
                .iter()
                .filter(|l| l.positive)
                .map(|l| l.atom.clone())
                .collect();
            (c.head().clone(), pos)
        })
        .collect();
    naive_least(&reduct) == *s
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let acyclic_runs = 1200;
    for k in 0..acyclic_runs {
        let n = 1 + k % 12;
        let p = common::random_acyclic_program(&mut rng, n);
        let fast = stable_model_acyclic(&p).map_err(|e| format!("case {k}: {e}"))?;
        let all = stable_models_bruteforce(&p, 12).map_err(|e| format!("case {k}: {e}"))?;
        ensure!(
            all == vec![fast.clone()],
            "case {k}: {p} acyclic={fast} brute={all:?}"
        );
    }
    let general_runs = 400;
    let mut subsets = 0u64;
    for k in 0..general_runs {
        let n = 1 + k % 8;
        let p = common::random_program(&mut rng, n);
        let universe: Vec<Atom> = p.universe().iter().cloned().collect();
        let brute: BTreeSet<Interpretation> = stable_models_bruteforce(&p, 12)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        for mask in 0u32..(1 << universe.len()) {
            let s: BTreeSet<Atom> = (0..universe.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| universe[i].clone())
                .collect();
            let expected = naive_is_stable(&p, &s);
            let s = Interpretation::from(s);
            ensure!(is_stable_model(&p, &s) == expected, "case {k}: {p} S={s}");
            ensure!(
                brute.contains(&s) == expected,
                "case {k}: enumeration disagrees at S={s}"
            );
            subsets += 1;
        }
    }
    Ok(format!("{acyclic_runs} acyclic programs, {general_runs} general programs ({subsets} subsets), 0 mismatches"))
}

fn acyclic_convergence_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let systems = 200;
    let mut worst = 0usize;
    for k in 0..systems {
        let g = common::random_system(&mut rng, true);
        let sys = &g.system;
        let io = io_graph(sys);
        ensure!(io.is_acyclic(), "system {k}: I/O graph has a cycle");
        let reference = superagent_model(&superagent(sys), &final_env(sys, &g.env_script))
            .map_err(|e| format!("system {k}: {e}"))?;
        for s in 0..3u64 {
            let policy = Policy::Shuffled {
                seed: 3 * k as u64 + s,
            };
            let t = run_fair(
                sys,
                &g.env_script,
                FairOptions {
                    max_rounds: None,
                    policy,
                },
            )
            .map_err(|e| format!("system {k}: {e}"))?;
            let fix = detect_fixpoint(&t).ok_or(format!("system {k} seed {s}: no fixpoint"))?;
            let r = rounds_to_fixpoint(&t).expect("fixpoint");
            ensure!(
                r <= io.node_count() + 1,
                "system {k}: {r} rounds > |I/O graph| + 1 = {}",
                io.node_count() + 1
            );
            worst = worst.max(r);
            let conv = convergence_model(sys, &t, fix);
            ensure!(
                conv.non_convergent.is_empty(),
                "system {k}: disagreement on {:?}",
                conv.non_convergent
            );
            ensure!(
                conv.model == reference.model,
                "system {k}: Conv {} != {}",
                conv.model,
                reference.model
            );
            let models_at_fix: Vec<Interpretation> = t.models_at(fix).cloned().collect();
            let more = FairOptions {
                max_rounds: Some(3),
                policy: Policy::Shuffled { seed: 1000 + s },
            };
            let ext = continue_fair(sys, t, &[], more).map_err(|e| e.to_string())?;
            let last: Vec<Interpretation> = ext.models_at(ext.last_point()).cloned().collect();
            ensure!(
                last == models_at_fix,
                "system {k}: models changed after the fixpoint"
            );
        }
    }
    Ok(format!(
        "{systems} systems x 3 schedules; max rounds after quiescence {worst}"
    ))
}

fn final_env(sys: &MultiAgentSystem, script: &[TimedChange]) -> BTreeSet<Atom> {
    let mut env: BTreeSet<Atom> = superagent(sys).initial_edb;
    for t in script {
        for a in t.change.became_false() {
            env.remove(a);
        }
        env.extend(t.change.became_true().iter().cloned());
    }
    env
}

fn io_acyclic_rule_bases() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut io_acyclic, mut total) = (0, 0);
    for k in 0..600 {
        let g = common::random_system(&mut rng, k % 3 == 0);
        let c = classify(&g.system, None);
        ensure!(
            !c.io_acyclic || c.idb_acyclic,
            "system {k}: IO-acyclic but cyclic rule base"
        );
        io_acyclic += c.io_acyclic as usize;
        total += 1;
    }
    for name in ["example3", "routing5", "chain(3)"] {
        let sys = builtin(name)
            .and_then(|s| s.build())
            .map_err(|e| e.to_string())?;
        let c = classify(&sys, None);
        ensure!(!c.io_acyclic || c.idb_acyclic, "{name}");
    }
    Ok(format!(
        "{total} systems ({io_acyclic} IO-acyclic), 0 violations"
    ))
}

fn chain_trend() -> Check {
    let mut prev = None;
    let mut counts = Vec::new();
    let q = Atom::prop("q");
    for n in [2, 4, 8, 16] {
        let sys = chain_system(n);
        let t = run_fair(&sys, &[], FairOptions::default()).map_err(|e| e.to_string())?;
        let fix = detect_fixpoint(&t).ok_or(format!("n={n}: no fixpoint"))?;
        let r = rounds_to_fixpoint(&t).expect("fixpoint");
        if let Some(p) = prev {
            ensure!(r > p, "n={n}: {r} rounds, not more than {p}");
        }
        prev = Some(r);
        counts.push(r);
        for round in t.rounds().iter().filter(|r| r.start < fix) {
            ensure!(
                t.model(round.start, 0).contains(&q),
                "n={n}: q missing at boundary {}",
                round.start
            );
        }
        let settle = (0..=fix)
            .rev()
            .take_while(|&k| t.model(k, 0) == t.model(fix, 0))
            .last()
            .expect("fix");
        ensure!(
            (0..settle).all(|k| t.model(k, 0).contains(&q)),
            "n={n}: q missing before A1 settles"
        );
        let reference =
            superagent_model(&superagent(&sys), &BTreeSet::new()).map_err(|e| e.to_string())?;
        ensure!(
            !reference.model.contains(&q),
            "n={n}: q in superagent model"
        );
        ensure!(
            !t.model(fix, 0).contains(&q),
            "n={n}: q still held at fixpoint"
        );
    }
    Ok(format!("rounds to fixpoint {counts:?}"))
}

fn export_bytes(
    sys: &MultiAgentSystem,
    t: &Trace,
    meta: &RunMeta,
    tracks: &[FamilyPattern],
) -> Result<Vec<u8>, String> {
    let v = verdict(sys, t, tracks).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    write_trace(&mut out, sys, t, &v, meta).map_err(|e| e.to_string())?;
    Ok(out)
}

fn replay_determinism() -> Check {
    let mut cases: Vec<(String, MultiAgentSystem, Trace, RunMeta, Vec<FamilyPattern>)> = Vec::new();
    let meta = |name: &str, policy| RunMeta {
        scenario: name.into(),
        dmax: None,
        policy,
        max_rounds: None,
    };
    for name in ["example3", "routing5-example6-script", "chain(4)"] {
        let sc = builtin(name).map_err(|e| e.to_string())?;
        let sys = sc.build().map_err(|e| e.to_string())?;
        for policy in [Policy::RoundRobin, Policy::Shuffled { seed: 9 }] {
            let prefix = run_scripted(&sys, sc.script.clone()).map_err(|e| e.to_string())?;
            let t = continue_fair(
                &sys,
                prefix,
                &sc.timed,
                FairOptions {
                    max_rounds: None,
                    policy,
                },
            )
            .map_err(|e| e.to_string())?;
            cases.push((
                name.into(),
                sys.clone(),
                t,
                meta(name, policy),
                sc.tracks.clone(),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..20 {
        let g = common::random_system(&mut rng, k % 2 == 0);
        let policy = Policy::Shuffled { seed: k };
        let t = run_fair(
            &g.system,
            &g.env_script,
            FairOptions {
                max_rounds: Some(30),
                policy,
            },
        )
        .map_err(|e| e.to_string())?;
        cases.push((
            format!("random-{k}"),
            g.system,
            t,
            meta("random", policy),
            Vec::new(),
        ));
    }
    for (name, sys, t, meta, tracks) in &cases {
        let first = export_bytes(sys, t, meta, tracks)?;
        let text = String::from_utf8(first.clone()).map_err(|e| e.to_string())?;
        let rec = read_trace(&text).map_err(|e| format!("{name}: {e}"))?;
        let again = replay(sys, &rec).map_err(|e| format!("{name}: {e}"))?;
        let second = export_bytes(sys, &again, &rec.meta, tracks)?;
        ensure!(first == second, "{name}: replayed trace differs");
    }
    Ok(format!(
        "{} traces re-exported byte-identically",
        cases.len()
    ))
}

fn main() -> ExitCode {
    let checks: [Criterion; 9] = [
        (
            "two-agent table replay",
            example3_table,
            Some(Duration::from_secs(1)),
        ),
        (
            "weak-stabilization refutation",
            weak_stabilization_refutation,
            Some(Duration::from_secs(1)),
        ),
        (
            "count-to-infinity replay",
            count_to_infinity_replay,
            Some(Duration::from_secs(2)),
        ),
        (
            "routing correctness at quiescence",
            routing_correctness,
            Some(Duration::from_secs(2)),
        ),
        (
            "stable-model oracle equivalence",
            oracle_equivalence,
            Some(Duration::from_secs(60)),
        ),
        (
            "acyclic-system convergence suite",
            acyclic_convergence_suite,
            Some(Duration::from_secs(120)),
        ),
        (
            "IO-acyclic implies acyclic rule base",
            io_acyclic_rule_bases,
            None,
        ),
        (
            "chain non-stabilization trend",
            chain_trend,
            Some(Duration::from_secs(10)),
        ),
        ("replay determinism", replay_determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if took > *l => Err(format!("took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS {} {name} ({took:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({took:.2?}): {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
