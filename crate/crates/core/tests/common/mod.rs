//! Random ground programs and multiagent systems for the property suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use agentstab_core::agents::{AgentSpec, AgentState, EnvChange};
use agentstab_core::logic::{Atom, Clause, GroundProgram, Literal};
use agentstab_core::runtime::TimedChange;
use agentstab_core::system::{build_system, MultiAgentSystem};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn atom(i: usize) -> Atom {
    Atom::prop(&format!("p{i}"))
}

fn random_body(
    rng: &mut impl Rng,
    candidates: &[usize],
    max_len: usize,
    neg_prob: f64,
) -> Vec<Literal> {
    let len = rng.gen_range(0..=max_len.min(candidates.len()));
    candidates
        .choose_multiple(rng, len)
        .map(|&j| {
            if rng.gen_bool(neg_prob) {
                Literal::neg(atom(j))
            } else {
                Literal::pos(atom(j))
            }
        })
        .collect()
}

/// Acyclic program over `n` atoms: bodies only mention atoms earlier in a
/// random permutation.
pub fn random_acyclic_program(rng: &mut impl Rng, n: usize) -> GroundProgram {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut clauses = Vec::new();
    for (pos, &h) in order.iter().enumerate() {
        for _ in 0..rng.gen_range(0..=2) {
            let body = random_body(rng, &order[..pos], 3, 0.4);
            clauses.push(Clause::new(atom(h), body));
        }
    }
    GroundProgram::new(clauses).with_universe((0..n).map(atom))
}

/// Program over `n` atoms with arbitrary (possibly cyclic) dependencies.
pub fn random_program(rng: &mut impl Rng, n: usize) -> GroundProgram {
    let all: Vec<usize> = (0..n).collect();
    let clauses = (0..rng.gen_range(0..=2 * n))
        .map(|_| Clause::new(atom(rng.gen_range(0..n)), random_body(rng, &all, 3, 0.5)))
        .collect::<Vec<_>>();
    GroundProgram::new(clauses).with_universe((0..n).map(atom))
}

pub struct GeneratedSystem {
    pub system: MultiAgentSystem,
    pub env_script: Vec<TimedChange>,
}

/// Random well-formed system of 2 to 4 agents over up to 10 atoms.
///
/// With `io_acyclic` every clause body mentions only atoms earlier in one
/// global order, so the superagent and hence the I/O graph are acyclic.
/// Otherwise only each agent's own rule base is kept acyclic.
pub fn random_system(rng: &mut impl Rng, io_acyclic: bool) -> GeneratedSystem {
    let n_agents = rng.gen_range(2..=4);
    let m = rng.gen_range(3..=10);
    // Some(agent) for defined atoms, None for environment atoms.
    let owner: Vec<Option<usize>> = (0..m)
        .map(|_| {
            if rng.gen_bool(0.3) {
                None
            } else {
                Some(rng.gen_range(0..n_agents))
            }
        })
        .collect();
    let sensors: Vec<BTreeSet<usize>> = owner
        .iter()
        .map(|o| match o {
            Some(_) => BTreeSet::new(),
            None => {
                let mut s: BTreeSet<usize> = (0..n_agents).filter(|_| rng.gen_bool(0.4)).collect();
                s.insert(rng.gen_range(0..n_agents));
                s
            }
        })
        .collect();
    let mut truth: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
    let mut clauses: Vec<Vec<Clause>> = vec![Vec::new(); n_agents];
    for i in 0..m {
        let Some(a) = owner[i] else { continue };
        let candidates: Vec<usize> = (0..m)
            .filter(|&j| j != i)
            .filter(|&j| {
                if io_acyclic {
                    j < i
                } else {
                    owner[j] != Some(a) || j < i
                }
            })
            .collect();
        for _ in 0..rng.gen_range(1..=2) {
            let body = random_body(rng, &candidates, 3, 0.35);
            clauses[a].push(Clause::new(atom(i), body));
        }
    }
    let specs = (0..n_agents)
        .map(|a| {
            let idb = GroundProgram::new(clauses[a].clone());
            let heads = idb.heads();
            let hbe: BTreeSet<Atom> = (0..m)
                .filter(|&i| sensors[i].contains(&a))
                .map(atom)
                .collect();
            let hin: BTreeSet<Atom> = clauses[a]
                .iter()
                .flat_map(|c| c.body().iter().map(|l| l.atom.clone()))
                .filter(|x| !heads.contains(x) && !hbe.contains(x))
                .collect();
            let edb: Vec<Atom> = (0..m)
                .filter(|&i| sensors[i].contains(&a) && truth[i])
                .map(atom)
                .collect();
            let input: Vec<Atom> = hin.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
            AgentSpec::new(
                format!("G{a}").as_str(),
                idb,
                hbe,
                hin,
                AgentState::new(edb, input),
            )
        })
        .collect();
    let system = build_system(specs).expect("generated system is well formed");
    let env: Vec<usize> = (0..m).filter(|&i| owner[i].is_none()).collect();
    let mut env_script = Vec::new();
    if !env.is_empty() {
        let mut rounds: Vec<usize> = (0..rng.gen_range(0..=3))
            .map(|_| rng.gen_range(0..=3))
            .collect();
        rounds.sort();
        for after_round in rounds {
            let count = rng.gen_range(1..=env.len());
            let flip: Vec<usize> = env.choose_multiple(rng, count).copied().collect();
            let (mut t, mut f) = (Vec::new(), Vec::new());
            for i in flip {
                truth[i] = !truth[i];
                if truth[i] {
                    t.push(atom(i));
                } else {
                    f.push(atom(i));
                }
            }
            env_script.push(TimedChange {
                after_round,
                change: EnvChange::new(t, f).expect("disjoint"),
            });
        }
    }
    GeneratedSystem { system, env_script }
}
