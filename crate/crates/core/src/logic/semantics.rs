use std::collections::{BTreeSet, HashMap};

use super::atom::{Atom, Clause, Literal};
use super::graph::DependencyGraph;
use super::program::{GroundProgram, Interpretation};
use super::LogicError;

/// Default universe cap for [`stable_models_bruteforce`].
pub const DEFAULT_BRUTEFORCE_CAP: usize = 20;

pub fn head_set(p: &GroundProgram) -> BTreeSet<Atom> {
    p.heads()
}

/// Gelfond-Lifschitz reduct `P^S`: drop every clause with a body literal
/// `not b` where `b ∈ S`, then strip the remaining negative literals.
pub fn gl_reduct(p: &GroundProgram, s: &Interpretation) -> GroundProgram {
    let clauses = p
        .clauses()
        .filter(|c| c.negative_body().all(|b| !s.contains(b)))
        .map(|c| {
            Clause::new(
                c.head().clone(),
                c.positive_body().cloned().map(Literal::pos).collect(),
            )
        });
    GroundProgram::new(clauses).with_universe(p.universe().iter().cloned())
}

/// Least model of a negation-free program by forward chaining.
pub fn least_model(p: &GroundProgram) -> Result<Interpretation, LogicError> {
    if !p.is_negation_free() {
        return Err(LogicError::NotNegationFree);
    }
    // Each clause waits on its number of not-yet-derived body atoms.
    let clauses: Vec<&Clause> = p.clauses().collect();
    let mut waiting: HashMap<&Atom, Vec<usize>> = HashMap::new();
    let mut missing: Vec<usize> = Vec::with_capacity(clauses.len());
    let mut agenda: Vec<&Atom> = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let body: BTreeSet<&Atom> = c.positive_body().collect();
        missing.push(body.len());
        for b in body {
            waiting.entry(b).or_default().push(i);
        }
        if c.is_fact() {
            agenda.push(c.head());
        }
    }
    let mut model: BTreeSet<Atom> = BTreeSet::new();
    while let Some(a) = agenda.pop() {
        if model.contains(a) {
            continue;
        }
        model.insert(a.clone());
        if let Some(ws) = waiting.get(a) {
            for &i in ws {
                missing[i] -= 1;
                if missing[i] == 0 {
                    agenda.push(clauses[i].head());
                }
            }
        }
    }
    Ok(Interpretation::from(model))
}

pub fn is_stable_model(p: &GroundProgram, s: &Interpretation) -> bool {
    let reduct = gl_reduct(p, s);
    least_model(&reduct).expect("reduct is negation-free") == *s
}

/// Every stable model of `p`, found by testing all subsets of its universe.
/// Models are returned in ascending canonical order.
pub fn stable_models_bruteforce(
    p: &GroundProgram,
    cap: usize,
) -> Result<Vec<Interpretation>, LogicError> {
    let universe: Vec<&Atom> = p.universe().iter().collect();
    let n = universe.len();
    if n > cap || n > 63 {
        return Err(LogicError::UniverseTooLarge {
            size: n,
            cap: cap.min(63),
        });
    }
    let index: HashMap<&Atom, usize> = universe.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let bit = |a: &Atom| 1u64 << index[a];
    // (head, positive body mask, negative body mask)
    let compiled: Vec<(u64, u64, u64)> = p
        .clauses()
        .map(|c| {
            (
                bit(c.head()),
                c.positive_body().fold(0, |m, a| m | bit(a)),
                c.negative_body().fold(0, |m, a| m | bit(a)),
            )
        })
        .collect();
    let mut models = Vec::new();
    for s in 0u64..(1u64 << n) {
        let mut m = 0u64;
        loop {
            let next = compiled
                .iter()
                .filter(|&&(_, _, neg)| neg & s == 0)
                .filter(|&&(_, pos, _)| pos & m == pos)
                .fold(m, |acc, &(h, _, _)| acc | h);
            if next == m {
                break;
            }
            m = next;
        }
        if m == s {
            models.push(Interpretation::new(
                (0..n)
                    .filter(|i| s >> i & 1 == 1)
                    .map(|i| universe[i].clone()),
            ));
        }
    }
    models.sort();
    Ok(models)
}

/// The unique stable model of an acyclic program.
pub fn stable_model_acyclic(p: &GroundProgram) -> Result<Interpretation, LogicError> {
    Ok(AcyclicEvaluator::new(p)?.evaluate(std::iter::empty()))
}

/// Precompiled evaluation order for an acyclic program. Additional fact
/// atoms can be supplied per evaluation; they never create cycles because
/// facts have empty bodies.
#[derive(Debug, Clone)]
pub struct AcyclicEvaluator {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    order: Vec<usize>,
    /// Clause bodies per head index: (positive atoms, negative atoms).
    rules: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
}

impl AcyclicEvaluator {
    pub fn new(p: &GroundProgram) -> Result<Self, LogicError> {
        let graph = DependencyGraph::from_program(p);
        let order = graph.leaves_first_order().ok_or(LogicError::Cyclic)?;
        let atoms: Vec<Atom> = graph.nodes().to_vec();
        let index: HashMap<Atom, usize> = atoms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let mut rules = vec![Vec::new(); atoms.len()];
        for c in p.clauses() {
            let pos = c.positive_body().map(|a| index[a]).collect();
            let neg = c.negative_body().map(|a| index[a]).collect();
            rules[index[c.head()]].push((pos, neg));
        }
        Ok(AcyclicEvaluator {
            atoms,
            index,
            order,
            rules,
        })
    }

    /// Stable model of the compiled program extended with `facts`.
    pub fn evaluate<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> Interpretation {
        let mut value = vec![false; self.atoms.len()];
        let mut outside = BTreeSet::new();
        for a in facts {
            match self.index.get(a) {
                Some(&i) => value[i] = true,
                None => {
                    outside.insert(a.clone());
                }
            }
        }
        for &v in &self.order {
            if value[v] {
                continue;
            }
            value[v] = self.rules[v]
                .iter()
                .any(|(pos, neg)| pos.iter().all(|&b| value[b]) && neg.iter().all(|&b| !value[b]));
        }
        let mut model: BTreeSet<Atom> = self
            .atoms
            .iter()
            .zip(&value)
            .filter(|(_, &t)| t)
            .map(|(a, _)| a.clone())
            .collect();
        model.append(&mut outside);
        Interpretation::from(model)
    }
}
