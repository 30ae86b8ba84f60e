//! Deterministic fixtures shared by the benchmarks.

use agentstab_core::logic::{Atom, Clause, GroundProgram, Literal};

/// Layered acyclic program: `width` atoms per layer, each depending on two
/// atoms of the layer below, one of them negatively.
pub fn layered_program(layers: usize, width: usize) -> GroundProgram {
    let atom = |l: usize, i: usize| Atom::prop(&format!("p{l}_{i}"));
    let mut clauses: Vec<Clause> = (0..width)
        .step_by(2)
        .map(|i| Clause::fact(atom(0, i)))
        .collect();
    for l in 1..layers {
        for i in 0..width {
            let body = vec![
                Literal::pos(atom(l - 1, i)),
                Literal::neg(atom(l - 1, (i + 1) % width)),
            ];
            clauses.push(Clause::new(atom(l, i), body));
            clauses.push(Clause::new(
                atom(l, i),
                vec![Literal::pos(atom(l - 1, (i + 2) % width))],
            ));
        }
    }
    GroundProgram::new(clauses)
        .with_universe((0..layers).flat_map(|l| (0..width).map(move |i| atom(l, i))))
}

/// Ring topology `N1 - N2 - ... - Nn - N1`.
pub fn ring(n: usize) -> agentstab_core::scenarios::Topology {
    let names: Vec<String> = (1..=n).map(|i| format!("N{i}")).collect();
    let nodes: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges: Vec<(&str, &str)> = (0..n).map(|i| (nodes[i], nodes[(i + 1) % n])).collect();
    agentstab_core::scenarios::Topology::new(&nodes, &edges).expect("valid ring")
}
