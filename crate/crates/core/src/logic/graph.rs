use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::atom::Atom;
use super::program::GroundProgram;
use super::LogicError;

/// Longest outgoing path length of an atom, or `Infinite` when the atom can
/// reach a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Height {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(n) => write!(f, "{n}"),
            Height::Infinite => f.write_str("infinite"),
        }
    }
}

/// Atom dependency graph: an edge `a -> b` for every clause with head `a`
/// mentioning `b` (positively or negatively) in its body.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<Atom>,
    index: HashMap<Atom, usize>,
    succ: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    pub fn from_program(p: &GroundProgram) -> Self {
        let mut g = DependencyGraph::with_nodes(p.universe().iter().cloned());
        for c in p.clauses() {
            let h = g.index[c.head()];
            for l in c.body() {
                let b = g.index[&l.atom];
                g.succ[h].insert(b);
            }
        }
        g
    }

    fn with_nodes(nodes: impl IntoIterator<Item = Atom>) -> Self {
        let nodes: Vec<Atom> = nodes
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = nodes
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let succ = vec![BTreeSet::new(); nodes.len()];
        DependencyGraph { nodes, index, succ }
    }

    pub fn nodes(&self) -> &[Atom] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.index.contains_key(a)
    }

    pub fn has_edge(&self, from: &Atom, to: &Atom) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&f), Some(&t)) => self.succ[f].contains(&t),
            _ => false,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Atom, &Atom)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(move |(f, ts)| ts.iter().map(move |&t| (&self.nodes[f], &self.nodes[t])))
    }

    pub fn successors(&self, a: &Atom) -> impl Iterator<Item = &Atom> {
        self.index
            .get(a)
            .into_iter()
            .flat_map(move |&i| self.succ[i].iter().map(move |&j| &self.nodes[j]))
    }

    /// Finite graphs have an infinite path iff they have a cycle.
    pub fn is_acyclic(&self) -> bool {
        self.leaves_first_order().is_some()
    }

    /// Node indices ordered so every node comes after all of its successors,
    /// or `None` if the graph has a cycle.
    pub(crate) fn leaves_first_order(&self) -> Option<Vec<usize>> {
        let (order, _) = self.peel();
        (order.len() == self.nodes.len()).then_some(order)
    }

    /// Repeatedly removes sink nodes. Returns the removal order and the
    /// finite heights of removed nodes; nodes never removed reach a cycle.
    fn peel(&self) -> (Vec<usize>, Vec<Option<usize>>) {
        let n = self.nodes.len();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut outdeg = vec![0usize; n];
        for (f, ts) in self.succ.iter().enumerate() {
            outdeg[f] = ts.len();
            for &t in ts {
                pred[t].push(f);
            }
        }
        let mut height: Vec<Option<usize>> = vec![None; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| outdeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            let h = self.succ[v]
                .iter()
                .map(|&s| height[s].expect("successor peeled first") + 1)
                .max()
                .unwrap_or(0);
            height[v] = Some(h);
            order.push(v);
            for &p in &pred[v] {
                outdeg[p] -= 1;
                if outdeg[p] == 0 {
                    queue.push_back(p);
                }
            }
        }
        (order, height)
    }

    pub fn heights(&self) -> Vec<(Atom, Height)> {
        let (_, h) = self.peel();
        self.nodes
            .iter()
            .cloned()
            .zip(
                h.into_iter()
                    .map(|h| h.map_or(Height::Infinite, Height::Finite)),
            )
            .collect()
    }

    pub fn height(&self, a: &Atom) -> Result<Height, LogicError> {
        let i = *self
            .index
            .get(a)
            .ok_or_else(|| LogicError::UnknownAtom(a.clone()))?;
        let (_, h) = self.peel();
        Ok(h[i].map_or(Height::Infinite, Height::Finite))
    }

    /// Atoms reachable from `a` by a path of length at least one. `a` itself is
    /// included only when it lies on a cycle.
    pub fn relevant_atoms(&self, a: &Atom) -> Result<BTreeSet<Atom>, LogicError> {
        let i = *self
            .index
            .get(a)
            .ok_or_else(|| LogicError::UnknownAtom(a.clone()))?;
        Ok(self
            .reach(self.succ[i].iter().copied())
            .into_iter()
            .map(|j| self.nodes[j].clone())
            .collect())
    }

    /// Indices reachable from (and including) the given start nodes.
    fn reach(&self, start: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = start.into_iter().collect();
        while let Some(v) = stack.pop() {
            if seen.insert(v) {
                stack.extend(self.succ[v].iter().copied().filter(|s| !seen.contains(s)));
            }
        }
        seen
    }

    /// All nodes reachable from `roots` by paths of length zero or more.
    pub fn closure_from<'a>(&self, roots: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Atom> {
        let start: Vec<usize> = roots
            .into_iter()
            .filter_map(|a| self.index.get(a).copied())
            .collect();
        self.reach(start)
            .into_iter()
            .map(|j| self.nodes[j].clone())
            .collect()
    }

    /// Induced subgraph on `keep` (atoms outside the graph are added as
    /// isolated nodes).
    pub fn restrict(&self, keep: &BTreeSet<Atom>) -> DependencyGraph {
        let mut g = DependencyGraph::with_nodes(keep.iter().cloned());
        for (f, t) in self.edges() {
            if let (Some(&fi), Some(&ti)) = (g.index.get(f), g.index.get(t)) {
                g.succ[fi].insert(ti);
            }
        }
        g
    }
}

impl fmt::Debug for DependencyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DependencyGraph")
            .field("nodes", &self.nodes)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_program;

    fn example3() -> DependencyGraph {
        let p = parse_program("a :- b, c. f :- a. b :- a, d. b :- e.").unwrap();
        DependencyGraph::from_program(&p)
    }

    fn set(xs: &[&str]) -> BTreeSet<Atom> {
        xs.iter().map(|s| Atom::parse(s)).collect()
    }

    #[test]
    fn edges_of_the_two_agent_program() {
        let g = example3();
        let edges: BTreeSet<(String, String)> = g
            .edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let want: BTreeSet<(String, String)> = [
            ("a", "b"),
            ("a", "c"),
            ("f", "a"),
            ("b", "a"),
            ("b", "d"),
            ("b", "e"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(edges, want);
        assert!(!g.is_acyclic());
    }

    #[test]
    fn empty_and_singleton_graphs() {
        let g = DependencyGraph::from_program(&GroundProgram::default());
        assert_eq!(g.node_count(), 0);
        assert!(g.is_acyclic());
        let g = DependencyGraph::from_program(&parse_program("a.").unwrap());
        assert!(g.is_acyclic());
        assert_eq!(g.relevant_atoms(&Atom::prop("a")).unwrap(), BTreeSet::new());
    }

    #[test]
    fn negative_literals_induce_edges() {
        let g = DependencyGraph::from_program(&parse_program("a :- not b.").unwrap());
        assert!(g.has_edge(&Atom::prop("a"), &Atom::prop("b")));
    }

    #[test]
    fn heights_in_example3() {
        let g = example3();
        assert_eq!(g.height(&Atom::prop("c")).unwrap(), Height::Finite(0));
        assert_eq!(g.height(&Atom::prop("f")).unwrap(), Height::Infinite);
        assert_eq!(g.height(&Atom::prop("a")).unwrap(), Height::Infinite);
        assert!(matches!(
            g.height(&Atom::prop("zz")),
            Err(LogicError::UnknownAtom(_))
        ));
    }

    #[test]
    fn relevance_uses_nonempty_paths() {
        let g = example3();
        assert_eq!(
            g.relevant_atoms(&Atom::prop("a")).unwrap(),
            set(&["a", "b", "c", "d", "e"])
        );
        assert_eq!(
            g.relevant_atoms(&Atom::prop("f")).unwrap(),
            set(&["a", "b", "c", "d", "e"])
        );
        assert_eq!(g.relevant_atoms(&Atom::prop("c")).unwrap(), BTreeSet::new());
    }

    #[test]
    fn chain_heights() {
        let g =
            DependencyGraph::from_program(&parse_program("a :- b. b :- c. c :- not d.").unwrap());
        assert_eq!(g.height(&Atom::prop("a")).unwrap(), Height::Finite(3));
        assert_eq!(g.height(&Atom::prop("d")).unwrap(), Height::Finite(0));
    }
}
