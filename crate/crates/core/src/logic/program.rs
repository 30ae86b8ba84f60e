use std::collections::BTreeSet;
use std::fmt;

use super::atom::{Atom, Clause};

/// A finite set of ground clauses together with the slice of the Herbrand
/// base it is interpreted over. Every atom of every clause is in the universe.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    clauses: BTreeSet<Clause>,
    universe: BTreeSet<Atom>,
}

impl GroundProgram {
    pub fn new(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut p = GroundProgram::default();
        for c in clauses {
            p.insert(c);
        }
        p
    }

    pub fn with_universe(mut self, extra: impl IntoIterator<Item = Atom>) -> Self {
        self.universe.extend(extra);
        self
    }

    pub fn insert(&mut self, clause: Clause) {
        for a in clause.atoms() {
            if !self.universe.contains(a) {
                self.universe.insert(a.clone());
            }
        }
        self.clauses.insert(clause);
    }

    /// `self ∪ {a. | a ∈ facts}`.
    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut p = self.clone();
        for a in facts {
            p.insert(Clause::fact(a.clone()));
        }
        p
    }

    pub fn union(&self, other: &GroundProgram) -> Self {
        let mut p = self.clone();
        for c in &other.clauses {
            p.insert(c.clone());
        }
        p.universe.extend(other.universe.iter().cloned());
        p
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn clause_set(&self) -> &BTreeSet<Clause> {
        &self.clauses
    }

    pub fn universe(&self) -> &BTreeSet<Atom> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_negation_free(&self) -> bool {
        self.clauses
            .iter()
            .all(|c| c.negative_body().next().is_none())
    }

    /// `head(P)`.
    pub fn heads(&self) -> BTreeSet<Atom> {
        self.clauses.iter().map(|c| c.head().clone()).collect()
    }

    /// The definition of `a`: every clause whose head is `a`.
    pub fn definition(&self, a: &Atom) -> BTreeSet<Clause> {
        self.clauses
            .iter()
            .filter(|c| c.head() == a)
            .cloned()
            .collect()
    }
}

impl fmt::Display for GroundProgram {
    /// One clause per line, in canonical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroundProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.clauses.iter()).finish()
    }
}

/// A set of true atoms.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(BTreeSet<Atom>);

impl serde::Serialize for Interpretation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(&self.0)
    }
}

impl Interpretation {
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        Interpretation(atoms.into_iter().collect())
    }

    /// Builds an interpretation from atom literals, e.g. `["a", "sp(A1,A1,0)"]`.
    pub fn parse<'a>(atoms: impl IntoIterator<Item = &'a str>) -> Self {
        Interpretation(atoms.into_iter().map(Atom::parse).collect())
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.0.contains(a)
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn into_atoms(self) -> BTreeSet<Atom> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }
}

impl From<BTreeSet<Atom>> for Interpretation {
    fn from(s: BTreeSet<Atom>) -> Self {
        Interpretation(s)
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
