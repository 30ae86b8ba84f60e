use std::fmt;
use std::sync::Arc;

/// Interned-by-sharing symbol used for predicate names and constants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A ground argument: a bounded natural or a named constant.
///
/// Naturals sort before constants so that `sp(A1,A1,0)` and friends list in a
/// stable order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Nat(u32),
    Sym(Symbol),
}

impl Constant {
    pub fn sym(s: &str) -> Self {
        Constant::Sym(Symbol::new(s))
    }

    pub fn as_nat(&self) -> Option<u32> {
        match self {
            Constant::Nat(n) => Some(*n),
            Constant::Sym(_) => None,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Nat(n) => write!(f, "{n}"),
            Constant::Sym(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A ground atom `pred(c1,...,cn)`. Ordering is by predicate, then arguments
/// lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Constant>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Constant>) -> Self {
        Atom {
            predicate: Symbol::new(predicate),
            args,
        }
    }

    /// A zero-arity atom such as `a`.
    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    /// Parses a single ground atom, e.g. `sp(A1,A5,2)`.
    ///
    /// Panics on malformed input; intended for tests and literals in code.
    pub fn parse(text: &str) -> Self {
        crate::logic::parse::parse_atom(text).unwrap_or_else(|e| panic!("bad atom {text:?}: {e}"))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl serde::Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "not {}", self.atom)
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `head :- body`. The body is kept sorted and free of duplicates so that
/// structurally equal clauses compare equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    head: Atom,
    body: Vec<Literal>,
}

impl Clause {
    pub fn new(head: Atom, mut body: Vec<Literal>) -> Self {
        body.sort();
        body.dedup();
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Self {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn head(&self) -> &Atom {
        &self.head
    }

    pub fn body(&self) -> &[Literal] {
        &self.body
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn positive_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| l.positive).map(|l| &l.atom)
    }

    pub fn negative_body(&self) -> impl Iterator<Item = &Atom> {
        self.body.iter().filter(|l| !l.positive).map(|l| &l.atom)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(self.body.iter().map(|l| &l.atom))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atom_order_is_predicate_then_args() {
        let a = Atom::parse("sp(A1,A1,0)");
        let b = Atom::parse("sp(A1,A2,1)");
        let c = Atom::parse("spl(A1,A1,1)");
        assert!(a < b);
        assert!(b < c);
        assert!(Atom::parse("a") < Atom::parse("b"));
    }

    #[test]
    fn clause_body_is_normalized() {
        let c1 = Clause::new(
            Atom::prop("a"),
            vec![
                Literal::pos(Atom::prop("c")),
                Literal::pos(Atom::prop("b")),
                Literal::pos(Atom::prop("c")),
            ],
        );
        let c2 = Clause::new(
            Atom::prop("a"),
            vec![Literal::pos(Atom::prop("b")), Literal::pos(Atom::prop("c"))],
        );
        assert_eq!(c1, c2);
        assert_eq!(c1.body().len(), 2);
        assert_eq!(c1.to_string(), "a :- b, c.");
    }
}
