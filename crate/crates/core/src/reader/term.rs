//! The universal syntax value: Prolog terms with optional source positions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

/// A position in a source file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcePos {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourcePos {
    pub fn new(file: impl Into<Arc<str>>, line: u32, column: u32) -> SourcePos {
        debug_assert!(line >= 1 && column >= 1);
        SourcePos {
            file: file.into(),
            line,
            column,
        }
    }

    /// Position (1,1) in the given file.
    pub fn start(file: impl Into<Arc<str>>) -> SourcePos {
        SourcePos::new(file, 1, 1)
    }
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// The term variants. A `Compound` always has at least one argument; an
/// atom is never a zero-arity compound.
#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    Atom(String),
    Var(String),
    Int(BigInt),
    Float(f64),
    Str(String),
    Compound(String, Vec<Term>),
}

/// A Prolog term plus the position it was read from, if any.
///
/// Equality ignores positions: two terms compare equal iff they are
/// structurally identical (same variable names included).
#[derive(Debug, Clone)]
pub struct Term {
    pub kind: TermKind,
    pub pos: Option<SourcePos>,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Term {
    pub fn atom(name: impl Into<String>) -> Term {
        Term {
            kind: TermKind::Atom(name.into()),
            pos: None,
        }
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term {
            kind: TermKind::Var(name.into()),
            pos: None,
        }
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term {
            kind: TermKind::Int(value.into()),
            pos: None,
        }
    }

    pub fn float(value: f64) -> Term {
        Term {
            kind: TermKind::Float(value),
            pos: None,
        }
    }

    pub fn string(value: impl Into<String>) -> Term {
        Term {
            kind: TermKind::Str(value.into()),
            pos: None,
        }
    }

    /// Builds a compound term. Panics on an empty argument list: a
    /// zero-arity compound is not representable.
    pub fn compound(functor: impl Into<String>, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "compound terms require arity >= 1");
        Term {
            kind: TermKind::Compound(functor.into(), args),
            pos: None,
        }
    }

    /// Builds a proper list from items, terminated by `[]`.
    pub fn list(items: Vec<Term>) -> Term {
        Term::partial_list(items, Term::atom("[]"))
    }

    /// Builds `[I1, I2, ... | Tail]`.
    pub fn partial_list(items: Vec<Term>, tail: Term) -> Term {
        items.into_iter().rev().fold(tail, |acc, item| {
            Term::compound(".", vec![item, acc])
        })
    }

    pub fn with_pos(mut self, pos: SourcePos) -> Term {
        self.pos = Some(pos);
        self
    }

    pub fn is_atom(&self, name: &str) -> bool {
        matches!(&self.kind, TermKind::Atom(n) if n == name)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match &self.kind {
            TermKind::Atom(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(&self.kind, TermKind::Var(_))
    }

    /// Name and arity if the term is an atom (arity 0) or compound.
    pub fn functor_arity(&self) -> Option<(&str, usize)> {
        match &self.kind {
            TermKind::Atom(n) => Some((n, 0)),
            TermKind::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match &self.kind {
            TermKind::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// The compound `functor(args...)` matcher: returns the arguments iff
    /// the term is a compound with the given functor and arity.
    pub fn match_compound(&self, functor: &str, arity: usize) -> Option<&[Term]> {
        match &self.kind {
            TermKind::Compound(f, args) if f == functor && args.len() == arity => Some(args),
            _ => None,
        }
    }

    /// Walks a `'.'/2` chain. Returns the items and the tail term
    /// (`[]` for a proper list).
    pub fn list_items(&self) -> (Vec<&Term>, &Term) {
        let mut items = Vec::new();
        let mut cur = self;
        while let Some(args) = cur.match_compound(".", 2) {
            items.push(&args[0]);
            cur = &args[1];
        }
        (items, cur)
    }

    /// True for atoms and compounds.
    pub fn is_callable(&self) -> bool {
        matches!(
            &self.kind,
            TermKind::Atom(_) | TermKind::Compound(_, _)
        )
    }

    /// True when no variable occurs anywhere in the term.
    pub fn is_ground(&self) -> bool {
        match &self.kind {
            TermKind::Var(_) => false,
            TermKind::Compound(_, args) => args.iter().all(Term::is_ground),
            _ => true,
        }
    }

    /// Interprets the term as a predicate indicator `Name/Arity`.
    pub fn as_indicator(&self) -> Option<Indicator> {
        let args = self.match_compound("/", 2)?;
        let name = args[0].as_atom()?;
        let arity = match &args[1].kind {
            TermKind::Int(i) if i.sign() != num_bigint::Sign::Minus => {
                usize::try_from(u64::try_from(i).ok()?).ok()?
            }
            _ => return None,
        };
        Some(Indicator::new(name, arity))
    }

    /// Structural identity up to a consistent (bijective) renaming of
    /// variables.
    pub fn variant_of(&self, other: &Term) -> bool {
        fn go(
            a: &Term,
            b: &Term,
            fwd: &mut std::collections::HashMap<String, String>,
            bwd: &mut std::collections::HashMap<String, String>,
        ) -> bool {
            match (&a.kind, &b.kind) {
                (TermKind::Var(x), TermKind::Var(y)) => {
                    let f = fwd.entry(x.clone()).or_insert_with(|| y.clone());
                    let r = bwd.entry(y.clone()).or_insert_with(|| x.clone());
                    f == y && r == x
                }
                (TermKind::Compound(f, xs), TermKind::Compound(g, ys)) => {
                    f == g
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| go(x, y, fwd, bwd))
                }
                (x, y) => x == y,
            }
        }
        go(
            self,
            other,
            &mut std::collections::HashMap::new(),
            &mut std::collections::HashMap::new(),
        )
    }
}

/// A predicate indicator: name/arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Indicator {
    pub name: String,
    pub arity: usize,
}

impl Indicator {
    pub fn new(name: impl Into<String>, arity: usize) -> Indicator {
        Indicator {
            name: name.into(),
            arity,
        }
    }

    /// Parses `name/arity` text, e.g. `member/2`.
    pub fn parse(s: &str) -> Option<Indicator> {
        let (name, arity) = s.rsplit_once('/')?;
        if name.is_empty() {
            return None;
        }
        Some(Indicator::new(name, arity.trim().parse::<usize>().ok()?))
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_positions() {
        let a = Term::atom("x").with_pos(SourcePos::new("f", 1, 1));
        let b = Term::atom("x").with_pos(SourcePos::new("g", 9, 9));
        assert_eq!(a, b);
    }

    #[test]
    fn list_construction_roundtrips() {
        let l = Term::list(vec![Term::atom("a"), Term::atom("b")]);
        let (items, tail) = l.list_items();
        assert_eq!(items.len(), 2);
        assert!(tail.is_atom("[]"));
    }

    #[test]
    fn indicator_from_term() {
        let t = Term::compound("/", vec![Term::atom("member"), Term::int(2)]);
        assert_eq!(t.as_indicator(), Some(Indicator::new("member", 2)));
        assert_eq!(Indicator::parse("foo/3"), Some(Indicator::new("foo", 3)));
        assert_eq!(Indicator::parse("nonsense"), None);
    }

    #[test]
    fn variant_requires_bijective_renaming() {
        let a = Term::compound("f", vec![Term::var("X"), Term::var("Y"), Term::var("X")]);
        let b = Term::compound("f", vec![Term::var("A"), Term::var("B"), Term::var("A")]);
        let c = Term::compound("f", vec![Term::var("A"), Term::var("A"), Term::var("A")]);
        assert!(a.variant_of(&b));
        assert!(!a.variant_of(&c));
    }
}
