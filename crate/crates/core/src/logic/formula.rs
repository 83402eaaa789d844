use std::collections::BTreeSet;
use std::fmt;

/// The two terms of the language: the bound variable and the single constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var,
    Const,
}

impl Term {
    pub fn symbol(self) -> &'static str {
        match self {
            Term::Var => "x",
            Term::Const => "a",
        }
    }
}

/// A monadic first-order formula.
///
/// Predicates are plain strings: placeholder symbols (`F`, `G1`, ...) inside a
/// scheme, realized lexemes (`sister of Anna`) once a binding is substituted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom { pred: String, term: Term },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(Box<Formula>),
    Exists(Box<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, term: Term) -> Self {
        Formula::Atom {
            pred: pred.into(),
            term,
        }
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn forall(body: Formula) -> Self {
        Formula::ForAll(Box::new(body))
    }

    pub fn exists(body: Formula) -> Self {
        Formula::Exists(Box::new(body))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom { .. } => vec![],
            Formula::Not(f) | Formula::ForAll(f) | Formula::Exists(f) => vec![f],
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => vec![l, r],
        }
    }

    pub fn child(&self, idx: usize) -> Option<&Formula> {
        self.children().get(idx).copied()
    }

    pub fn child_mut(&mut self, idx: usize) -> Option<&mut Formula> {
        match (self, idx) {
            (Formula::Not(f) | Formula::ForAll(f) | Formula::Exists(f), 0) => Some(f),
            (Formula::And(l, _) | Formula::Or(l, _) | Formula::Implies(l, _), 0) => Some(l),
            (Formula::And(_, r) | Formula::Or(_, r) | Formula::Implies(_, r), 1) => Some(r),
            _ => None,
        }
    }

    /// Sub-formula reached by following child indices from the root.
    pub fn at(&self, path: &[usize]) -> Option<&Formula> {
        path.iter().try_fold(self, |f, &i| f.child(i))
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Formula> {
        let mut cur = self;
        for &i in path {
            cur = cur.child_mut(i)?;
        }
        Some(cur)
    }

    /// Predicate names in order of first occurrence.
    pub fn predicates(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_predicates(&mut out);
        out
    }

    pub(crate) fn collect_predicates(&self, out: &mut Vec<String>) {
        match self {
            Formula::Atom { pred, .. } => {
                if !out.contains(pred) {
                    out.push(pred.clone());
                }
            }
            _ => {
                for c in self.children() {
                    c.collect_predicates(out);
                }
            }
        }
    }

    pub fn mentions_constant(&self) -> bool {
        match self {
            Formula::Atom { term, .. } => *term == Term::Const,
            _ => self.children().iter().any(|c| c.mentions_constant()),
        }
    }

    /// True when every occurrence of `x` sits under a quantifier.
    pub fn is_closed(&self) -> bool {
        fn go(f: &Formula, bound: bool) -> bool {
            match f {
                Formula::Atom { term, .. } => bound || *term == Term::Const,
                Formula::ForAll(b) | Formula::Exists(b) => go(b, true),
                _ => f.children().iter().all(|c| go(c, bound)),
            }
        }
        go(self, false)
    }

    /// Renames predicates through `f`; structure is untouched.
    pub fn map_predicates(&self, f: &mut impl FnMut(&str) -> String) -> Formula {
        match self {
            Formula::Atom { pred, term } => Formula::Atom {
                pred: f(pred),
                term: *term,
            },
            Formula::Not(a) => Formula::not(a.map_predicates(f)),
            Formula::And(l, r) => Formula::and(l.map_predicates(f), r.map_predicates(f)),
            Formula::Or(l, r) => Formula::or(l.map_predicates(f), r.map_predicates(f)),
            Formula::Implies(l, r) => Formula::implies(l.map_predicates(f), r.map_predicates(f)),
            Formula::ForAll(b) => Formula::forall(b.map_predicates(f)),
            Formula::Exists(b) => Formula::exists(b.map_predicates(f)),
        }
    }

    /// Paths of all atoms whose predicate is `pred`.
    pub fn atom_paths(&self, pred: &str) -> Vec<Vec<usize>> {
        fn go(f: &Formula, pred: &str, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if let Formula::Atom { pred: p, .. } = f {
                if p == pred {
                    out.push(path.clone());
                }
                return;
            }
            for (i, c) in f.children().into_iter().enumerate() {
                path.push(i);
                go(c, pred, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(self, pred, &mut Vec::new(), &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::ForAll(_) | Formula::Exists(_) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) => 4,
            Formula::Atom { .. } => 5,
        }
    }
}

pub(crate) fn predicate_set<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<String> {
    let mut out = Vec::new();
    for f in formulas {
        f.collect_predicates(&mut out);
    }
    out.into_iter().collect()
}

/// Canonical printer; its output parses back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(out: &mut fmt::Formatter<'_>, child: &Formula, min_prec: u8) -> fmt::Result {
            if child.precedence() < min_prec {
                write!(out, "({child})")
            } else {
                write!(out, "{child}")
            }
        }
        match self {
            Formula::Atom { pred, term } => write!(f, "{pred} {}", term.symbol()),
            Formula::Not(a) => {
                write!(f, "not ")?;
                wrap(f, a, 4)
            }
            // `&` and `v` associate to the left, `->` to the right
            Formula::And(l, r) => {
                wrap(f, l, 3)?;
                write!(f, " & ")?;
                wrap(f, r, 4)
            }
            Formula::Or(l, r) => {
                wrap(f, l, 2)?;
                write!(f, " v ")?;
                wrap(f, r, 3)
            }
            Formula::Implies(l, r) => {
                wrap(f, l, 2)?;
                write!(f, " -> ")?;
                wrap(f, r, 1)
            }
            Formula::ForAll(b) => write!(f, "(x): {b}"),
            Formula::Exists(b) => write!(f, "(Ex): {b}"),
        }
    }
}
