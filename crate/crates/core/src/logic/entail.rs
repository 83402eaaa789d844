//! Finite-model entailment for the monadic fragment.
//!
//! A structure for k monadic predicates is determined, up to what any sentence
//! can distinguish, by the set of inhabited *types* (subsets of the k
//! predicates) together with the type of the constant. The checker enumerates
//! the constant's type and a truth value for every quantified sub-sentence,
//! then asks whether some inhabited-type set realizes that guess within the
//! domain bound. That covers every interpretation of size at most
//! `max_domain` without materializing them one by one.

use std::collections::{BTreeMap, BTreeSet};

use super::formula::{predicate_set, Formula, Term};
use super::LogicError;

/// Largest predicate alphabet the oracle accepts.
pub const MAX_PREDICATES: usize = 8;

/// An explicit finite interpretation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    domain_size: usize,
    extensions: BTreeMap<String, BTreeSet<usize>>,
    constant: usize,
}

impl Interpretation {
    pub fn new(
        domain_size: usize,
        extensions: BTreeMap<String, BTreeSet<usize>>,
        constant: usize,
    ) -> Result<Self, LogicError> {
        if domain_size == 0 {
            return Err(LogicError::Interpretation("domain must be non-empty".into()));
        }
        if constant >= domain_size {
            return Err(LogicError::Interpretation(format!(
                "constant denotes {constant}, outside a domain of size {domain_size}"
            )));
        }
        for (pred, ext) in &extensions {
            if let Some(bad) = ext.iter().find(|&&e| e >= domain_size) {
                return Err(LogicError::Interpretation(format!(
                    "extension of {pred} contains {bad}, outside a domain of size {domain_size}"
                )));
            }
        }
        Ok(Self {
            domain_size,
            extensions,
            constant,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    fn holds(&self, pred: &str, element: usize) -> bool {
        self.extensions.get(pred).is_some_and(|ext| ext.contains(&element))
    }

    /// Truth of a closed formula. Predicates without an extension are empty.
    pub fn satisfies(&self, f: &Formula) -> bool {
        self.eval(f, None)
    }

    fn eval(&self, f: &Formula, x: Option<usize>) -> bool {
        match f {
            Formula::Atom { pred, term } => {
                let e = match term {
                    Term::Const => self.constant,
                    Term::Var => x.expect("free variable in evaluated formula"),
                };
                self.holds(pred, e)
            }
            Formula::Not(a) => !self.eval(a, x),
            Formula::And(l, r) => self.eval(l, x) && self.eval(r, x),
            Formula::Or(l, r) => self.eval(l, x) || self.eval(r, x),
            Formula::Implies(l, r) => !self.eval(l, x) || self.eval(r, x),
            Formula::ForAll(b) => (0..self.domain_size).all(|d| self.eval(b, Some(d))),
            Formula::Exists(b) => (0..self.domain_size).any(|d| self.eval(b, Some(d))),
        }
    }
}

/// Formula with predicates resolved to bit positions and quantified
/// sub-sentences resolved to guess indices.
enum Compiled {
    Atom { bit: u32, constant: bool },
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Guess(usize),
}

struct Quantifier {
    universal: bool,
    body: Compiled,
}

struct Compiler<'a> {
    alphabet: Vec<String>,
    seen: Vec<&'a Formula>,
    quants: Vec<Option<Quantifier>>,
}

impl<'a> Compiler<'a> {
    fn compile(&mut self, f: &'a Formula) -> Compiled {
        match f {
            Formula::Atom { pred, term } => Compiled::Atom {
                bit: self
                    .alphabet
                    .iter()
                    .position(|p| p == pred)
                    .expect("predicate in alphabet") as u32,
                constant: *term == Term::Const,
            },
            Formula::Not(a) => Compiled::Not(Box::new(self.compile(a))),
            Formula::And(l, r) => Compiled::And(Box::new(self.compile(l)), Box::new(self.compile(r))),
            Formula::Or(l, r) => Compiled::Or(Box::new(self.compile(l)), Box::new(self.compile(r))),
            Formula::Implies(l, r) => Compiled::Implies(Box::new(self.compile(l)), Box::new(self.compile(r))),
            Formula::ForAll(b) | Formula::Exists(b) => {
                if let Some(i) = self.seen.iter().position(|s| *s == f) {
                    return Compiled::Guess(i);
                }
                let idx = self.seen.len();
                self.seen.push(f);
                self.quants.push(None);
                let body = self.compile(b);
                self.quants[idx] = Some(Quantifier {
                    universal: matches!(f, Formula::ForAll(_)),
                    body,
                });
                Compiled::Guess(idx)
            }
        }
    }
}

impl Compiled {
    fn eval(&self, const_type: u32, x_type: u32, guess: u32) -> bool {
        match self {
            Compiled::Atom { bit, constant } => {
                let t = if *constant { const_type } else { x_type };
                t & (1 << bit) != 0
            }
            Compiled::Not(a) => !a.eval(const_type, x_type, guess),
            Compiled::And(l, r) => l.eval(const_type, x_type, guess) && r.eval(const_type, x_type, guess),
            Compiled::Or(l, r) => l.eval(const_type, x_type, guess) || r.eval(const_type, x_type, guess),
            Compiled::Implies(l, r) => !l.eval(const_type, x_type, guess) || r.eval(const_type, x_type, guess),
            Compiled::Guess(i) => guess & (1 << i) != 0,
        }
    }
}

/// Smallest number of inhabited types consistent with a guess, if any.
fn min_model_size(quants: &[Quantifier], const_type: u32, guess: u32, type_count: u32) -> Option<usize> {
    let guessed = |i: usize| guess & (1 << i) != 0;
    // a guessed-false universal or guessed-true existential needs a witness
    let demands: Vec<(usize, bool)> = quants
        .iter()
        .enumerate()
        .filter(|(i, q)| q.universal != guessed(*i))
        .map(|(i, q)| (i, !q.universal))
        .collect();
    let allowed = |t: u32| {
        quants.iter().enumerate().all(|(i, q)| {
            if q.universal && guessed(i) {
                q.body.eval(const_type, t, guess)
            } else if !q.universal && !guessed(i) {
                !q.body.eval(const_type, t, guess)
            } else {
                true
            }
        })
    };
    if !allowed(const_type) {
        return None;
    }
    let witness = |t: u32| -> u32 {
        demands
            .iter()
            .enumerate()
            .filter(|(_, (qi, want))| quants[*qi].body.eval(const_type, t, guess) == *want)
            .fold(0u32, |m, (d, _)| m | (1 << d))
    };
    let full = (1u32 << demands.len()) - 1;
    let start = witness(const_type);
    let masks: BTreeSet<u32> = (0..type_count)
        .filter(|&t| allowed(t))
        .map(witness)
        .filter(|&m| m != 0)
        .collect();
    // breadth-first over covered-demand masks
    let mut best = vec![usize::MAX; (full + 1) as usize];
    best[start as usize] = 1;
    let mut frontier = vec![start];
    while !frontier.is_empty() && best[full as usize] == usize::MAX {
        let mut next = Vec::new();
        for cur in frontier {
            for &m in &masks {
                let n = cur | m;
                if best[n as usize] == usize::MAX {
                    best[n as usize] = best[cur as usize] + 1;
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    (best[full as usize] != usize::MAX).then_some(best[full as usize])
}

/// Searches for an interpretation of at most `max_domain` elements making
/// every premise true and the conclusion false.
pub fn entails(premises: &[Formula], conclusion: &Formula, max_domain: usize) -> Result<bool, LogicError> {
    let mut all: Vec<&Formula> = premises.iter().collect();
    all.push(conclusion);
    for f in &all {
        if !f.is_closed() {
            return Err(LogicError::FreeVariable(f.to_string()));
        }
    }
    let preds = predicate_set(all.iter().copied());
    if preds.len() > MAX_PREDICATES {
        return Err(LogicError::AlphabetTooLarge {
            size: preds.len(),
            max: MAX_PREDICATES,
        });
    }
    if max_domain == 0 {
        return Ok(true);
    }
    let mut compiler = Compiler {
        alphabet: preds.into_iter().collect(),
        seen: Vec::new(),
        quants: Vec::new(),
    };
    let compiled_premises: Vec<Compiled> = premises.iter().map(|p| compiler.compile(p)).collect();
    let compiled_conclusion = compiler.compile(conclusion);
    let quants: Vec<Quantifier> = compiler.quants.into_iter().map(|q| q.expect("compiled body")).collect();
    if quants.len() > 20 {
        return Err(LogicError::Interpretation(format!(
            "{} quantified sub-sentences exceed the checker's limit",
            quants.len()
        )));
    }
    let type_count = 1u32 << compiler.alphabet.len();
    for const_type in 0..type_count {
        for guess in 0..(1u32 << quants.len()) {
            if compiled_conclusion.eval(const_type, 0, guess)
                || !compiled_premises.iter().all(|p| p.eval(const_type, 0, guess))
            {
                continue;
            }
            if min_model_size(&quants, const_type, guess, type_count).is_some_and(|n| n <= max_domain) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `entails` at the small-model bound 2^k for the formulas' own alphabet.
pub fn is_valid(premises: &[Formula], conclusion: &Formula) -> Result<bool, LogicError> {
    let k = predicate_set(premises.iter().chain(std::iter::once(conclusion))).len();
    if k > MAX_PREDICATES {
        return Err(LogicError::AlphabetTooLarge {
            size: k,
            max: MAX_PREDICATES,
        });
    }
    entails(premises, conclusion, 1usize << k)
}

/// Logical equivalence up to the small-model bound.
pub fn equivalent(a: &Formula, b: &Formula) -> Result<bool, LogicError> {
    Ok(is_valid(std::slice::from_ref(a), b)? && is_valid(std::slice::from_ref(b), a)?)
}
