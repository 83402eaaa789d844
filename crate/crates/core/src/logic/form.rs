//! Surface-oriented view of scheme sentences.
//!
//! Every sentence the corpus verbalizes is one of three shapes, each built
//! from predicate phrases (a literal, a conjunction or disjunction of
//! literals, or a negated conjunction/disjunction of positive atoms).

use super::formula::{Formula, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub negated: bool,
    pub pred: String,
}

impl Literal {
    pub fn pos(pred: impl Into<String>) -> Self {
        Self {
            negated: false,
            pred: pred.into(),
        }
    }

    pub fn neg(pred: impl Into<String>) -> Self {
        Self {
            negated: true,
            pred: pred.into(),
        }
    }

    fn to_formula(&self, term: Term) -> Formula {
        let atom = Formula::atom(self.pred.clone(), term);
        if self.negated {
            Formula::not(atom)
        } else {
            atom
        }
    }

    fn from_formula(f: &Formula, term: Term) -> Option<Self> {
        match f {
            Formula::Atom { pred, term: t } if *t == term => Some(Literal::pos(pred.clone())),
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom { pred, term: t } if *t == term => Some(Literal::neg(pred.clone())),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Phrase {
    Lit(Literal),
    /// Left-nested conjunction, two or more literals.
    All(Vec<Literal>),
    /// Left-nested disjunction, two or more literals.
    Any(Vec<Literal>),
    /// `not (A & B)` over two positive atoms.
    NotBoth(String, String),
    /// `not (A v B)` over two positive atoms.
    Neither(String, String),
}

impl Phrase {
    pub fn to_formula(&self, term: Term) -> Formula {
        let chain = |lits: &[Literal], join: fn(Formula, Formula) -> Formula| {
            let mut it = lits.iter().map(|l| l.to_formula(term));
            let first = it.next().expect("non-empty literal list");
            it.fold(first, join)
        };
        match self {
            Phrase::Lit(l) => l.to_formula(term),
            Phrase::All(lits) => chain(lits, Formula::and),
            Phrase::Any(lits) => chain(lits, Formula::or),
            Phrase::NotBoth(a, b) => Formula::not(Formula::and(
                Formula::atom(a.clone(), term),
                Formula::atom(b.clone(), term),
            )),
            Phrase::Neither(a, b) => Formula::not(Formula::or(
                Formula::atom(a.clone(), term),
                Formula::atom(b.clone(), term),
            )),
        }
    }

    pub fn from_formula(f: &Formula, term: Term) -> Option<Self> {
        if let Some(l) = Literal::from_formula(f, term) {
            return Some(Phrase::Lit(l));
        }
        fn flatten(f: &Formula, term: Term, and: bool, out: &mut Vec<Literal>) -> Option<()> {
            match (f, and) {
                (Formula::And(l, r), true) | (Formula::Or(l, r), false) => {
                    flatten(l, term, and, out)?;
                    out.push(Literal::from_formula(r, term)?);
                    Some(())
                }
                _ => {
                    out.push(Literal::from_formula(f, term)?);
                    Some(())
                }
            }
        }
        let positive_pair = |l: &Formula, r: &Formula| match (l, r) {
            (Formula::Atom { pred: a, term: ta }, Formula::Atom { pred: b, term: tb })
                if *ta == term && *tb == term =>
            {
                Some((a.clone(), b.clone()))
            }
            _ => None,
        };
        match f {
            Formula::And(..) => {
                let mut lits = Vec::new();
                flatten(f, term, true, &mut lits)?;
                Some(Phrase::All(lits))
            }
            Formula::Or(..) => {
                let mut lits = Vec::new();
                flatten(f, term, false, &mut lits)?;
                Some(Phrase::Any(lits))
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::And(l, r) => positive_pair(l, r).map(|(a, b)| Phrase::NotBoth(a, b)),
                Formula::Or(l, r) => positive_pair(l, r).map(|(a, b)| Phrase::Neither(a, b)),
                _ => None,
            },
            _ => None,
        }
    }

    /// The literal a completion task blanks out, if the phrase ends in one.
    pub fn tail(&self) -> Option<&Literal> {
        match self {
            Phrase::Lit(l) => Some(l),
            Phrase::All(lits) | Phrase::Any(lits) => lits.last(),
            Phrase::NotBoth(..) | Phrase::Neither(..) => None,
        }
    }

    fn with_toggled_tail(&self) -> Option<Phrase> {
        let flip = |l: &Literal| Literal {
            negated: !l.negated,
            pred: l.pred.clone(),
        };
        match self {
            Phrase::Lit(l) => Some(Phrase::Lit(flip(l))),
            Phrase::All(lits) | Phrase::Any(lits) => {
                let mut lits = lits.clone();
                let last = lits.last_mut()?;
                *last = flip(last);
                Some(if matches!(self, Phrase::All(_)) {
                    Phrase::All(lits)
                } else {
                    Phrase::Any(lits)
                })
            }
            _ => None,
        }
    }

    /// Single positive literal, renderable as a bare noun.
    pub fn as_noun(&self) -> Option<&str> {
        match self {
            Phrase::Lit(Literal { negated: false, pred }) => Some(pred),
            _ => None,
        }
    }

    pub fn predicates(&self) -> Vec<&str> {
        match self {
            Phrase::Lit(l) => vec![&l.pred],
            Phrase::All(lits) | Phrase::Any(lits) => lits.iter().map(|l| l.pred.as_str()).collect(),
            Phrase::NotBoth(a, b) | Phrase::Neither(a, b) => vec![a, b],
        }
    }
}

/// Shape key used to select sentence templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `(x): P x -> Q x`
    Generalization,
    /// `P a`
    Predication,
    /// `(x): (P x -> Q x) & (Q x -> P x)`
    Biconditional,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SentenceForm {
    Generalization { antecedent: Phrase, consequent: Phrase },
    Predication { phrase: Phrase },
    Biconditional { left: Phrase, right: Phrase },
}

impl SentenceForm {
    pub fn shape(&self) -> Shape {
        match self {
            SentenceForm::Generalization { .. } => Shape::Generalization,
            SentenceForm::Predication { .. } => Shape::Predication,
            SentenceForm::Biconditional { .. } => Shape::Biconditional,
        }
    }

    pub fn classify(f: &Formula) -> Option<Self> {
        match f {
            Formula::ForAll(body) => match body.as_ref() {
                Formula::Implies(l, r) => Some(SentenceForm::Generalization {
                    antecedent: Phrase::from_formula(l, Term::Var)?,
                    consequent: Phrase::from_formula(r, Term::Var)?,
                }),
                Formula::And(l, r) => match (l.as_ref(), r.as_ref()) {
                    (Formula::Implies(a, b), Formula::Implies(c, d)) if a == d && b == c => {
                        Some(SentenceForm::Biconditional {
                            left: Phrase::from_formula(a, Term::Var)?,
                            right: Phrase::from_formula(b, Term::Var)?,
                        })
                    }
                    _ => None,
                },
                _ => None,
            },
            _ => Phrase::from_formula(f, Term::Const).map(|phrase| SentenceForm::Predication { phrase }),
        }
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            SentenceForm::Generalization { antecedent, consequent } => Formula::forall(Formula::implies(
                antecedent.to_formula(Term::Var),
                consequent.to_formula(Term::Var),
            )),
            SentenceForm::Predication { phrase } => phrase.to_formula(Term::Const),
            SentenceForm::Biconditional { left, right } => Formula::forall(Formula::and(
                Formula::implies(left.to_formula(Term::Var), right.to_formula(Term::Var)),
                Formula::implies(right.to_formula(Term::Var), left.to_formula(Term::Var)),
            )),
        }
    }

    /// Phrase whose last literal ends the sentence, for shapes that can serve
    /// as a conclusion.
    pub fn tail_phrase(&self) -> Option<&Phrase> {
        match self {
            SentenceForm::Generalization { consequent, .. } => Some(consequent),
            SentenceForm::Predication { phrase } => Some(phrase),
            SentenceForm::Biconditional { .. } => None,
        }
    }

    pub fn tail(&self) -> Option<&Literal> {
        self.tail_phrase().and_then(Phrase::tail)
    }

    /// Same sentence with the negator of its tail literal toggled.
    pub fn toggled_tail(&self) -> Option<Self> {
        match self {
            SentenceForm::Generalization { antecedent, consequent } => Some(SentenceForm::Generalization {
                antecedent: antecedent.clone(),
                consequent: consequent.with_toggled_tail()?,
            }),
            SentenceForm::Predication { phrase } => Some(SentenceForm::Predication {
                phrase: phrase.with_toggled_tail()?,
            }),
            SentenceForm::Biconditional { .. } => None,
        }
    }
}

/// Conclusion with its tail negator toggled: the gold of the inverted task.
pub fn inverted_conclusion(f: &Formula) -> Option<Formula> {
    SentenceForm::classify(f)?.toggled_tail().map(|s| s.to_formula())
}
