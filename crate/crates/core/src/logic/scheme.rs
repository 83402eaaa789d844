use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::entail::is_valid;
use super::formula::{predicate_set, Formula};
use super::LogicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Group {
    Core,
    Base,
    NegationVariant,
    ComplexPredicates,
    DeMorgan,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Core => "CORE",
            Group::Base => "BASE",
            Group::NegationVariant => "NEGATION_VARIANT",
            Group::ComplexPredicates => "COMPLEX_PREDICATES",
            Group::DeMorgan => "DE_MORGAN",
        }
    }

    pub fn is_base(self) -> bool {
        matches!(self, Group::Core | Group::Base)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A formal argument scheme over predicate placeholders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub id: String,
    pub group: Group,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    /// Id of the base scheme this one descends from (itself for base schemes).
    pub base: String,
    /// 1-based version index within its (base, group) cell.
    pub version: usize,
}

/// Addresses a sentence of a scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SentenceRef {
    Premise(usize),
    Conclusion,
}

impl SentenceRef {
    /// `p0`, `p1`, ... or `c`.
    pub fn parse(s: &str) -> Result<Self, LogicError> {
        if s == "c" {
            return Ok(SentenceRef::Conclusion);
        }
        s.strip_prefix('p')
            .and_then(|n| n.parse().ok())
            .map(SentenceRef::Premise)
            .ok_or_else(|| LogicError::InvalidPath(s.to_string()))
    }
}

impl fmt::Display for SentenceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceRef::Premise(i) => write!(f, "p{i}"),
            SentenceRef::Conclusion => write!(f, "c"),
        }
    }
}

/// A sub-formula site: a sentence plus child indices from its root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    pub sentence: SentenceRef,
    pub path: Vec<usize>,
}

impl Site {
    /// Parses `p1/0/1` style addresses.
    pub fn parse(s: &str) -> Result<Self, LogicError> {
        let mut parts = s.split('/');
        let sentence = SentenceRef::parse(parts.next().unwrap_or_default())?;
        let path = parts
            .map(|p| p.parse().map_err(|_| LogicError::InvalidPath(s.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Site { sentence, path })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sentence)?;
        for i in &self.path {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

impl Scheme {
    pub fn sentence(&self, r: SentenceRef) -> Option<&Formula> {
        match r {
            SentenceRef::Premise(i) => self.premises.get(i),
            SentenceRef::Conclusion => Some(&self.conclusion),
        }
    }

    pub fn sentence_mut(&mut self, r: SentenceRef) -> Option<&mut Formula> {
        match r {
            SentenceRef::Premise(i) => self.premises.get_mut(i),
            SentenceRef::Conclusion => Some(&mut self.conclusion),
        }
    }

    pub fn sentence_refs(&self) -> Vec<SentenceRef> {
        (0..self.premises.len())
            .map(SentenceRef::Premise)
            .chain(std::iter::once(SentenceRef::Conclusion))
            .collect()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Formula> {
        self.premises.iter().chain(std::iter::once(&self.conclusion))
    }

    /// Placeholder symbols in order of first occurrence.
    pub fn placeholders(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in self.sentences() {
            f.collect_predicates(&mut out);
        }
        out
    }

    pub fn uses_constant(&self) -> bool {
        self.sentences().any(Formula::mentions_constant)
    }

    pub fn is_valid(&self) -> Result<bool, LogicError> {
        is_valid(&self.premises, &self.conclusion)
    }

    /// Print with placeholders renamed `P1, P2, ...` in order of first
    /// occurrence. Two schemes are duplicates iff their canonical forms match.
    pub fn canonical_form(&self) -> String {
        let order = self.placeholders();
        let mut rename = |p: &str| {
            let i = order.iter().position(|o| o == p).expect("known placeholder");
            format!("P{}", i + 1)
        };
        let prem: Vec<String> = self
            .premises
            .iter()
            .map(|f| f.map_predicates(&mut rename).to_string())
            .collect();
        format!(
            "{} => {}",
            prem.join(" ; "),
            self.conclusion.map_predicates(&mut rename)
        )
    }
}

/// Placeholder and constant assignment for one argument.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub predicates: BTreeMap<String, String>,
    pub constant: Option<String>,
}

impl Binding {
    pub fn check_injective(&self) -> Result<(), LogicError> {
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (sym, lex) in &self.predicates {
            if let Some(prev) = seen.insert(lex.as_str(), sym.as_str()) {
                return Err(LogicError::NotInjective {
                    lexeme: lex.clone(),
                    first: prev.to_string(),
                    second: sym.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A scheme instance over realized lexemes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteArgument {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
    pub constant: Option<String>,
}

impl ConcreteArgument {
    pub fn is_valid(&self) -> Result<bool, LogicError> {
        is_valid(&self.premises, &self.conclusion)
    }

    pub fn predicates(&self) -> Vec<String> {
        predicate_set(self.premises.iter().chain(std::iter::once(&self.conclusion)))
            .into_iter()
            .collect()
    }
}

/// Replaces every placeholder by its lexeme.
pub fn substitute(scheme: &Scheme, binding: &Binding) -> Result<ConcreteArgument, LogicError> {
    for sym in scheme.placeholders() {
        if !binding.predicates.contains_key(&sym) {
            return Err(LogicError::MissingBinding(sym));
        }
    }
    if scheme.uses_constant() && binding.constant.is_none() {
        return Err(LogicError::MissingBinding("a".into()));
    }
    binding.check_injective()?;
    let mut map = |p: &str| binding.predicates[p].clone();
    Ok(ConcreteArgument {
        premises: scheme.premises.iter().map(|f| f.map_predicates(&mut map)).collect(),
        conclusion: scheme.conclusion.map_predicates(&mut map),
        constant: binding.constant.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;
    use super::*;

    fn gmp() -> Scheme {
        Scheme {
            id: "gmp".into(),
            group: Group::Core,
            premises: vec![parse_formula("(x): F x -> G x").unwrap(), parse_formula("F a").unwrap()],
            conclusion: parse_formula("G a").unwrap(),
            base: "gmp".into(),
            version: 1,
        }
    }

    fn binding(pairs: &[(&str, &str)]) -> Binding {
        Binding {
            predicates: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            constant: Some("Chloe".into()),
        }
    }

    #[test]
    fn substitute_gmp() {
        let arg = substitute(
            &gmp(),
            &binding(&[("F", "workmate of Brad"), ("G", "classmate of James")]),
        )
        .unwrap();
        assert_eq!(
            arg.premises[0].to_string(),
            "(x): workmate of Brad x -> classmate of James x"
        );
        assert_eq!(arg.conclusion.to_string(), "classmate of James a");
        assert!(arg.is_valid().unwrap());
    }

    #[test]
    fn missing_binding() {
        let err = substitute(&gmp(), &binding(&[("F", "workmate of Brad")])).unwrap_err();
        assert_eq!(err, LogicError::MissingBinding("G".into()));
    }

    #[test]
    fn injectivity_violation() {
        let err = substitute(&gmp(), &binding(&[("F", "sister of Anna"), ("G", "sister of Anna")])).unwrap_err();
        assert!(matches!(err, LogicError::NotInjective { .. }));
    }

    #[test]
    fn canonical_form_ignores_placeholder_names() {
        let mut renamed = gmp();
        renamed.premises = vec![parse_formula("(x): H x -> I x").unwrap(), parse_formula("H a").unwrap()];
        renamed.conclusion = parse_formula("I a").unwrap();
        assert_eq!(renamed.canonical_form(), gmp().canonical_form());
        assert_eq!(gmp().canonical_form(), "(x): P1 x -> P2 x ; P1 a => P2 a");
    }

    #[test]
    fn site_addresses() {
        let s = Site::parse("p1/0/1").unwrap();
        assert_eq!(s.sentence, SentenceRef::Premise(1));
        assert_eq!(s.path, vec![0, 1]);
        assert_eq!(s.to_string(), "p1/0/1");
        assert!(Site::parse("q/0").is_err());
    }
}
