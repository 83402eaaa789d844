//! Variant transforms on schemes. None of them re-check validity; the
//! catalog builder does that for every output.

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use super::parse::PLACEHOLDERS;
use super::scheme::{Scheme, SentenceRef, Site};
use super::LogicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegationMode {
    /// Replace the site by its negation.
    Negate,
    /// Replace a doubly negated site by its core.
    DuplexNegatio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compound {
    Conjunctive,
    Disjunctive,
}

fn site_mut<'a>(s: &'a mut Scheme, site: &Site) -> Result<&'a mut Formula, LogicError> {
    s.sentence_mut(site.sentence)
        .and_then(|f| f.at_mut(&site.path))
        .ok_or_else(|| LogicError::InvalidPath(site.to_string()))
}

/// Applies `mode` at each site in turn.
pub fn apply_negation_variant(s: &Scheme, sites: &[Site], mode: NegationMode) -> Result<Scheme, LogicError> {
    let mut out = s.clone();
    for site in sites {
        let target = site_mut(&mut out, site)?;
        let replacement = match mode {
            NegationMode::Negate => Formula::not(target.clone()),
            NegationMode::DuplexNegatio => match target {
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Not(core) => core.as_ref().clone(),
                    _ => return Err(LogicError::NotDoubleNegation(site.to_string())),
                },
                _ => return Err(LogicError::NotDoubleNegation(site.to_string())),
            },
        };
        *target = replacement;
    }
    Ok(out)
}

/// Negates every occurrence of `symbol`, cancelling any double negation the
/// substitution creates.
pub fn negate_predicate(s: &Scheme, symbol: &str) -> Result<Scheme, LogicError> {
    let mut sites = Vec::new();
    for r in s.sentence_refs() {
        let f = s.sentence(r).expect("listed sentence");
        for path in f.atom_paths(symbol) {
            sites.push(Site { sentence: r, path });
        }
    }
    if sites.is_empty() {
        return Err(LogicError::UnknownPlaceholder(symbol.to_string()));
    }
    let negated = apply_negation_variant(s, &sites, NegationMode::Negate)?;
    let doubles: Vec<Site> = sites
        .into_iter()
        .filter_map(|site| {
            let (_, parent) = site.path.split_last()?;
            let parent = Site {
                sentence: site.sentence,
                path: parent.to_vec(),
            };
            let f = negated.sentence(parent.sentence)?.at(&parent.path)?;
            matches!(f, Formula::Not(i) if matches!(**i, Formula::Not(_))).then_some(parent)
        })
        .collect();
    apply_negation_variant(&negated, &doubles, NegationMode::DuplexNegatio)
}

/// Substitutes `placeholder` everywhere by a two-part compound of fresh symbols.
pub fn apply_complex_predicate(
    s: &Scheme,
    placeholder: &str,
    compound: Compound,
    fresh: [&str; 2],
) -> Result<Scheme, LogicError> {
    let used = s.placeholders();
    if !used.iter().any(|p| p == placeholder) {
        return Err(LogicError::UnknownPlaceholder(placeholder.to_string()));
    }
    for sym in fresh {
        if !PLACEHOLDERS.contains(&sym) {
            return Err(LogicError::UnknownPlaceholder(sym.to_string()));
        }
        if used.iter().any(|p| p == sym) || fresh[0] == fresh[1] {
            return Err(LogicError::SymbolCollision(sym.to_string()));
        }
    }
    fn replace(f: &Formula, placeholder: &str, compound: Compound, fresh: [&str; 2]) -> Formula {
        match f {
            Formula::Atom { pred, term } if pred == placeholder => {
                let (l, r) = (Formula::atom(fresh[0], *term), Formula::atom(fresh[1], *term));
                match compound {
                    Compound::Conjunctive => Formula::and(l, r),
                    Compound::Disjunctive => Formula::or(l, r),
                }
            }
            Formula::Atom { .. } => f.clone(),
            Formula::Not(a) => Formula::not(replace(a, placeholder, compound, fresh)),
            Formula::And(l, r) => Formula::and(
                replace(l, placeholder, compound, fresh),
                replace(r, placeholder, compound, fresh),
            ),
            Formula::Or(l, r) => Formula::or(
                replace(l, placeholder, compound, fresh),
                replace(r, placeholder, compound, fresh),
            ),
            Formula::Implies(l, r) => Formula::implies(
                replace(l, placeholder, compound, fresh),
                replace(r, placeholder, compound, fresh),
            ),
            Formula::ForAll(b) => Formula::forall(replace(b, placeholder, compound, fresh)),
            Formula::Exists(b) => Formula::exists(replace(b, placeholder, compound, fresh)),
        }
    }
    let mut out = s.clone();
    for f in out.premises.iter_mut().chain(std::iter::once(&mut out.conclusion)) {
        *f = replace(f, placeholder, compound, fresh);
    }
    Ok(out)
}

fn has_de_morgan_site(f: &Formula) -> bool {
    match f {
        Formula::Not(inner) if matches!(**inner, Formula::And(..) | Formula::Or(..)) => true,
        _ => f.children().into_iter().any(has_de_morgan_site),
    }
}

fn rewrite_de_morgan(f: &Formula) -> Formula {
    match f {
        Formula::Not(inner) => match inner.as_ref() {
            Formula::And(l, r) => Formula::or(Formula::not(l.as_ref().clone()), Formula::not(r.as_ref().clone())),
            Formula::Or(l, r) => Formula::and(Formula::not(l.as_ref().clone()), Formula::not(r.as_ref().clone())),
            other => Formula::not(rewrite_de_morgan(other)),
        },
        Formula::Atom { .. } => f.clone(),
        Formula::And(l, r) => Formula::and(rewrite_de_morgan(l), rewrite_de_morgan(r)),
        Formula::Or(l, r) => Formula::or(rewrite_de_morgan(l), rewrite_de_morgan(r)),
        Formula::Implies(l, r) => Formula::implies(rewrite_de_morgan(l), rewrite_de_morgan(r)),
        Formula::ForAll(b) => Formula::forall(rewrite_de_morgan(b)),
        Formula::Exists(b) => Formula::exists(rewrite_de_morgan(b)),
    }
}

/// Rewrites all outermost `not (A & B)` / `not (A v B)` sites.
pub fn apply_de_morgan(f: &Formula) -> Result<Formula, LogicError> {
    if !has_de_morgan_site(f) {
        return Err(LogicError::NoDeMorganSite(f.to_string()));
    }
    Ok(rewrite_de_morgan(f))
}

/// De Morgan on the listed sentences, or on every sentence that has a site.
pub fn de_morgan_scheme(s: &Scheme, sentences: Option<&[SentenceRef]>) -> Result<Scheme, LogicError> {
    let mut out = s.clone();
    let targets: Vec<SentenceRef> = match sentences {
        Some(list) => list.to_vec(),
        None => s
            .sentence_refs()
            .into_iter()
            .filter(|r| s.sentence(*r).is_some_and(has_de_morgan_site))
            .collect(),
    };
    if targets.is_empty() {
        return Err(LogicError::NoDeMorganSite(s.id.clone()));
    }
    for r in targets {
        let f = out
            .sentence_mut(r)
            .ok_or_else(|| LogicError::InvalidPath(r.to_string()))?;
        *f = apply_de_morgan(f)?;
    }
    Ok(out)
}
