use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::template::Split;
use super::VerbalizerError;
use crate::logic::{Binding, Scheme};

/// Words that would make a realized sentence ambiguous.
pub const RESERVED_WORDS: [&str; 11] = [
    "is", "are", "and", "or", "nor", "not", "who", "a", "an", "both", "neither",
];

/// Shipped domain packs.
pub const DEFAULT_DOMAINS: [&str; 7] = [
    include_str!("../../data/domains/female_relatives.json"),
    include_str!("../../data/domains/male_relatives.json"),
    include_str!("../../data/domains/football_fans.json"),
    include_str!("../../data/domains/personal_care.json"),
    include_str!("../../data/domains/chemical_ingredients.json"),
    include_str!("../../data/domains/dinosaurs.json"),
    include_str!("../../data/domains/philosophers.json"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub split: Split,
    pub entities: Vec<String>,
    /// Binary predicates of the form "Y of", completed by an entity.
    pub relations: Vec<String>,
    /// Names for the individual constant; entity names when absent.
    #[serde(default)]
    pub subjects: Option<Vec<String>>,
    pub intros: Vec<String>,
}

fn bad_words(s: &str) -> Option<String> {
    if s.contains(',') || s.contains('.') || s.contains(':') || s.contains('?') {
        return Some(s.to_string());
    }
    s.split_whitespace()
        .find(|w| RESERVED_WORDS.contains(&w.to_lowercase().as_str()))
        .map(str::to_string)
}

impl Domain {
    pub fn validate(&self) -> Result<(), VerbalizerError> {
        let err = |m: String| Err(VerbalizerError::Domain(self.name.clone(), m));
        if self.entities.len() < 100 {
            return err(format!("{} entity names, at least 100 needed", self.entities.len()));
        }
        if self.relations.len() < 5 {
            return err(format!("{} relations, at least 5 needed", self.relations.len()));
        }
        if self.intros.len() < 3 {
            return err(format!("{} intros, at least 3 needed", self.intros.len()));
        }
        let mut seen = HashSet::new();
        for e in &self.entities {
            if !seen.insert(e) {
                return err(format!("duplicate entity '{e}'"));
            }
        }
        for w in self.entities.iter().chain(&self.relations) {
            if let Some(bad) = bad_words(w) {
                return err(format!("'{w}' contains reserved '{bad}'"));
            }
        }
        for s in self.subjects.iter().flatten() {
            let name_like = s
                .split_whitespace()
                .all(|w| w.chars().next().is_some_and(char::is_uppercase) || NAME_PARTICLES.contains(&w));
            if !name_like || bad_words(s).is_some() {
                return err(format!("subject '{s}' is not a proper name"));
            }
        }
        Ok(())
    }

    /// Draws an injective lexeme for each placeholder of `scheme`, plus a
    /// name for its constant.
    pub fn draw_binding(&self, scheme: &Scheme, rng: &mut impl Rng) -> Binding {
        let name = if scheme.uses_constant() {
            let pool = self.subjects.as_ref().unwrap_or(&self.entities);
            pool.choose(rng).cloned()
        } else {
            None
        };
        let mut entities: Vec<&String> = self.entities.iter().filter(|e| Some(*e) != name.as_ref()).collect();
        let placeholders = scheme.placeholders();
        let (picked, _) = entities.partial_shuffle(rng, placeholders.len());
        let predicates = placeholders
            .iter()
            .zip(picked.iter())
            .map(|(p, e)| {
                let rel = self.relations.choose(rng).expect("validated relations");
                (p.clone(), format!("{rel} {e}"))
            })
            .collect();
        Binding {
            predicates,
            constant: name,
        }
    }
}

/// Lowercase words allowed inside proper names.
pub const NAME_PARTICLES: [&str; 5] = ["of", "de", "the", "von", "van"];

#[derive(Clone, Debug)]
pub struct DomainRegistry {
    domains: Vec<Domain>,
}

impl DomainRegistry {
    pub fn new(domains: Vec<Domain>) -> Result<Self, VerbalizerError> {
        for d in &domains {
            d.validate()?;
        }
        Ok(Self { domains })
    }

    pub fn from_json(texts: &[&str]) -> Result<Self, VerbalizerError> {
        let domains = texts
            .iter()
            .map(|t| serde_json::from_str(t))
            .collect::<Result<Vec<Domain>, _>>()?;
        Self::new(domains)
    }

    pub fn all(&self) -> &[Domain] {
        &self.domains
    }

    pub fn get(&self, name: &str) -> Option<&Domain> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn pool(&self, split: Split) -> Vec<&Domain> {
        self.domains.iter().filter(|d| d.split == split).collect()
    }
}
