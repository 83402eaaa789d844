//! The scheme catalog: base schemes from configuration plus their derived
//! negation, complex-predicate and de Morgan variants.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::logic::{
    apply_complex_predicate, apply_negation_variant, de_morgan_scheme, entails, inverted_conclusion, negate_predicate,
    parse_formula, Compound, Group, LogicError, NegationMode, Scheme, SentenceForm, SentenceRef, Site,
};

/// Shipped default configuration.
pub const DEFAULT_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read catalog config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed catalog config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scheme {scheme}, sentence {sentence}: {source}")]
    Parse {
        scheme: String,
        sentence: String,
        source: LogicError,
    },
    #[error("deriving {scheme}: {source}")]
    Transform { scheme: String, source: LogicError },
    #[error("scheme {0} is not deductively valid")]
    Invalid(String),
    #[error("scheme {scheme}: sentence {sentence} has no natural-language form")]
    Unverbalizable { scheme: String, sentence: String },
    #[error("scheme {0}: conclusion has no negator-toggleable tail, or its toggled form is also entailed")]
    BadInversion(String),
    #[error("scheme {second} duplicates {first}")]
    Duplicate { first: String, second: String },
    #[error("duplicate scheme id {0}")]
    DuplicateId(String),
    #[error("core id {0} is not a base scheme")]
    UnknownCore(String),
    #[error("variant cell refers to unknown base scheme {0}")]
    UnknownBase(String),
    #[error("variant source {0} is not defined before use")]
    UnknownSource(String),
    #[error("cell {base}/{group} declares {n} versions; 2 or 3 are allowed")]
    VersionCount { base: String, group: Group, n: usize },
    #[error("group {group} is not a variant group")]
    NotVariantGroup { group: Group },
    #[error("{group}: config declares {declared} schemes, catalog has {actual}")]
    CountMismatch {
        group: &'static str,
        declared: usize,
        actual: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogConfig {
    pub base_schemes: Vec<BaseSpec>,
    pub core_ids: Vec<String>,
    pub variants: Vec<CellSpec>,
    pub totals: Totals,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseSpec {
    pub id: String,
    #[serde(default)]
    pub name: String,
    pub premises: Vec<String>,
    pub conclusion: String,
}

/// One (base scheme, variant group) cell with its versions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellSpec {
    pub base: String,
    pub group: Group,
    pub versions: Vec<VersionSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VersionSpec {
    /// Scheme the steps start from; the cell's base scheme when absent.
    #[serde(default)]
    pub from: Option<String>,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Negate {
        sites: Vec<String>,
    },
    Duplex {
        sites: Vec<String>,
    },
    NegatePredicate {
        symbol: String,
    },
    Complex {
        placeholder: String,
        compound: Compound,
        fresh: [String; 2],
    },
    DeMorgan {
        #[serde(default)]
        sentences: Option<Vec<String>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub core: usize,
    pub base: usize,
    pub all: usize,
}

/// Training-set scheme selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrainSet {
    #[serde(rename = "TRAIN01")]
    Train01,
    #[serde(rename = "TRAIN02")]
    Train02,
    #[serde(rename = "TRAIN03")]
    Train03,
}

impl TrainSet {
    pub const ALL: [TrainSet; 3] = [TrainSet::Train01, TrainSet::Train02, TrainSet::Train03];

    pub fn as_str(self) -> &'static str {
        match self {
            TrainSet::Train01 => "TRAIN01",
            TrainSet::Train02 => "TRAIN02",
            TrainSet::Train03 => "TRAIN03",
        }
    }
}

impl fmt::Display for TrainSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrainSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TRAIN01" => Ok(TrainSet::Train01),
            "TRAIN02" => Ok(TrainSet::Train02),
            "TRAIN03" => Ok(TrainSet::Train03),
            _ => Err(format!(
                "unknown training set '{s}' (expected TRAIN01, TRAIN02 or TRAIN03)"
            )),
        }
    }
}

/// Immutable, validated scheme catalog.
#[derive(Clone, Debug)]
pub struct Catalog {
    schemes: Vec<Scheme>,
    index: HashMap<String, usize>,
    names: BTreeMap<String, String>,
}

impl Catalog {
    pub fn get(&self, id: &str) -> Option<&Scheme> {
        self.index.get(id).map(|&i| &self.schemes[i])
    }

    /// Every scheme: base schemes in config order, then variants.
    pub fn all(&self) -> &[Scheme] {
        &self.schemes
    }

    pub fn core(&self) -> Vec<&Scheme> {
        self.schemes.iter().filter(|s| s.group == Group::Core).collect()
    }

    pub fn base(&self) -> Vec<&Scheme> {
        self.schemes.iter().filter(|s| s.group.is_base()).collect()
    }

    /// Readable name of a base scheme.
    pub fn base_name(&self, base_id: &str) -> Option<&str> {
        self.names.get(base_id).map(String::as_str)
    }

    /// Canonical prints of every scheme, one per line, in catalog order.
    pub fn canonical_listing(&self) -> String {
        self.schemes
            .iter()
            .map(|s| format!("{}\t{}\t{}\n", s.id, s.group, s.canonical_form()))
            .collect()
    }
}

/// Schemes available to a training set.
pub fn scheme_group(catalog: &Catalog, set: TrainSet) -> Vec<&Scheme> {
    match set {
        TrainSet::Train01 => catalog.core(),
        TrainSet::Train02 => catalog.base(),
        TrainSet::Train03 => catalog.all().iter().collect(),
    }
}

pub fn load_catalog(path: &Path) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path)?;
    catalog_from_str(&text)
}

pub fn default_catalog() -> Catalog {
    catalog_from_str(DEFAULT_CATALOG).expect("shipped catalog is valid")
}

pub fn catalog_from_str(text: &str) -> Result<Catalog, CatalogError> {
    let config: CatalogConfig = serde_json::from_str(text)?;
    build_catalog(&config)
}

fn parse_sentence(scheme: &str, sentence: &str) -> Result<crate::logic::Formula, CatalogError> {
    parse_formula(sentence).map_err(|source| CatalogError::Parse {
        scheme: scheme.to_string(),
        sentence: sentence.to_string(),
        source,
    })
}

pub fn build_catalog(config: &CatalogConfig) -> Result<Catalog, CatalogError> {
    let mut schemes: Vec<Scheme> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut canon: HashMap<String, String> = HashMap::new();
    let mut names = BTreeMap::new();

    let mut add = |s: Scheme, schemes: &mut Vec<Scheme>| -> Result<(), CatalogError> {
        check_scheme(&s)?;
        if index.contains_key(&s.id) {
            return Err(CatalogError::DuplicateId(s.id));
        }
        if let Some(first) = canon.insert(s.canonical_form(), s.id.clone()) {
            return Err(CatalogError::Duplicate { first, second: s.id });
        }
        index.insert(s.id.clone(), schemes.len());
        schemes.push(s);
        Ok(())
    };

    for core in &config.core_ids {
        if !config.base_schemes.iter().any(|b| &b.id == core) {
            return Err(CatalogError::UnknownCore(core.clone()));
        }
    }
    for b in &config.base_schemes {
        let premises = b
            .premises
            .iter()
            .map(|p| parse_sentence(&b.id, p))
            .collect::<Result<Vec<_>, _>>()?;
        let conclusion = parse_sentence(&b.id, &b.conclusion)?;
        let group = if config.core_ids.contains(&b.id) {
            Group::Core
        } else {
            Group::Base
        };
        names.insert(b.id.clone(), b.name.clone());
        add(
            Scheme {
                id: b.id.clone(),
                group,
                premises,
                conclusion,
                base: b.id.clone(),
                version: 1,
            },
            &mut schemes,
        )?;
    }
    for cell in &config.variants {
        let base_idx = schemes
            .iter()
            .position(|s| s.id == cell.base && s.group.is_base())
            .ok_or_else(|| CatalogError::UnknownBase(cell.base.clone()))?;
        let base = schemes[base_idx].clone();
        let lookup = |id: &str, schemes: &[Scheme]| schemes.iter().find(|s| s.id == id).cloned();
        let derived = derive_variants(&base, cell, |id| lookup(id, &schemes))?;
        for s in derived {
            add(s, &mut schemes)?;
        }
    }

    let catalog = Catalog {
        index: schemes.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect(),
        schemes,
        names,
    };
    let actual = Totals {
        core: catalog.core().len(),
        base: catalog.base().len(),
        all: catalog.all().len(),
    };
    for (group, declared, actual) in [
        ("CORE", config.totals.core, actual.core),
        ("BASE", config.totals.base, actual.base),
        ("ALL", config.totals.all, actual.all),
    ] {
        if declared != actual {
            return Err(CatalogError::CountMismatch {
                group,
                declared,
                actual,
            });
        }
    }
    Ok(catalog)
}

fn short_name(group: Group) -> &'static str {
    match group {
        Group::NegationVariant => "neg",
        Group::ComplexPredicates => "cpx",
        Group::DeMorgan => "dm",
        Group::Core | Group::Base => "base",
    }
}

/// Id of version `v` of the given cell, e.g. `gmp.neg.2`.
pub fn variant_id(base: &str, group: Group, v: usize) -> String {
    format!("{base}.{}.{v}", short_name(group))
}

fn transform_err(id: &str) -> impl Fn(LogicError) -> CatalogError + '_ {
    move |source| CatalogError::Transform {
        scheme: id.to_string(),
        source,
    }
}

fn parse_sites(id: &str, sites: &[String]) -> Result<Vec<Site>, CatalogError> {
    sites
        .iter()
        .map(|s| Site::parse(s).map_err(transform_err(id)))
        .collect()
}

fn apply_step(s: &Scheme, step: &Step) -> Result<Scheme, CatalogError> {
    let err = transform_err(&s.id);
    match step {
        Step::Negate { sites } => {
            apply_negation_variant(s, &parse_sites(&s.id, sites)?, NegationMode::Negate).map_err(err)
        }
        Step::Duplex { sites } => {
            apply_negation_variant(s, &parse_sites(&s.id, sites)?, NegationMode::DuplexNegatio).map_err(err)
        }
        Step::NegatePredicate { symbol } => negate_predicate(s, symbol).map_err(err),
        Step::Complex {
            placeholder,
            compound,
            fresh,
        } => apply_complex_predicate(s, placeholder, *compound, [&fresh[0], &fresh[1]]).map_err(err),
        Step::DeMorgan { sentences } => {
            let refs = sentences
                .as_ref()
                .map(|list| {
                    list.iter()
                        .map(|r| SentenceRef::parse(r).map_err(transform_err(&s.id)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            de_morgan_scheme(s, refs.as_deref()).map_err(err)
        }
    }
}

/// Derives the versions of one variant cell. `resolve` finds earlier
/// schemes named in `from`; the result is validity-checked and tagged with
/// its lineage.
pub fn derive_variants(
    base: &Scheme,
    cell: &CellSpec,
    resolve: impl Fn(&str) -> Option<Scheme>,
) -> Result<Vec<Scheme>, CatalogError> {
    if cell.group.is_base() {
        return Err(CatalogError::NotVariantGroup { group: cell.group });
    }
    let n = cell.versions.len();
    if !(2..=3).contains(&n) {
        return Err(CatalogError::VersionCount {
            base: base.id.clone(),
            group: cell.group,
            n,
        });
    }
    let mut out: Vec<Scheme> = Vec::with_capacity(n);
    for (i, v) in cell.versions.iter().enumerate() {
        let id = variant_id(&base.id, cell.group, i + 1);
        let mut s = match &v.from {
            None => base.clone(),
            Some(src) => out
                .iter()
                .find(|s| &s.id == src)
                .cloned()
                .or_else(|| resolve(src))
                .ok_or_else(|| CatalogError::UnknownSource(src.clone()))?,
        };
        for step in &v.steps {
            s = apply_step(&s, step)?;
        }
        s.id = id;
        s.group = cell.group;
        s.base = base.id.clone();
        s.version = i + 1;
        check_scheme(&s)?;
        out.push(s);
    }
    Ok(out)
}

/// Validity, verbalizability and a non-entailed inverted conclusion.
fn check_scheme(s: &Scheme) -> Result<(), CatalogError> {
    if !s.is_valid().map_err(transform_err(&s.id))? {
        return Err(CatalogError::Invalid(s.id.clone()));
    }
    for r in s.sentence_refs() {
        let f = s.sentence(r).expect("listed sentence");
        if SentenceForm::classify(f).is_none() {
            return Err(CatalogError::Unverbalizable {
                scheme: s.id.clone(),
                sentence: f.to_string(),
            });
        }
    }
    let inverted = inverted_conclusion(&s.conclusion).ok_or_else(|| CatalogError::BadInversion(s.id.clone()))?;
    // same bound as `is_valid`: the inverted form uses no new predicates
    let bound = 1usize << s.placeholders().len();
    if entails(&s.premises, &inverted, bound).map_err(transform_err(&s.id))? {
        return Err(CatalogError::BadInversion(s.id.clone()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_counts() {
        let c = default_catalog();
        assert_eq!(c.core().len(), 3);
        assert_eq!(c.base().len(), 8);
        assert_eq!(c.all().len(), 71);
    }

    #[test]
    fn variant_ids() {
        let c = default_catalog();
        let s = c.get("gmt.neg.1").unwrap();
        assert_eq!(s.group, Group::NegationVariant);
        assert_eq!(s.base, "gmt");
        assert_eq!(s.conclusion.to_string(), "F a");
    }
}
