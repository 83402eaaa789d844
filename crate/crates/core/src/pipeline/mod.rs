//! Corpus generation: the five-step pipeline at scale, training-set
//! sampling, filler mixing and JSONL storage.

mod filler;
mod jsonl;
mod sample;

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use filler::{load_snippets, mix_filler, snippets_from_text, training_text};
pub use jsonl::{read_jsonl, read_jsonl_file, write_jsonl, write_jsonl_file};
pub use sample::{allocation, sample_training_set, sample_training_sets, TrainingSample};

use crate::catalog::{default_catalog, load_catalog, Catalog, CatalogError};
use crate::logic::{entails, inverted_conclusion, substitute, ConcreteArgument, Group, LogicError, Scheme};
use crate::verbalizer::{
    compose_paragraph, realize_predicates, verbalize_sentence, DomainRegistry, Frame, Frames, Span, Split,
    TemplateRegistry, Verbalizer, VerbalizerError, DEFAULT_DOMAINS, DEFAULT_FRAMES, DEFAULT_TEMPLATES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CorpusSplit {
    Train,
    Dev,
    TestOutOfSample,
    TestOutOfDomain,
}

impl CorpusSplit {
    pub const ALL: [CorpusSplit; 4] = [
        CorpusSplit::Train,
        CorpusSplit::Dev,
        CorpusSplit::TestOutOfSample,
        CorpusSplit::TestOutOfDomain,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusSplit::Train => "TRAIN",
            CorpusSplit::Dev => "DEV",
            CorpusSplit::TestOutOfSample => "TEST_OUT_OF_SAMPLE",
            CorpusSplit::TestOutOfDomain => "TEST_OUT_OF_DOMAIN",
        }
    }

    /// Template and domain partition the split draws from.
    pub fn pool(self) -> Split {
        match self {
            CorpusSplit::TestOutOfDomain => Split::TestOnly,
            _ => Split::Train,
        }
    }
}

impl fmt::Display for CorpusSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One corpus record, serialized with exactly these fields.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgumentItem {
    pub id: String,
    pub scheme_id: String,
    pub group: Group,
    pub domain: String,
    pub split: CorpusSplit,
    pub text: String,
    pub premises: Vec<String>,
    pub conclusion: String,
    #[serde(rename = "span_E")]
    pub span_e: Span,
    #[serde(rename = "span_S")]
    pub span_s: Span,
    pub rng_seed_used: u64,
}

/// Formal provenance of an item, kept in memory only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ItemAudit {
    pub argument: ConcreteArgument,
    pub templates: Vec<String>,
    /// `premise_order[i]` is the scheme premise shown at position i.
    pub premise_order: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedItem {
    pub item: ArgumentItem,
    pub audit: ItemAudit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test_out_of_sample: usize,
    pub test_out_of_domain: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self {
            train: 106_500,
            dev: 1_000,
            test_out_of_sample: 1_000,
            test_out_of_domain: 1_000,
        }
    }
}

impl SplitCounts {
    pub fn get(&self, split: CorpusSplit) -> usize {
        match split {
            CorpusSplit::Train => self.train,
            CorpusSplit::Dev => self.dev,
            CorpusSplit::TestOutOfSample => self.test_out_of_sample,
            CorpusSplit::TestOutOfDomain => self.test_out_of_domain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub catalog: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub domains: Vec<PathBuf>,
    pub frames: Option<PathBuf>,
    pub counts: SplitCounts,
    pub master_seed: u64,
    /// Re-draws allowed for an item whose text already occurs.
    pub max_retries: u32,
    pub train_sizes: Vec<usize>,
    pub filler: Vec<PathBuf>,
    /// Filler snippets per argument item.
    pub mix_ratio: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            catalog: None,
            templates: None,
            domains: Vec::new(),
            frames: None,
            counts: SplitCounts::default(),
            master_seed: 2020,
            max_retries: 16,
            train_sizes: vec![4_500, 9_000, 18_000, 36_000],
            filler: Vec::new(),
            mix_ratio: 1.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Verbalizer(#[from] VerbalizerError),
    #[error("{id}: {source}")]
    Logic { id: String, source: LogicError },
    #[error("{id}: entailment check failed: {reason}")]
    OracleFailure { id: String, reason: String },
    #[error("domain {domain} has {have} entity names, scheme {scheme} needs {need}")]
    InsufficientEntities {
        domain: String,
        scheme: String,
        need: usize,
        have: usize,
    },
    #[error("no domain available for {0}")]
    NoDomain(CorpusSplit),
    #[error("{split} item {index}: no unique text after {retries} re-draws")]
    Duplicates {
        split: CorpusSplit,
        index: usize,
        retries: u32,
    },
    #[error("scheme {scheme}: {need} items requested, {have} available")]
    InsufficientItems { scheme: String, need: usize, have: usize },
    #[error("{need} filler snippets needed, {have} available")]
    InsufficientFiller { need: usize, have: usize },
    #[error("invalid mixing ratio {0}")]
    BadRatio(f64),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Malformed { line: usize, source: serde_json::Error },
    #[error("config: {0}")]
    Config(String),
}

/// Catalog plus verbalizer inventories.
#[derive(Clone, Debug)]
pub struct Resources {
    pub catalog: Catalog,
    pub verbalizer: Verbalizer,
}

impl Resources {
    pub fn shipped() -> Self {
        Self {
            catalog: default_catalog(),
            verbalizer: Verbalizer::shipped(),
        }
    }

    pub fn load(cfg: &GenerationConfig) -> Result<Self, PipelineError> {
        let read = |p: &Option<PathBuf>, default: &str| -> Result<String, PipelineError> {
            match p {
                Some(p) => Ok(std::fs::read_to_string(p)?),
                None => Ok(default.to_string()),
            }
        };
        let catalog = match &cfg.catalog {
            Some(p) => load_catalog(p)?,
            None => default_catalog(),
        };
        let templates = TemplateRegistry::from_json(&read(&cfg.templates, DEFAULT_TEMPLATES)?)?;
        let domains = if cfg.domains.is_empty() {
            DomainRegistry::from_json(&DEFAULT_DOMAINS)?
        } else {
            let texts = cfg
                .domains
                .iter()
                .map(std::fs::read_to_string)
                .collect::<Result<Vec<_>, _>>()?;
            DomainRegistry::from_json(&texts.iter().map(String::as_str).collect::<Vec<_>>())?
        };
        let frames = Frames::from_json(&read(&cfg.frames, DEFAULT_FRAMES)?)?;
        Ok(Self {
            catalog,
            verbalizer: Verbalizer {
                templates,
                domains,
                frames,
            },
        })
    }
}

/// Hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// First eight bytes of SHA-256 over the colon-joined parts.
pub fn derive_seed(parts: &[&str]) -> u64 {
    let digest = Sha256::digest(parts.join(":").as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("eight bytes"))
}

pub fn item_seed(master: u64, split: CorpusSplit, index: usize, attempt: u32) -> u64 {
    derive_seed(&[
        &master.to_string(),
        split.as_str(),
        &index.to_string(),
        &attempt.to_string(),
    ])
}

pub fn item_id(split: CorpusSplit, index: usize) -> String {
    format!("{}-{index:06}", split.as_str().to_lowercase())
}

/// Scheme assigned to the `index`-th item: round-robin over the catalog.
pub fn scheme_for_index(catalog: &Catalog, index: usize) -> &Scheme {
    &catalog.all()[index % catalog.all().len()]
}

fn verify(id: &str, arg: &ConcreteArgument) -> Result<(), PipelineError> {
    let logic = |source| PipelineError::Logic {
        id: id.to_string(),
        source,
    };
    let bound = 1usize << arg.predicates().len();
    if !entails(&arg.premises, &arg.conclusion, bound).map_err(logic)? {
        return Err(PipelineError::OracleFailure {
            id: id.to_string(),
            reason: "premises do not entail the conclusion".into(),
        });
    }
    let inverted = inverted_conclusion(&arg.conclusion).ok_or_else(|| PipelineError::OracleFailure {
        id: id.to_string(),
        reason: "conclusion has no tail literal".into(),
    })?;
    if entails(&arg.premises, &inverted, bound).map_err(logic)? {
        return Err(PipelineError::OracleFailure {
            id: id.to_string(),
            reason: "premises also entail the inverted conclusion".into(),
        });
    }
    Ok(())
}

/// Runs steps 1 to 5 for one item with the given seed.
pub fn generate_item(
    res: &Resources,
    split: CorpusSplit,
    index: usize,
    seed: u64,
) -> Result<GeneratedItem, PipelineError> {
    let id = item_id(split, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = &res.verbalizer;
    let pool = split.pool();

    // step 1
    let scheme = scheme_for_index(&res.catalog, index);
    // step 2
    let mut sentences = Vec::with_capacity(scheme.premises.len() + 1);
    for (i, f) in scheme.sentences().enumerate() {
        let conclusion = i == scheme.premises.len();
        sentences.push(verbalize_sentence(f, &v.templates, pool, conclusion, &mut rng)?);
    }
    // step 3
    let domains = v.domains.pool(pool);
    let domain = *domains.choose(&mut rng).ok_or(PipelineError::NoDomain(split))?;
    let need = scheme.placeholders().len() + usize::from(scheme.uses_constant() && domain.subjects.is_none());
    if domain.entities.len() < need {
        return Err(PipelineError::InsufficientEntities {
            domain: domain.name.clone(),
            scheme: scheme.id.clone(),
            need,
            have: domain.entities.len(),
        });
    }
    let binding = domain.draw_binding(scheme, &mut rng);
    let argument = substitute(scheme, &binding).map_err(|source| PipelineError::Logic { id: id.clone(), source })?;
    verify(&id, &argument)?;
    let mut realized = realize_predicates(&sentences, &binding)?;
    let conclusion = realized.pop().expect("conclusion sentence");
    // step 4
    let mut order: Vec<usize> = (0..realized.len()).collect();
    order.shuffle(&mut rng);
    let premises: Vec<_> = order.iter().map(|&i| realized[i].clone()).collect();
    // step 5
    let frame = Frame {
        intro: domain.intros.choose(&mut rng).expect("validated intros"),
        style: v.frames.premise_styles.choose(&mut rng).expect("validated styles"),
        indicator: v.frames.indicators.choose(&mut rng).expect("validated indicators"),
    };
    let paragraph = compose_paragraph(&premises, &conclusion, &frame)?;

    Ok(GeneratedItem {
        item: ArgumentItem {
            id,
            scheme_id: scheme.id.clone(),
            group: scheme.group,
            domain: domain.name.clone(),
            split,
            text: paragraph.text,
            premises: premises.into_iter().map(|p| p.text).collect(),
            conclusion: conclusion.text,
            span_e: paragraph.span_e,
            span_s: paragraph.span_s,
            rng_seed_used: seed,
        },
        audit: ItemAudit {
            argument,
            templates: sentences.iter().map(|s| s.template.id.clone()).collect(),
            premise_order: order,
        },
    })
}

/// The four generated splits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub train: Vec<GeneratedItem>,
    pub dev: Vec<GeneratedItem>,
    pub test_out_of_sample: Vec<GeneratedItem>,
    pub test_out_of_domain: Vec<GeneratedItem>,
}

impl Corpus {
    pub fn split(&self, s: CorpusSplit) -> &[GeneratedItem] {
        match s {
            CorpusSplit::Train => &self.train,
            CorpusSplit::Dev => &self.dev,
            CorpusSplit::TestOutOfSample => &self.test_out_of_sample,
            CorpusSplit::TestOutOfDomain => &self.test_out_of_domain,
        }
    }

    fn split_mut(&mut self, s: CorpusSplit) -> &mut Vec<GeneratedItem> {
        match s {
            CorpusSplit::Train => &mut self.train,
            CorpusSplit::Dev => &mut self.dev,
            CorpusSplit::TestOutOfSample => &mut self.test_out_of_sample,
            CorpusSplit::TestOutOfDomain => &mut self.test_out_of_domain,
        }
    }

    pub fn items(&self, s: CorpusSplit) -> Vec<ArgumentItem> {
        self.split(s).iter().map(|g| g.item.clone()).collect()
    }
}

/// Generates all four splits. Items are produced in parallel on `workers`
/// threads (all cores when 0); texts already seen in an earlier split or
/// index are re-drawn sequentially, so the result does not depend on the
/// number of workers.
pub fn generate_corpus(cfg: &GenerationConfig, res: &Resources, workers: usize) -> Result<Corpus, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut corpus = Corpus::default();
    let mut seen: HashSet<String> = HashSet::new();
    for split in CorpusSplit::ALL {
        let n = cfg.counts.get(split);
        let drafts: Vec<Result<GeneratedItem, PipelineError>> = pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| generate_item(res, split, i, item_seed(cfg.master_seed, split, i, 0)))
                .collect()
        });
        let out = corpus.split_mut(split);
        out.reserve(n);
        for (index, draft) in drafts.into_iter().enumerate() {
            let mut item = draft?;
            let mut attempt = 0;
            while seen.contains(&item.item.text) {
                attempt += 1;
                if attempt > cfg.max_retries {
                    return Err(PipelineError::Duplicates {
                        split,
                        index,
                        retries: cfg.max_retries,
                    });
                }
                item = generate_item(res, split, index, item_seed(cfg.master_seed, split, index, attempt))?;
            }
            seen.insert(item.item.text.clone());
            out.push(item);
        }
    }
    Ok(corpus)
}
