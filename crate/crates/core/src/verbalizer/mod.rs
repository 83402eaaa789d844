//! Natural-language rendering of scheme sentences: sentence templates,
//! domain lexemes, and paragraph framing.

mod domain;
mod frame;
pub mod reader;
mod template;

use rand::seq::IndexedRandom;
use rand::Rng;

pub use domain::{Domain, DomainRegistry, DEFAULT_DOMAINS, NAME_PARTICLES, RESERVED_WORDS};
pub use frame::{
    char_slice, compose_paragraph, detect_tail, lcfirst, Frame, Frames, Paragraph, PremiseStyle, RenderedSentence,
    Span, Tail,
};
pub use template::{
    article, literal_prefix, render_literal, render_phrase, Segment, SentenceTemplate, Slot, Split, TemplateRegistry,
};

use crate::logic::{Binding, Formula, SentenceForm};

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.json");
pub const DEFAULT_FRAMES: &str = include_str!("../../data/frames.json");

#[derive(Debug, thiserror::Error)]
pub enum VerbalizerError {
    #[error("malformed template or domain data: {0}")]
    Json(#[from] serde_json::Error),
    #[error("template {0}: {1}")]
    Template(String, String),
    #[error("template {0}: unknown slot {{{1}}}")]
    UnknownSlot(String, String),
    #[error("domain {0}: {1}")]
    Domain(String, String),
    #[error("no natural-language form for '{0}'")]
    Unsupported(String),
    #[error("no {split:?} template for '{formula}'")]
    NoTemplate { formula: String, split: Split },
    #[error("no lexeme bound to '{0}'")]
    UnboundSlot(String),
    #[error("an argument needs at least one premise")]
    NoPremises,
    #[error("conclusion '{0}' does not end in a predicate phrase")]
    NoTail(String),
}

/// A sentence with a chosen template; placeholder symbols still unbound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceScheme {
    pub template: SentenceTemplate,
    pub form: SentenceForm,
}

impl SentenceScheme {
    /// Text with placeholder symbols in place of predicates, e.g.
    /// "Every F is a G."
    pub fn symbolic(&self) -> String {
        self.template.render(&self.form, &|p| p.to_string(), "a")
    }

    pub fn starts_with_name(&self) -> bool {
        self.template.segments.first() == Some(&Segment::Slot(Slot::Name))
    }
}

/// Picks a random template of `split` for `f`. Conclusions only use
/// templates that end with the tail phrase.
pub fn verbalize_sentence(
    f: &Formula,
    templates: &TemplateRegistry,
    split: Split,
    conclusion: bool,
    rng: &mut impl Rng,
) -> Result<SentenceScheme, VerbalizerError> {
    let form = SentenceForm::classify(f).ok_or_else(|| VerbalizerError::Unsupported(f.to_string()))?;
    let pool = templates.candidates(&form, split, conclusion);
    let template = pool.choose(rng).ok_or_else(|| VerbalizerError::NoTemplate {
        formula: f.to_string(),
        split,
    })?;
    Ok(SentenceScheme {
        template: (*template).clone(),
        form,
    })
}

/// Replaces placeholder symbols and the constant by the bound lexemes.
pub fn realize_predicates(
    sentences: &[SentenceScheme],
    binding: &Binding,
) -> Result<Vec<RenderedSentence>, VerbalizerError> {
    sentences
        .iter()
        .map(|s| {
            for p in s.form.to_formula().predicates() {
                if !binding.predicates.contains_key(&p) {
                    return Err(VerbalizerError::UnboundSlot(p));
                }
            }
            let name = match (&binding.constant, s.form.to_formula().mentions_constant()) {
                (Some(n), _) => n.as_str(),
                (None, false) => "",
                (None, true) => return Err(VerbalizerError::UnboundSlot("a".into())),
            };
            Ok(RenderedSentence {
                text: s.template.render(&s.form, &|p| binding.predicates[p].clone(), name),
                starts_with_name: s.starts_with_name(),
            })
        })
        .collect()
}

/// Template, domain and framing inventories.
#[derive(Clone, Debug)]
pub struct Verbalizer {
    pub templates: TemplateRegistry,
    pub domains: DomainRegistry,
    pub frames: Frames,
}

impl Verbalizer {
    pub fn shipped() -> Self {
        Self {
            templates: TemplateRegistry::from_json(DEFAULT_TEMPLATES).expect("shipped templates are valid"),
            domains: DomainRegistry::from_json(&DEFAULT_DOMAINS).expect("shipped domains are valid"),
            frames: Frames::from_json(DEFAULT_FRAMES).expect("shipped frames are valid"),
        }
    }
}
