use serde::{Deserialize, Serialize};

use super::VerbalizerError;
use crate::logic::{Literal, Phrase, SentenceForm, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    TestOnly,
}

/// Slot in a sentence pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// First phrase: antecedent, predication phrase, or left side.
    P,
    /// Second phrase: consequent or right side.
    Q,
    /// First phrase as a bare noun, without article.
    PNoun,
    /// The individual constant.
    Name,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Slot(Slot),
}

#[derive(Clone, Debug, Deserialize)]
struct RawTemplate {
    id: String,
    shape: Shape,
    split: Split,
    pattern: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceTemplate {
    pub id: String,
    pub shape: Shape,
    pub split: Split,
    pub pattern: String,
    pub segments: Vec<Segment>,
}

fn parse_pattern(id: &str, pattern: &str) -> Result<Vec<Segment>, VerbalizerError> {
    let mut out = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            out.push(Segment::Text(rest[..open].to_string()));
        }
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| VerbalizerError::Template(id.to_string(), "unclosed slot".into()))?;
        let slot = match &rest[open + 1..open + close] {
            "P" => Slot::P,
            "Q" => Slot::Q,
            "P:noun" => Slot::PNoun,
            "a" => Slot::Name,
            other => return Err(VerbalizerError::UnknownSlot(id.to_string(), other.to_string())),
        };
        out.push(Segment::Slot(slot));
        rest = &rest[open + close + 1..];
    }
    if !rest.is_empty() {
        out.push(Segment::Text(rest.to_string()));
    }
    Ok(out)
}

impl SentenceTemplate {
    pub fn new(id: &str, shape: Shape, split: Split, pattern: &str) -> Result<Self, VerbalizerError> {
        let segments = parse_pattern(id, pattern)?;
        let t = Self {
            id: id.to_string(),
            shape,
            split,
            pattern: pattern.to_string(),
            segments,
        };
        t.check_slots()?;
        Ok(t)
    }

    fn slots(&self) -> Vec<Slot> {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Slot(slot) => Some(*slot),
                Segment::Text(_) => None,
            })
            .collect()
    }

    fn check_slots(&self) -> Result<(), VerbalizerError> {
        let slots = self.slots();
        let count = |want: &[Slot]| slots.iter().filter(|s| want.contains(s)).count();
        let (p, q, name) = (count(&[Slot::P, Slot::PNoun]), count(&[Slot::Q]), count(&[Slot::Name]));
        let ok = match self.shape {
            Shape::Generalization | Shape::Biconditional => p == 1 && q == 1 && name == 0,
            Shape::Predication => p == 1 && q == 0 && name == 1,
        };
        if ok {
            Ok(())
        } else {
            Err(VerbalizerError::Template(
                self.id.clone(),
                format!("slots {slots:?} do not fit shape {:?}", self.shape),
            ))
        }
    }

    fn tail_slot(&self) -> Option<Slot> {
        match self.shape {
            Shape::Generalization => Some(Slot::Q),
            Shape::Predication => Some(Slot::P),
            Shape::Biconditional => None,
        }
    }

    /// Whether the sentence ends with its tail phrase followed by a period,
    /// so it can render a conclusion.
    pub fn tail_final(&self) -> bool {
        let n = self.segments.len();
        n >= 2
            && self.segments[n - 1] == Segment::Text(".".into())
            && self
                .tail_slot()
                .is_some_and(|t| self.segments[n - 2] == Segment::Slot(t))
    }

    /// Whether this template can express `form`.
    pub fn fits(&self, form: &SentenceForm) -> bool {
        if form.shape() != self.shape {
            return false;
        }
        let first = match form {
            SentenceForm::Generalization { antecedent, .. } => antecedent,
            SentenceForm::Predication { phrase } => phrase,
            SentenceForm::Biconditional { left, .. } => left,
        };
        !self.slots().contains(&Slot::PNoun) || first.as_noun().is_some()
    }

    /// Renders `form`, mapping placeholder symbols through `lex` and the
    /// constant to `name`.
    pub fn render(&self, form: &SentenceForm, lex: &dyn Fn(&str) -> String, name: &str) -> String {
        let (first, second) = match form {
            SentenceForm::Generalization { antecedent, consequent } => (antecedent, Some(consequent)),
            SentenceForm::Predication { phrase } => (phrase, None),
            SentenceForm::Biconditional { left, right } => (left, Some(right)),
        };
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(Slot::P) => out.push_str(&render_phrase(first, lex)),
                Segment::Slot(Slot::PNoun) => out.push_str(&lex(first.as_noun().expect("checked by fits"))),
                Segment::Slot(Slot::Q) => out.push_str(&render_phrase(second.expect("checked by fits"), lex)),
                Segment::Slot(Slot::Name) => out.push_str(name),
            }
        }
        out
    }
}

/// "a" or "an" by the initial letter of the noun phrase.
pub fn article(noun: &str) -> &'static str {
    match noun.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

/// `[not ]a(n)`: the part of a literal before its predicate.
pub fn literal_prefix(negated: bool, noun: &str) -> String {
    if negated {
        format!("not {}", article(noun))
    } else {
        article(noun).to_string()
    }
}

pub fn render_literal(l: &Literal, lex: &dyn Fn(&str) -> String) -> String {
    let noun = lex(&l.pred);
    format!("{} {noun}", literal_prefix(l.negated, &noun))
}

pub fn render_phrase(p: &Phrase, lex: &dyn Fn(&str) -> String) -> String {
    let join = |lits: &[Literal], sep: &str| {
        lits.iter()
            .map(|l| render_literal(l, lex))
            .collect::<Vec<_>>()
            .join(sep)
    };
    let pos = |s: &str| render_literal(&Literal::pos(s), lex);
    match p {
        Phrase::Lit(l) => render_literal(l, lex),
        Phrase::All(lits) => join(lits, " and "),
        Phrase::Any(lits) => join(lits, " or "),
        Phrase::NotBoth(a, b) => format!("not both {} and {}", pos(a), pos(b)),
        Phrase::Neither(a, b) => format!("neither {} nor {}", pos(a), pos(b)),
    }
}

#[derive(Clone, Debug, Deserialize)]
struct RawRegistry {
    sentences: Vec<RawTemplate>,
}

/// All sentence templates, validated.
#[derive(Clone, Debug)]
pub struct TemplateRegistry {
    templates: Vec<SentenceTemplate>,
}

impl TemplateRegistry {
    pub fn from_json(text: &str) -> Result<Self, VerbalizerError> {
        let raw: RawRegistry = serde_json::from_str(text)?;
        let mut templates: Vec<SentenceTemplate> = Vec::new();
        for r in raw.sentences {
            if templates.iter().any(|t| t.id == r.id) {
                return Err(VerbalizerError::Template(r.id, "duplicate id".into()));
            }
            templates.push(SentenceTemplate::new(&r.id, r.shape, r.split, &r.pattern)?);
        }
        Ok(Self { templates })
    }

    pub fn all(&self) -> &[SentenceTemplate] {
        &self.templates
    }

    pub fn get(&self, id: &str) -> Option<&SentenceTemplate> {
        self.templates.iter().find(|t| t.id == id)
    }

    /// Templates of one split that can express `form` (and, for a
    /// conclusion, end with its tail).
    pub fn candidates(&self, form: &SentenceForm, split: Split, conclusion: bool) -> Vec<&SentenceTemplate> {
        self.templates
            .iter()
            .filter(|t| t.split == split && t.fits(form) && (!conclusion || t.tail_final()))
            .collect()
    }
}
