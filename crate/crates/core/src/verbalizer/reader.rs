//! Reads realized sentences back into formulas by matching them against the
//! sentence templates. Predicates of the result are the surface lexemes.

use super::domain::{NAME_PARTICLES, RESERVED_WORDS};
use super::template::{Segment, SentenceTemplate, Slot, TemplateRegistry};
use crate::logic::{Formula, Literal, Phrase, SentenceForm};

/// A sentence read back into logic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reading {
    pub formula: Formula,
    pub constant: Option<String>,
    pub template: String,
}

/// Premises found in a prompt plus its unfinished last fragment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadArgument {
    pub premises: Vec<Formula>,
    pub constant: Option<String>,
    pub open: String,
}

fn valid_lexeme(x: &str) -> bool {
    !x.is_empty()
        && !x.starts_with(' ')
        && !x.ends_with(' ')
        && !x.contains(['.', ',', ':', '?', '!', '"'])
        && x.split(' ')
            .all(|w| !w.is_empty() && !RESERVED_WORDS.contains(&w.to_lowercase().as_str()))
}

fn valid_name(x: &str, templates: &TemplateRegistry) -> bool {
    let words: Vec<&str> = x.split(' ').collect();
    let first_words: Vec<&str> = templates
        .all()
        .iter()
        .filter_map(|t| match t.segments.first() {
            Some(Segment::Text(s)) => s.split(' ').next(),
            _ => None,
        })
        .collect();
    !x.is_empty()
        && !x.contains([',', ':', '.', '?', '!'])
        && !first_words.contains(&words[0])
        && words[0].chars().next().is_some_and(char::is_uppercase)
        && words.iter().all(|w| {
            !w.is_empty()
                && (w.chars().next().is_some_and(char::is_uppercase) || NAME_PARTICLES.contains(w))
                && !RESERVED_WORDS.contains(&w.to_lowercase().as_str())
        })
}

fn parse_literal(text: &str, strict: bool) -> Option<Literal> {
    let (negated, rest) = match text.strip_prefix("not ") {
        Some(r) => (true, r),
        None => (false, text),
    };
    let noun = match rest.strip_prefix("a ").or_else(|| rest.strip_prefix("an ")) {
        Some(n) => n,
        None if !strict => rest,
        None => return None,
    };
    valid_lexeme(noun).then(|| Literal {
        negated,
        pred: noun.to_string(),
    })
}

fn parse_pos(text: &str, strict: bool) -> Option<String> {
    parse_literal(text, strict).filter(|l| !l.negated).map(|l| l.pred)
}

fn parse_phrase(text: &str, strict: bool) -> Option<Phrase> {
    if let Some(rest) = text.strip_prefix("not both ") {
        let (a, b) = rest.split_once(" and ")?;
        return Some(Phrase::NotBoth(parse_pos(a, strict)?, parse_pos(b, strict)?));
    }
    if let Some(rest) = text.strip_prefix("neither ") {
        let (a, b) = rest.split_once(" nor ")?;
        return Some(Phrase::Neither(parse_pos(a, strict)?, parse_pos(b, strict)?));
    }
    for (sep, all) in [(" and ", true), (" or ", false)] {
        if text.contains(sep) {
            let lits = text
                .split(sep)
                .map(|part| parse_literal(part, strict))
                .collect::<Option<Vec<_>>>()?;
            return Some(if all { Phrase::All(lits) } else { Phrase::Any(lits) });
        }
    }
    parse_literal(text, strict).map(Phrase::Lit)
}

/// Captures for each slot, trying every split point.
fn match_segments<'t>(
    segs: &[Segment],
    text: &'t str,
    first: bool,
    out: &mut Vec<(Slot, &'t str)>,
) -> Vec<Vec<(Slot, &'t str)>> {
    match segs.split_first() {
        None => {
            if text.is_empty() {
                vec![out.clone()]
            } else {
                vec![]
            }
        }
        Some((Segment::Text(t), rest)) => {
            let matches = if first {
                let mut a = t.chars();
                let mut b = text.chars();
                match (a.next(), b.next()) {
                    (Some(x), Some(y)) if x.to_lowercase().eq(y.to_lowercase()) => b.as_str().starts_with(a.as_str()),
                    _ => false,
                }
            } else {
                text.starts_with(t.as_str())
            };
            if matches {
                match_segments(rest, &text[t.len()..], false, out)
            } else {
                vec![]
            }
        }
        Some((Segment::Slot(slot), rest)) => {
            let mut results = Vec::new();
            let ends: Vec<usize> = match rest.first() {
                None => vec![text.len()],
                Some(Segment::Text(next)) => text.match_indices(next.as_str()).map(|(i, _)| i).collect(),
                Some(Segment::Slot(_)) => text.char_indices().map(|(i, _)| i).skip(1).collect(),
            };
            for end in ends.into_iter().filter(|&e| e > 0) {
                out.push((*slot, &text[..end]));
                results.extend(match_segments(rest, &text[end..], false, out));
                out.pop();
            }
            results
        }
    }
}

fn read_with(t: &SentenceTemplate, sentence: &str, strict: bool, templates: &TemplateRegistry) -> Option<Reading> {
    for caps in match_segments(&t.segments, sentence, true, &mut Vec::new()) {
        let mut p = None;
        let mut q = None;
        let mut name = None;
        let mut ok = true;
        for (slot, text) in caps {
            match slot {
                Slot::P => p = parse_phrase(text, strict),
                Slot::PNoun => p = valid_lexeme(text).then(|| Phrase::Lit(Literal::pos(text))),
                Slot::Q => q = parse_phrase(text, strict),
                Slot::Name => {
                    ok &= valid_name(text, templates);
                    name = Some(text.to_string());
                }
            }
        }
        let Some(p) = p.filter(|_| ok) else { continue };
        let form = match t.shape {
            crate::logic::Shape::Generalization => SentenceForm::Generalization {
                antecedent: p,
                consequent: match q.clone() {
                    Some(q) => q,
                    None => continue,
                },
            },
            crate::logic::Shape::Biconditional => SentenceForm::Biconditional {
                left: p,
                right: match q.clone() {
                    Some(q) => q,
                    None => continue,
                },
            },
            crate::logic::Shape::Predication => SentenceForm::Predication { phrase: p },
        };
        return Some(Reading {
            formula: form.to_formula(),
            constant: name,
            template: t.id.clone(),
        });
    }
    None
}

/// Reads one complete sentence (ending with a period). Articles are
/// required on the first pass and optional on the second.
pub fn read_sentence(sentence: &str, templates: &TemplateRegistry) -> Option<Reading> {
    let sentence = sentence.trim();
    for strict in [true, false] {
        for t in templates.all() {
            if let Some(r) = read_with(t, sentence, strict, templates) {
                return Some(r);
            }
        }
    }
    None
}

/// Reads the longest word-boundary suffix of `fragment` that is a sentence.
pub fn read_fragment(fragment: &str, templates: &TemplateRegistry) -> Option<Reading> {
    let starts = std::iter::once(0).chain(fragment.match_indices(' ').map(|(i, _)| i + 1));
    for strict in [true, false] {
        for start in starts.clone() {
            let suffix = &fragment[start..];
            for t in templates.all() {
                if let Some(r) = read_with(t, suffix, strict, templates) {
                    return Some(r);
                }
            }
        }
    }
    None
}

/// Splits a text after sentence-final punctuation followed by a space.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for i in 0..bytes.len() {
        if matches!(bytes[i], b'.' | b'?' | b'!') && (i + 1 == bytes.len() || bytes[i + 1] == b' ') {
            out.push(text[start..=i].trim());
            start = i + 1;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}

/// Premises of an argumentative prompt and its unfinished conclusion.
/// Sentences naming an individual other than the first one named are
/// skipped.
pub fn read_prompt(prompt: &str, templates: &TemplateRegistry) -> ReadArgument {
    let sentences = split_sentences(prompt.trim());
    let (closed, open) = match sentences.last() {
        Some(last) if !last.ends_with(['.', '?', '!']) => (&sentences[..sentences.len() - 1], last.to_string()),
        _ => (&sentences[..], String::new()),
    };
    let mut premises = Vec::new();
    let mut constant: Option<String> = None;
    for s in closed {
        if let Some(r) = read_fragment(s, templates) {
            match (&constant, &r.constant) {
                (Some(c), Some(n)) if c != n => continue,
                (None, Some(n)) => constant = Some(n.clone()),
                _ => {}
            }
            premises.push(r.formula);
        }
    }
    ReadArgument {
        premises,
        constant,
        open,
    }
}
