use serde::{Deserialize, Serialize};

use super::VerbalizerError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseStyle {
    pub id: String,
    /// Prefix for the i-th premise; the last one repeats.
    pub prefixes: Vec<String>,
    /// Lowercase the sentence's first letter after the prefix.
    #[serde(default)]
    pub lowercase: bool,
}

impl PremiseStyle {
    pub fn prefix(&self, i: usize) -> &str {
        self.prefixes
            .get(i)
            .or(self.prefixes.last())
            .map(String::as_str)
            .unwrap_or("")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Frames {
    pub premise_styles: Vec<PremiseStyle>,
    pub indicators: Vec<String>,
}

impl Frames {
    pub fn from_json(text: &str) -> Result<Self, VerbalizerError> {
        let f: Frames = serde_json::from_str(text)?;
        if f.premise_styles.is_empty() || f.indicators.is_empty() {
            return Err(VerbalizerError::Template(
                "frames".into(),
                "needs at least one premise style and one indicator".into(),
            ));
        }
        Ok(f)
    }
}

/// The pieces chosen to frame one argument.
#[derive(Clone, Copy, Debug)]
pub struct Frame<'a> {
    pub intro: &'a str,
    pub style: &'a PremiseStyle,
    pub indicator: &'a str,
}

/// A realized sentence and whether it opens with a proper name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedSentence {
    pub text: String,
    pub starts_with_name: bool,
}

/// Conclusion tail: `[not ]a(n)` and `predicate.`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    pub e: String,
    pub s: String,
}

/// Finds the trailing `[not ]a(n) X.` of a sentence.
pub fn detect_tail(sentence: &str) -> Option<Tail> {
    let body = sentence.strip_suffix('.')?;
    let words: Vec<&str> = body.split(' ').collect();
    let at = words.iter().rposition(|w| *w == "a" || *w == "an")?;
    if at + 1 >= words.len() {
        return None;
    }
    let negated = at > 0 && words[at - 1] == "not";
    let e = if negated {
        format!("not {}", words[at])
    } else {
        words[at].to_string()
    };
    Some(Tail {
        e,
        s: format!("{}.", words[at + 1..].join(" ")),
    })
}

/// Character-offset span, end exclusive.
pub type Span = [usize; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Paragraph {
    pub text: String,
    pub span_e: Span,
    pub span_s: Span,
}

pub fn lcfirst(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn framed(prefix: &str, s: &RenderedSentence, lowercase: bool) -> String {
    if lowercase && !prefix.is_empty() && !s.starts_with_name {
        format!("{prefix}{}", lcfirst(&s.text))
    } else {
        format!("{prefix}{}", s.text)
    }
}

/// Intro, framed premises, inference indicator and conclusion as one
/// paragraph ending with the conclusion, plus the gold tail spans.
pub fn compose_paragraph(
    premises: &[RenderedSentence],
    conclusion: &RenderedSentence,
    frame: &Frame,
) -> Result<Paragraph, VerbalizerError> {
    if premises.is_empty() {
        return Err(VerbalizerError::NoPremises);
    }
    let tail = detect_tail(&conclusion.text).ok_or_else(|| VerbalizerError::NoTail(conclusion.text.clone()))?;
    let mut parts: Vec<String> = Vec::with_capacity(premises.len() + 2);
    if !frame.intro.is_empty() {
        parts.push(frame.intro.to_string());
    }
    for (i, p) in premises.iter().enumerate() {
        parts.push(framed(frame.style.prefix(i), p, frame.style.lowercase));
    }
    parts.push(framed(frame.indicator, conclusion, true));
    let text = parts.join(" ");
    let len = text.chars().count();
    let s_len = tail.s.chars().count();
    let e_len = tail.e.chars().count();
    let span_s = [len - s_len, len];
    let span_e = [span_s[0] - 1 - e_len, span_s[0] - 1];
    Ok(Paragraph { text, span_e, span_s })
}

/// Substring by character offsets.
pub fn char_slice(text: &str, span: Span) -> String {
    text.chars().skip(span[0]).take(span[1] - span[0]).collect()
}
