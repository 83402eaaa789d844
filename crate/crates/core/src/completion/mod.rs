//! Conclusion-completion tasks: extraction from corpus items, answer
//! matching, evaluation against a language model and the Hermes probe.

mod eval;
mod hermes;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{
    render_table, run_completion_eval, Accuracy, CompletionParams, CompletionRecord, EvalReport, TaskScores,
};
pub use hermes::{categorize, run_hermes_probe, Category, HermesReport, HermesRow, HERMES_PROMPT};

use crate::logic::Group;
use crate::pipeline::{ArgumentItem, CorpusSplit};
use crate::verbalizer::{article, char_slice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Task {
    Split,
    Extended,
    Inverted,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Split, Task::Extended, Task::Inverted];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Split => "SPLIT",
            Task::Extended => "EXTENDED",
            Task::Inverted => "INVERTED",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSet {
    OutOfSample,
    Paraphrased,
    OutOfDomain,
}

impl TestSet {
    pub const ALL: [TestSet; 3] = [TestSet::OutOfSample, TestSet::Paraphrased, TestSet::OutOfDomain];

    pub fn as_str(self) -> &'static str {
        match self {
            TestSet::OutOfSample => "out_of_sample",
            TestSet::Paraphrased => "paraphrased",
            TestSet::OutOfDomain => "out_of_domain",
        }
    }

    /// Test set an item belongs to by its corpus split.
    pub fn of_split(split: CorpusSplit) -> Self {
        match split {
            CorpusSplit::TestOutOfDomain => TestSet::OutOfDomain,
            _ => TestSet::OutOfSample,
        }
    }
}

impl std::str::FromStr for TestSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestSet::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown test set {s:?}; expected out_of_sample, paraphrased or out_of_domain"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskItem {
    pub id: String,
    pub task: Task,
    pub prompt: String,
    pub gold: String,
    pub source_id: String,
    pub scheme_id: String,
    pub group: Group,
    pub test_set: TestSet,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("item {id}: corrupt spans: {reason}")]
    SpanCorruption { id: String, reason: String },
    #[error("gold {0:?} does not have the form \"[not] a|an PREDICATE\"")]
    Pattern(String),
}

/// Splits an extended gold into negation flag and predicate.
fn parse_gold(gold: &str) -> Option<(bool, &str)> {
    let (negated, rest) = match gold.strip_prefix("not ") {
        Some(r) => (true, r),
        None => (false, gold),
    };
    let pred = rest.strip_prefix("a ").or_else(|| rest.strip_prefix("an "))?;
    (!pred.trim().is_empty() && !pred.starts_with(' ')).then_some((negated, pred))
}

/// Toggles the negator of an extended gold, re-agreeing the article.
pub fn invert_gold(gold: &str) -> Result<String, TaskError> {
    let (negated, pred) = parse_gold(gold).ok_or_else(|| TaskError::Pattern(gold.to_string()))?;
    let neg = if negated { "" } else { "not " };
    Ok(format!("{neg}{} {pred}", article(pred)))
}

fn corrupt(item: &ArgumentItem, reason: impl Into<String>) -> TaskError {
    TaskError::SpanCorruption {
        id: item.id.clone(),
        reason: reason.into(),
    }
}

fn char_prefix(text: &str, chars: usize) -> &str {
    match text.char_indices().nth(chars) {
        Some((b, _)) => &text[..b],
        None => text,
    }
}

/// The split, extended and inverted tasks of one item.
pub fn extract_tasks(item: &ArgumentItem, test_set: TestSet) -> Result<[TaskItem; 3], TaskError> {
    let len = item.text.chars().count();
    let [es, ee] = item.span_e;
    let [ss, se] = item.span_s;
    if !(es < ee && ee < ss && ss < se) {
        return Err(corrupt(
            item,
            format!("spans {:?} and {:?} are not ordered", item.span_e, item.span_s),
        ));
    }
    if se != len {
        return Err(corrupt(item, format!("span_S ends at {se}, text has {len} characters")));
    }
    if ss != ee + 1 || char_slice(&item.text, [ee, ss]) != " " {
        return Err(corrupt(item, "span_E and span_S are not separated by one space"));
    }
    let e = char_slice(&item.text, item.span_e);
    if !matches!(e.as_str(), "a" | "an" | "not a" | "not an") {
        return Err(corrupt(item, format!("span_E covers {e:?}")));
    }
    if es > 0 && char_slice(&item.text, [es - 1, es]) != " " {
        return Err(corrupt(item, "span_E does not start a word"));
    }
    let s = char_slice(&item.text, item.span_s);
    let extended_gold = format!("{e} {s}");
    let inverted_gold = invert_gold(&extended_gold)?;
    let split_prompt = char_prefix(&item.text, ss).trim_end().to_string();
    let extended_prompt = char_prefix(&item.text, es).trim_end().to_string();
    let make = |task: Task, prompt: String, gold: String| TaskItem {
        id: format!("{}/{}", item.id, task.as_str().to_lowercase()),
        task,
        prompt,
        gold,
        source_id: item.id.clone(),
        scheme_id: item.scheme_id.clone(),
        group: item.group,
        test_set,
    };
    Ok([
        make(Task::Split, split_prompt, s),
        make(Task::Extended, extended_prompt.clone(), extended_gold),
        make(Task::Inverted, extended_prompt, inverted_gold),
    ])
}

/// Tasks of many items, in item order.
pub fn extract_all(items: &[ArgumentItem], test_set: Option<TestSet>) -> Result<Vec<TaskItem>, TaskError> {
    let mut out = Vec::with_capacity(items.len() * 3);
    for item in items {
        out.extend(extract_tasks(item, test_set.unwrap_or(TestSet::of_split(item.split)))?);
    }
    Ok(out)
}

/// Lowercased, whitespace-collapsed text up to and including its first
/// sentence terminator.
pub fn normalize_completion(text: &str) -> String {
    let lower = text.to_lowercase();
    let cut = match lower.find(['.', '?', '!']) {
        Some(i) => &lower[..=i],
        None => &lower[..],
    };
    cut.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whether the generated continuation starts with the gold completion.
/// The terminator itself is not required, but a continuation of the last
/// word is rejected.
pub fn match_completion(generated: &str, gold: &str) -> bool {
    let strip = |s: String| s.trim_end_matches(['.', '?', '!']).trim_end().to_string();
    let g = strip(normalize_completion(generated));
    let want = strip(normalize_completion(gold));
    !want.is_empty() && (g == want || g.starts_with(&format!("{want} ")))
}
