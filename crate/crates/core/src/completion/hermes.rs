use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::normalize_completion;
use crate::gateway::{GatewayError, GenerateRequest, LanguageModel, DEFAULT_MAX_TOKENS};
use crate::logic::{is_valid, Formula};
use crate::pipeline::derive_seed;
use crate::verbalizer::reader::{read_fragment, read_prompt};
use crate::verbalizer::TemplateRegistry;

/// Hand-written probe outside every corpus domain and template.
pub const HERMES_PROMPT: &str = "Every philosopher is mortal. Hermes is not mortal. Therefore, Hermes";

/// Logical status of a completion relative to the premises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    /// Follows from all premises together and from no proper subset.
    Entailed,
    /// Follows from a proper subset of the premises.
    Redundant,
    /// Its negation follows from the premises.
    Contradictory,
    Independent,
    /// Not readable as a sentence about the premises' terms.
    Unparsed,
}

impl Category {
    pub fn symbol(self) -> &'static str {
        match self {
            Category::Entailed => "*",
            Category::Redundant => "=",
            Category::Contradictory => "!",
            Category::Independent => "o",
            Category::Unparsed => "?",
        }
    }
}

fn follows(premises: &[Formula], c: &Formula) -> bool {
    is_valid(premises, c).unwrap_or(false)
}

/// Categorizes the conclusion `c` against `premises`.
pub fn categorize(premises: &[Formula], c: &Formula) -> Category {
    if follows(premises, c) {
        let redundant = (0..premises.len()).any(|skip| {
            let rest: Vec<Formula> = premises
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, f)| f.clone())
                .collect();
            follows(&rest, c)
        });
        return if redundant {
            Category::Redundant
        } else {
            Category::Entailed
        };
    }
    if follows(premises, &Formula::not(c.clone())) {
        return Category::Contradictory;
    }
    Category::Independent
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermesRow {
    pub completion: String,
    pub category: Category,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermesReport {
    pub model_name: String,
    pub prompt: String,
    pub samples: usize,
    pub failed: usize,
    pub rows: Vec<HermesRow>,
}

impl HermesReport {
    pub fn count(&self, category: Category) -> usize {
        self.rows
            .iter()
            .filter(|r| r.category == category)
            .map(|r| r.count)
            .sum()
    }

    /// Frequency table, most frequent first.
    pub fn render(&self, top: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model_name);
        let _ = writeln!(out, "prompt: {} ...", self.prompt);
        let _ = writeln!(out, "{:<48} {:>3} {:>6}", "completion", "cat", "count");
        for r in self.rows.iter().take(top) {
            let _ = writeln!(
                out,
                "{:<48} {:>3} {:>6}",
                format!("... {}", r.completion),
                r.category.symbol(),
                r.count
            );
        }
        let others: usize = self.rows.iter().skip(top).map(|r| r.count).sum();
        let _ = writeln!(out, "{:<48} {:>3} {:>6}", "others", "", others);
        if self.failed > 0 {
            let _ = writeln!(out, "failed requests: {}", self.failed);
        }
        out
    }
}

/// Samples `samples` completions of `prompt` and tabulates them by
/// normalized text with their logical category.
pub fn run_hermes_probe(
    lm: &dyn LanguageModel,
    templates: &TemplateRegistry,
    prompt: &str,
    samples: usize,
    master_seed: u64,
    top_p: f64,
) -> Result<HermesReport, GatewayError> {
    let model_name = lm.info()?.model_name;
    let arg = read_prompt(prompt, templates);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut failed = 0;
    for i in 0..samples {
        let req = GenerateRequest {
            prompt: prompt.to_string(),
            max_tokens: DEFAULT_MAX_TOKENS,
            top_p,
            seed: derive_seed(&[&master_seed.to_string(), "hermes", &i.to_string()]),
        };
        match lm.generate(&req) {
            Ok(r) => *counts.entry(normalize_completion(&r.text)).or_default() += 1,
            Err(_) => failed += 1,
        }
    }
    let mut rows: Vec<HermesRow> = counts
        .into_iter()
        .map(|(completion, count)| {
            let sentence = format!("{} {}", arg.open.trim(), completion);
            let category = match read_fragment(&sentence, templates) {
                Some(r) if completion.ends_with('.') && r.formula.is_closed() => categorize(&arg.premises, &r.formula),
                _ => Category::Unparsed,
            };
            HermesRow {
                completion,
                category,
                count,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.completion.cmp(&b.completion)));
    Ok(HermesReport {
        model_name,
        prompt: prompt.to_string(),
        samples,
        failed,
        rows,
    })
}
