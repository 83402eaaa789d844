//! Zero-shot classification by relevance perplexity: every class is a
//! (prompt, completion) pair and the pair whose completion the prompt makes
//! most expected, relative to its prior, wins.

mod adapter;
mod eval;

use serde::{Deserialize, Serialize};

pub use adapter::{
    load_dataset, parse_dataset, render, Adapter, AdapterError, BenchmarkItem, BenchmarkKind, DataFormat, RawRecord,
};
pub use eval::{run_nlu_eval, NluRecord, NluReport};

use crate::gateway::{GatewayError, LanguageModel, ScoreRequest};

#[derive(Debug, thiserror::Error)]
pub enum NluError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("completion {0:?} has no tokens")]
    ZeroTokens(String),
    #[error("invalid classification template: {0}")]
    Template(String),
}

/// exp of the mean negative log-likelihood.
pub fn perplexity(token_logprobs: &[f64]) -> Option<f64> {
    if token_logprobs.is_empty() {
        return None;
    }
    let mean = token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64;
    Some((-mean).exp())
}

/// PP(c|p) and its token count; an empty prompt gives PP(c).
pub fn conditional_perplexity(
    lm: &dyn LanguageModel,
    prompt: &str,
    completion: &str,
) -> Result<(f64, usize), NluError> {
    if completion.split_whitespace().next().is_none() {
        return Err(NluError::ZeroTokens(completion.to_string()));
    }
    let r = lm.score(&ScoreRequest {
        prompt: prompt.to_string(),
        completion: completion.to_string(),
    })?;
    let pp = perplexity(&r.token_logprobs).ok_or_else(|| NluError::ZeroTokens(completion.to_string()))?;
    Ok((pp, r.token_count))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerplexityScore {
    pub conditional: f64,
    pub unconditional: f64,
    pub rel: f64,
    pub tokens: usize,
}

impl PerplexityScore {
    pub fn new(conditional: f64, unconditional: f64, tokens: usize) -> Self {
        Self {
            conditional,
            unconditional,
            rel: conditional / unconditional,
            tokens,
        }
    }
}

/// relPP(c, p) = PP(c|p) / PP(c).
pub fn relevance_perplexity(
    lm: &dyn LanguageModel,
    prompt: &str,
    completion: &str,
) -> Result<PerplexityScore, NluError> {
    let (cond, tokens) = conditional_perplexity(lm, prompt, completion)?;
    let (uncond, _) = conditional_perplexity(lm, "", completion)?;
    Ok(PerplexityScore::new(cond, uncond, tokens))
}

/// Prompts, completions and the class label of every pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationTemplate {
    pub prompts: Vec<String>,
    pub completions: Vec<String>,
    /// `labels[i][j]` is the class (1-based) of pair (p_i, c_j).
    pub labels: Vec<Vec<usize>>,
}

impl ClassificationTemplate {
    /// Labels numbered row-major: L(p_i, c_j) = i * m + j + 1.
    pub fn row_major(prompts: Vec<String>, completions: Vec<String>) -> Self {
        let m = completions.len();
        let labels = (0..prompts.len())
            .map(|i| (0..m).map(|j| i * m + j + 1).collect())
            .collect();
        Self {
            prompts,
            completions,
            labels,
        }
    }

    pub fn classes(&self) -> usize {
        self.prompts.len() * self.completions.len()
    }

    /// Checks that the label map is a bijection onto 1..=N.
    pub fn validate(&self) -> Result<(), NluError> {
        let (n, m) = (self.prompts.len(), self.completions.len());
        if n == 0 || m == 0 {
            return Err(NluError::Template(
                "needs at least one prompt and one completion".into(),
            ));
        }
        if self.labels.len() != n || self.labels.iter().any(|row| row.len() != m) {
            return Err(NluError::Template(format!("label map is not {n} x {m}")));
        }
        let mut seen = vec![false; n * m];
        for &l in self.labels.iter().flatten() {
            if l == 0 || l > n * m || std::mem::replace(&mut seen[l - 1], true) {
                return Err(NluError::Template(format!(
                    "label {l} breaks the bijection onto 1..={}",
                    n * m
                )));
            }
        }
        Ok(())
    }
}

/// Label of the lowest score; ties go to the lexicographically first pair.
pub fn argmin_label(scores: &[Vec<f64>], labels: &[Vec<usize>]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, row) in scores.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, labels[i][j]));
            }
        }
    }
    best.map(|(_, l)| l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub category: usize,
    /// `rel_pp[i][j]` = relPP(c_j, p_i).
    pub rel_pp: Vec<Vec<f64>>,
}

/// Scores every (prompt, completion) pair and returns the label of the
/// pair with the lowest relevance perplexity.
pub fn classify(lm: &dyn LanguageModel, t: &ClassificationTemplate) -> Result<Classification, NluError> {
    t.validate()?;
    let prior: Vec<f64> = t
        .completions
        .iter()
        .map(|c| conditional_perplexity(lm, "", c).map(|(pp, _)| pp))
        .collect::<Result<_, _>>()?;
    let mut rel_pp = Vec::with_capacity(t.prompts.len());
    for p in &t.prompts {
        let mut row = Vec::with_capacity(t.completions.len());
        for (c, uncond) in t.completions.iter().zip(&prior) {
            let (cond, _) = conditional_perplexity(lm, p, c)?;
            row.push(cond / uncond);
        }
        rel_pp.push(row);
    }
    let category = argmin_label(&rel_pp, &t.labels).expect("validated template is non-empty");
    Ok(Classification { category, rel_pp })
}
