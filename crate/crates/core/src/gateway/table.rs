use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_generate_request, check_score_request, nucleus_sample, score_response, tokenize, GatewayError,
    GenerateRequest, GenerateResponse, LanguageModel, ModelInfo, ScoreRequest, ScoreResponse, END_OF_TEXT,
    PROTOCOL_VERSION,
};

/// Row entry giving the probability of each token the row does not list.
pub const OTHER_TOKEN: &str = "<other>";

const SUM_TOLERANCE: f64 = 1e-9;

/// Next-token distribution after any context ending in `context`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub context: String,
    pub probs: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    #[serde(default = "default_table_name")]
    pub model_name: String,
    pub rows: Vec<TableRow>,
}

fn default_table_name() -> String {
    "mock-table".into()
}

/// Conditional probability table; the row with the longest context that is
/// a word-level suffix of the actual context applies.
#[derive(Clone, Debug)]
pub struct TableLm {
    name: String,
    rows: Vec<(Vec<String>, TableRow)>,
}

impl TableLm {
    pub fn new(spec: TableSpec) -> Result<Self, GatewayError> {
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        for row in spec.rows {
            let key: Vec<String> = tokenize(&row.context).into_iter().map(String::from).collect();
            if !seen.insert(key.clone()) {
                return Err(GatewayError::BadTable(format!(
                    "duplicate row for context {:?}",
                    row.context
                )));
            }
            if row.probs.is_empty() {
                return Err(GatewayError::BadTable(format!(
                    "empty row for context {:?}",
                    row.context
                )));
            }
            if let Some((t, p)) = row
                .probs
                .iter()
                .find(|(_, p)| !(p.is_finite() && **p >= 0.0 && **p <= 1.0 + SUM_TOLERANCE))
            {
                return Err(GatewayError::BadTable(format!(
                    "probability {p} of {t:?} outside [0, 1]"
                )));
            }
            let sum: f64 = row.probs.values().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(GatewayError::BadTable(format!(
                    "row for context {:?} sums to {sum}, not 1",
                    row.context
                )));
            }
            rows.push((key, row));
        }
        rows.sort_by_key(|r| std::cmp::Reverse(r.0.len()));
        Ok(Self {
            name: spec.model_name,
            rows,
        })
    }

    fn row_for(&self, context: &[&str]) -> Result<&TableRow, GatewayError> {
        self.rows
            .iter()
            .find(|(key, _)| key.len() <= context.len() && context[context.len() - key.len()..] == key[..])
            .map(|(_, row)| row)
            .ok_or_else(|| GatewayError::Protocol(format!("no table row matches context {:?}", context.join(" "))))
    }

    fn prob(row: &TableRow, token: &str) -> Option<f64> {
        row.probs
            .get(token)
            .or_else(|| row.probs.get(OTHER_TOKEN))
            .copied()
            .filter(|p| *p > 0.0)
    }
}

impl LanguageModel for TableLm {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        Ok(ModelInfo {
            model_name: self.name.clone(),
            protocol_version: PROTOCOL_VERSION.into(),
        })
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        let tokens = check_score_request(req)?;
        let mut context = tokenize(&req.prompt);
        let mut out = Vec::with_capacity(tokens.len());
        for t in tokens {
            let row = self.row_for(&context)?;
            let p = Self::prob(row, t).ok_or_else(|| {
                GatewayError::Protocol(format!("token {t:?} has zero probability in row {:?}", row.context))
            })?;
            out.push(p.ln());
            context.push(t);
        }
        Ok(score_response(out))
    }

    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        check_generate_request(req)?;
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        let mut context: Vec<String> = tokenize(&req.prompt).into_iter().map(String::from).collect();
        let start = context.len();
        for _ in 0..req.max_tokens {
            let refs: Vec<&str> = context.iter().map(String::as_str).collect();
            let row = self.row_for(&refs)?;
            let (tokens, probs): (Vec<&String>, Vec<f64>) = row
                .probs
                .iter()
                .filter(|(t, _)| t.as_str() != OTHER_TOKEN)
                .map(|(t, p)| (t, *p))
                .unzip();
            let Some(i) = nucleus_sample(&probs, req.top_p, &mut rng) else {
                break;
            };
            if tokens[i] == END_OF_TEXT {
                break;
            }
            context.push(tokens[i].clone());
        }
        Ok(GenerateResponse {
            text: context[start..].join(" "),
        })
    }
}
