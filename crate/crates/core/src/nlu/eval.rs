use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, Adapter, AdapterError, BenchmarkKind, RawRecord};
use crate::gateway::LanguageModel;

/// Prediction for one benchmark item.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NluRecord {
    pub id: String,
    pub gold: usize,
    pub predicted: Option<usize>,
    pub rel_pp: Option<Vec<Vec<f64>>>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NluReport {
    pub kind: BenchmarkKind,
    pub model_name: String,
    pub adapter_hash: String,
    pub category_names: Vec<String>,
    pub items: usize,
    pub evaluated: usize,
    /// Items whose scoring failed at the endpoint.
    pub skipped: usize,
    /// Rows left out for carrying a skip label.
    pub unlabeled: usize,
    pub incomplete: bool,
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[gold - 1][predicted - 1]`.
    pub confusion: Vec<Vec<usize>>,
    pub records: Vec<NluRecord>,
}

impl NluReport {
    pub fn from_records(adapter: &Adapter, model_name: String, unlabeled: usize, records: Vec<NluRecord>) -> Self {
        let n = adapter.classes();
        let mut confusion = vec![vec![0; n]; n];
        let mut evaluated = 0;
        let mut correct = 0;
        for r in &records {
            if let Some(p) = r.predicted {
                evaluated += 1;
                correct += usize::from(p == r.gold);
                confusion[r.gold - 1][p - 1] += 1;
            }
        }
        let skipped = records.len() - evaluated;
        Self {
            kind: adapter.kind,
            model_name,
            adapter_hash: adapter.hash.clone(),
            category_names: adapter.category_names.clone(),
            items: records.len(),
            evaluated,
            skipped,
            unlabeled,
            incomplete: skipped > 0,
            correct,
            accuracy: if evaluated == 0 {
                0.0
            } else {
                100.0 * correct as f64 / evaluated as f64
            },
            confusion,
            records,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{} with {}: accuracy {:.1}% ({} / {}), {} skipped{}\n",
            self.kind,
            self.model_name,
            self.accuracy,
            self.correct,
            self.evaluated,
            self.skipped,
            if self.incomplete { " (INCOMPLETE RUN)" } else { "" }
        );
        out.push_str(&format!("{:<16}", "gold \\ pred"));
        for name in &self.category_names {
            out.push_str(&format!("{name:>14}"));
        }
        out.push('\n');
        for (name, row) in self.category_names.iter().zip(&self.confusion) {
            out.push_str(&format!("{name:<16}"));
            for c in row {
                out.push_str(&format!("{c:>14}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Classifies every labeled row; endpoint failures skip the item and flag
/// the report incomplete. Adapter errors abort the run.
pub fn run_nlu_eval(
    lm: &dyn LanguageModel,
    adapter: &Adapter,
    rows: &[RawRecord],
    workers: usize,
) -> Result<NluReport, AdapterError> {
    let mut adapted = Vec::with_capacity(rows.len());
    let mut unlabeled = 0;
    for (i, raw) in rows.iter().enumerate() {
        match adapter.adapt(raw, i)? {
            Some(x) => adapted.push(x),
            None => unlabeled += 1,
        }
    }
    let model_name = lm.info().map(|i| i.model_name).unwrap_or_else(|_| "unknown".into());
    let run = || -> Vec<NluRecord> {
        adapted
            .par_iter()
            .map(|(item, template)| match classify(lm, template) {
                Ok(c) => NluRecord {
                    id: item.id.clone(),
                    gold: item.gold,
                    predicted: Some(c.category),
                    rel_pp: Some(c.rel_pp),
                    error: None,
                },
                Err(e) => NluRecord {
                    id: item.id.clone(),
                    gold: item.gold,
                    predicted: None,
                    rel_pp: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    };
    let records = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    Ok(NluReport::from_records(adapter, model_name, unlabeled, records))
}
