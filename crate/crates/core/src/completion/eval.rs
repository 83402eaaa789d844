use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{match_completion, Task, TaskItem, TestSet};
use crate::gateway::{GenerateRequest, LanguageModel, DEFAULT_MAX_TOKENS, DEFAULT_TOP_P};
use crate::logic::Group;
use crate::pipeline::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompletionParams {
    pub top_p: f64,
    pub max_tokens: usize,
    pub master_seed: u64,
}

impl Default for CompletionParams {
    fn default() -> Self {
        Self {
            top_p: DEFAULT_TOP_P,
            max_tokens: DEFAULT_MAX_TOKENS,
            master_seed: 2020,
        }
    }
}

/// One generation and its verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub id: String,
    pub source_id: String,
    pub task: Task,
    pub scheme_id: String,
    pub group: Group,
    pub test_set: TestSet,
    pub gold: String,
    pub seed: u64,
    pub generated: Option<String>,
    pub correct: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub correct: usize,
    pub total: usize,
    pub percent: f64,
}

impl Accuracy {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
        self.percent = 100.0 * self.correct as f64 / self.total as f64;
    }
}

/// Accuracy per task.
pub type TaskScores = BTreeMap<Task, Accuracy>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub params: CompletionParams,
    pub total: usize,
    pub completed: usize,
    pub failed: usize,
    pub incomplete: bool,
    pub overall: TaskScores,
    pub per_test_set: BTreeMap<TestSet, TaskScores>,
    pub per_group: BTreeMap<Group, TaskScores>,
    pub per_scheme: BTreeMap<String, TaskScores>,
    pub records: Vec<CompletionRecord>,
}

impl EvalReport {
    /// Aggregates per-item records; records are kept sorted by id.
    pub fn from_records(model_name: String, params: CompletionParams, mut records: Vec<CompletionRecord>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut overall = TaskScores::new();
        let mut per_test_set: BTreeMap<TestSet, TaskScores> = BTreeMap::new();
        let mut per_group: BTreeMap<Group, TaskScores> = BTreeMap::new();
        let mut per_scheme: BTreeMap<String, TaskScores> = BTreeMap::new();
        let mut failed = 0;
        for r in &records {
            let Some(ok) = r.correct else {
                failed += 1;
                continue;
            };
            overall.entry(r.task).or_default().add(ok);
            per_test_set
                .entry(r.test_set)
                .or_default()
                .entry(r.task)
                .or_default()
                .add(ok);
            per_group.entry(r.group).or_default().entry(r.task).or_default().add(ok);
            per_scheme
                .entry(r.scheme_id.clone())
                .or_default()
                .entry(r.task)
                .or_default()
                .add(ok);
        }
        Self {
            model_name,
            params,
            total: records.len(),
            completed: records.len() - failed,
            failed,
            incomplete: failed > 0,
            overall,
            per_test_set,
            per_group,
            per_scheme,
            records,
        }
    }

    pub fn percent(&self, task: Task) -> Option<f64> {
        self.overall.get(&task).map(|a| a.percent)
    }
}

/// Seed of a task's generation; the extended and inverted tasks of an item
/// share their prompt and hence their generation.
pub fn task_seed(master_seed: u64, t: &TaskItem) -> u64 {
    let prompt_kind = match t.task {
        Task::Split => "split",
        Task::Extended | Task::Inverted => "extended",
    };
    derive_seed(&[&master_seed.to_string(), &t.source_id, prompt_kind])
}

fn evaluate_one(lm: &dyn LanguageModel, params: &CompletionParams, t: &TaskItem) -> CompletionRecord {
    let seed = task_seed(params.master_seed, t);
    let req = GenerateRequest {
        prompt: t.prompt.clone(),
        max_tokens: params.max_tokens,
        top_p: params.top_p,
        seed,
    };
    let (generated, correct, error) = match lm.generate(&req) {
        Ok(r) => {
            let ok = match_completion(&r.text, &t.gold);
            (Some(r.text), Some(ok), None)
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    CompletionRecord {
        id: t.id.clone(),
        source_id: t.source_id.clone(),
        task: t.task,
        scheme_id: t.scheme_id.clone(),
        group: t.group,
        test_set: t.test_set,
        gold: t.gold.clone(),
        seed,
        generated,
        correct,
        error,
    }
}

/// One generation per task, dispatched on `workers` threads (0: all cores).
/// Endpoint failures are recorded per item and flag the report incomplete.
pub fn run_completion_eval(
    lm: &dyn LanguageModel,
    tasks: &[TaskItem],
    params: CompletionParams,
    workers: usize,
) -> EvalReport {
    let model_name = lm.info().map(|i| i.model_name).unwrap_or_else(|_| "unknown".into());
    let run = || -> Vec<CompletionRecord> { tasks.par_iter().map(|t| evaluate_one(lm, &params, t)).collect() };
    let records = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    EvalReport::from_records(model_name, params, records)
}

fn cell(scores: Option<&TaskScores>, task: Task) -> String {
    match scores.and_then(|s| s.get(&task)) {
        Some(a) => format!("{:>9.1}", a.percent),
        None => format!("{:>9}", "-"),
    }
}

/// Plain-text accuracy table: rows are test sets, columns are tasks.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", report.model_name);
    let _ = writeln!(
        out,
        "{:<20}{:>9}{:>9}{:>9}{:>8}",
        "test set", "split", "extended", "inverted", "n"
    );
    let mut row = |name: &str, scores: Option<&TaskScores>| {
        let n = scores.and_then(|s| s.get(&Task::Split)).map_or(0, |a| a.total);
        let _ = writeln!(
            out,
            "{:<20}{}{}{}{:>8}",
            name,
            cell(scores, Task::Split),
            cell(scores, Task::Extended),
            cell(scores, Task::Inverted),
            n
        );
    };
    for ts in TestSet::ALL {
        if let Some(s) = report.per_test_set.get(&ts) {
            row(ts.as_str(), Some(s));
        }
    }
    row("all", Some(&report.overall));
    let _ = writeln!(out, "{:<20}{:>9}{:>9}{:>9}", "group", "split", "extended", "inverted");
    for (g, s) in &report.per_group {
        let _ = writeln!(
            out,
            "{:<20}{}{}{}",
            g.as_str(),
            cell(Some(s), Task::Split),
            cell(Some(s), Task::Extended),
            cell(Some(s), Task::Inverted)
        );
    }
    let _ = writeln!(
        out,
        "items: {} total, {} completed, {} failed{}",
        report.total,
        report.completed,
        report.failed,
        if report.incomplete { " (INCOMPLETE RUN)" } else { "" }
    );
    out
}
