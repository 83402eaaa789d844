use aac::completion::{render_table, run_completion_eval, run_hermes_probe, CompletionParams, TaskItem};
use aac::gateway::{Endpoint, LanguageModel, MAX_TOKEN_BUDGET};
use aac::nlu::{load_dataset, run_nlu_eval, Adapter, AdapterError, BenchmarkKind};
use aac::pipeline::sha256_hex;
use aac::verbalizer::Verbalizer;
use serde_json::json;

use crate::io::{log_run, read_jsonl, write_json};
use crate::{
    fail, EndpointArg, EvalCompletionArgs, EvalNluArgs, Failure, HermesArgs, OrExit, Outcome, CONFIG, ENDPOINT, USAGE,
    VALIDATION,
};

fn connect(arg: &EndpointArg) -> Result<Box<dyn LanguageModel>, Failure> {
    let endpoint: Endpoint = arg.endpoint.parse().or_exit(USAGE)?;
    endpoint
        .connect()
        .or_exit_with(ENDPOINT, || format!("connecting to {}", arg.endpoint))
}

fn check_sampling(top_p: f64, max_tokens: usize) -> Outcome {
    if !(top_p > 0.0 && top_p <= 1.0) {
        return Err(fail(USAGE, format!("--top-p {top_p} is outside (0, 1]")));
    }
    if max_tokens == 0 || max_tokens > MAX_TOKEN_BUDGET {
        return Err(fail(
            USAGE,
            format!("--max-tokens {max_tokens} is outside 1..={MAX_TOKEN_BUDGET}"),
        ));
    }
    Ok(())
}

pub fn eval_completion(a: EvalCompletionArgs) -> Outcome {
    check_sampling(a.top_p, a.max_tokens)?;
    let params = CompletionParams {
        top_p: a.top_p,
        max_tokens: a.max_tokens,
        master_seed: a.master_seed,
    };
    let tasks_bytes = std::fs::read(&a.tasks).or_exit_with(CONFIG, || format!("reading {}", a.tasks.display()))?;
    log_run(
        "eval-completion",
        &json!({"endpoint": a.endpoint.endpoint, "params": params, "tasks_sha256": sha256_hex(&tasks_bytes)}),
        Some(a.master_seed),
    );
    let tasks: Vec<TaskItem> = read_jsonl(&a.tasks, VALIDATION)?;
    let lm = connect(&a.endpoint)?;
    let report = run_completion_eval(lm.as_ref(), &tasks, params, a.workers);
    print!("{}", render_table(&report));
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    if report.incomplete {
        return Err(fail(
            ENDPOINT,
            format!("{} of {} tasks failed at the endpoint", report.failed, report.total),
        ));
    }
    Ok(())
}

fn adapter_code(e: &AdapterError) -> u8 {
    match e {
        AdapterError::Config(_) | AdapterError::Json(_) | AdapterError::Io(_) => CONFIG,
        _ => VALIDATION,
    }
}

fn adapter_failure(e: AdapterError, context: String) -> Failure {
    Failure {
        code: adapter_code(&e),
        error: anyhow::Error::new(e).context(context),
    }
}

pub fn eval_nlu(a: EvalNluArgs) -> Outcome {
    let kind: BenchmarkKind = a.benchmark.parse().or_exit(USAGE)?;
    let adapter = match &a.adapter {
        Some(p) => Adapter::from_file(p).map_err(|e| adapter_failure(e, p.display().to_string()))?,
        None => Adapter::shipped(kind),
    };
    if adapter.kind != kind {
        return Err(fail(CONFIG, format!("adapter is for {}, not {kind}", adapter.kind)));
    }
    log_run(
        "eval-nlu",
        &json!({"endpoint": a.endpoint.endpoint, "benchmark": kind, "adapter_sha256": adapter.hash, "data": a.data, "limit": a.limit}),
        None,
    );
    let mut rows =
        load_dataset(adapter.format, &a.data).map_err(|e| adapter_failure(e, a.data.display().to_string()))?;
    if let Some(n) = a.limit {
        rows.truncate(n);
    }
    let lm = connect(&a.endpoint)?;
    let report = run_nlu_eval(lm.as_ref(), &adapter, &rows, a.workers)
        .map_err(|e| adapter_failure(e, a.data.display().to_string()))?;
    print!("{}", report.render());
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    if report.incomplete {
        return Err(fail(
            ENDPOINT,
            format!("{} of {} items failed at the endpoint", report.skipped, report.items),
        ));
    }
    Ok(())
}

pub fn hermes(a: HermesArgs) -> Outcome {
    check_sampling(a.top_p, 1)?;
    log_run(
        "hermes",
        &json!({"endpoint": a.endpoint.endpoint, "prompt": a.prompt, "samples": a.samples, "top_p": a.top_p}),
        Some(a.master_seed),
    );
    let lm = connect(&a.endpoint)?;
    let templates = Verbalizer::shipped().templates;
    let report =
        run_hermes_probe(lm.as_ref(), &templates, &a.prompt, a.samples, a.master_seed, a.top_p).or_exit(ENDPOINT)?;
    print!("{}", report.render(a.top));
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    if report.failed > 0 {
        return Err(fail(
            ENDPOINT,
            format!("{} of {} samples failed at the endpoint", report.failed, a.samples),
        ));
    }
    Ok(())
}
