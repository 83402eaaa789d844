use std::collections::BTreeMap;
use std::path::Path;

use aac::catalog::{default_catalog, load_catalog, CatalogError, TrainSet};
use aac::completion::{extract_all, TestSet};
use aac::pipeline::{
    generate_corpus, load_snippets, mix_filler, read_jsonl_file, sample_training_set, sha256_hex, training_text,
    write_jsonl_file, ArgumentItem, CorpusSplit, GenerationConfig, PipelineError, Resources,
};
use serde_json::json;

use crate::io::{log_run, read_json, write_json, write_jsonl};
use crate::{
    fail, ExtractArgs, Failure, GenArgs, MixArgs, OrExit, Outcome, SampleArgs, StatsArgs, ValidateArgs, CONFIG, USAGE,
    VALIDATION,
};

fn catalog_code(e: &CatalogError) -> u8 {
    match e {
        CatalogError::Io(_) | CatalogError::Json(_) => CONFIG,
        _ => VALIDATION,
    }
}

pub fn validate_schemes(a: ValidateArgs) -> Outcome {
    let (catalog, source) = match &a.config {
        Some(p) => {
            let catalog = load_catalog(p).map_err(|e| Failure {
                code: catalog_code(&e),
                error: anyhow::Error::new(e).context(p.display().to_string()),
            })?;
            (catalog, std::fs::read_to_string(p).unwrap_or_default())
        }
        None => (default_catalog(), aac::catalog::DEFAULT_CATALOG.to_string()),
    };
    log_run("validate-schemes", &source, None);
    for s in catalog.all() {
        let valid = s.is_valid().or_exit(VALIDATION)?;
        if !valid {
            return Err(fail(VALIDATION, format!("scheme {} is not deductively valid", s.id)));
        }
    }
    println!(
        "{} core / {} base / {} total, all valid",
        catalog.core().len(),
        catalog.base().len(),
        catalog.all().len()
    );
    Ok(())
}

fn generation_config(path: Option<&Path>) -> Result<GenerationConfig, Failure> {
    match path {
        Some(p) => read_json(p),
        None => Ok(GenerationConfig::default()),
    }
}

fn resources(cfg: &GenerationConfig) -> Result<Resources, Failure> {
    Resources::load(cfg).or_exit_with(CONFIG, || "loading catalog, templates, domains and frames".into())
}

pub fn split_file_name(split: CorpusSplit) -> String {
    format!("{}.jsonl", split.as_str().to_ascii_lowercase())
}

pub fn gen_corpus(a: GenArgs) -> Outcome {
    let mut cfg = generation_config(a.config.as_deref())?;
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    for (flag, slot) in [
        (a.train, &mut cfg.counts.train),
        (a.dev, &mut cfg.counts.dev),
        (a.test_out_of_sample, &mut cfg.counts.test_out_of_sample),
        (a.test_out_of_domain, &mut cfg.counts.test_out_of_domain),
    ] {
        if let Some(n) = flag {
            *slot = n;
        }
    }
    log_run("gen-corpus", &cfg, Some(cfg.master_seed));
    let res = resources(&cfg)?;
    let corpus = generate_corpus(&cfg, &res, a.workers).or_exit(VALIDATION)?;
    std::fs::create_dir_all(&a.out).or_exit_with(CONFIG, || format!("creating {}", a.out.display()))?;
    let mut files = BTreeMap::new();
    for split in CorpusSplit::ALL {
        let name = split_file_name(split);
        let path = a.out.join(&name);
        write_jsonl_file(&path, &corpus.items(split)).or_exit_with(CONFIG, || format!("writing {}", path.display()))?;
        let bytes = std::fs::read(&path).or_exit(CONFIG)?;
        println!("{split}: {} items -> {}", corpus.split(split).len(), path.display());
        files.insert(
            name,
            json!({"items": corpus.split(split).len(), "sha256": sha256_hex(&bytes)}),
        );
    }
    let config_json = serde_json::to_string(&cfg).expect("config serializes");
    write_json(
        &a.out.join("manifest.json"),
        &json!({
            "config": cfg,
            "config_sha256": sha256_hex(config_json.as_bytes()),
            "files": files,
        }),
    )
}

fn read_items(path: &Path) -> Result<Vec<ArgumentItem>, Failure> {
    read_jsonl_file(path).map_err(|e| {
        let code = match e {
            PipelineError::Malformed { .. } => VALIDATION,
            _ => CONFIG,
        };
        Failure {
            code,
            error: anyhow::Error::new(e).context(path.display().to_string()),
        }
    })
}

pub fn sample_train(a: SampleArgs) -> Outcome {
    let mut cfg = generation_config(a.config.as_deref())?;
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    if let Some(sizes) = a.sizes {
        cfg.train_sizes = sizes;
    }
    let sets = match &a.sets {
        Some(names) => names
            .iter()
            .map(|s| s.parse::<TrainSet>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail(USAGE, e))?,
        None => TrainSet::ALL.to_vec(),
    };
    log_run("sample-train", &cfg, Some(cfg.master_seed));
    let catalog = resources(&cfg)?.catalog;
    let train = read_items(&a.train)?;
    if let Some(bad) = train.iter().find(|i| i.split != CorpusSplit::Train) {
        return Err(fail(
            VALIDATION,
            format!("item {} in {} is not a TRAIN item", bad.id, a.train.display()),
        ));
    }
    std::fs::create_dir_all(&a.out).or_exit_with(CONFIG, || format!("creating {}", a.out.display()))?;
    for set in sets {
        for &size in &cfg.train_sizes {
            let sample = sample_training_set(&train, &catalog, set, size, cfg.master_seed).or_exit(VALIDATION)?;
            let path = a.out.join(format!("{set}_{size}.jsonl"));
            write_jsonl(&path, &sample.items)?;
            let mut per_scheme: BTreeMap<&str, usize> = BTreeMap::new();
            for item in &sample.items {
                *per_scheme.entry(item.scheme_id.as_str()).or_default() += 1;
            }
            let (lo, hi) = (
                per_scheme.values().min().copied().unwrap_or(0),
                per_scheme.values().max().copied().unwrap_or(0),
            );
            println!(
                "{set} {size}: {} items over {} schemes ({lo}..{hi} each) -> {}",
                sample.items.len(),
                per_scheme.len(),
                path.display()
            );
        }
    }
    Ok(())
}

pub fn mix(a: MixArgs) -> Outcome {
    log_run(
        "mix-filler",
        &json!({"train": a.train, "filler": a.filler, "ratio": a.ratio}),
        Some(a.master_seed),
    );
    let items = read_items(&a.train)?;
    let texts: Vec<String> = items.into_iter().map(|i| i.text).collect();
    let filler = load_snippets(&a.filler).or_exit_with(CONFIG, || "reading filler files".into())?;
    let mixed = mix_filler(&texts, &filler, a.ratio, a.master_seed).map_err(|e| {
        let code = match e {
            PipelineError::BadRatio(_) => USAGE,
            _ => VALIDATION,
        };
        Failure { code, error: e.into() }
    })?;
    std::fs::write(&a.out, training_text(&mixed)).or_exit_with(CONFIG, || format!("writing {}", a.out.display()))?;
    println!(
        "{} arguments + {} filler = {} paragraphs -> {}",
        texts.len(),
        mixed.len() - texts.len(),
        mixed.len(),
        a.out.display()
    );
    Ok(())
}

pub fn extract(a: ExtractArgs) -> Outcome {
    let test_set = match &a.test_set {
        Some(s) => Some(s.parse::<TestSet>().map_err(|e| fail(USAGE, e))?),
        None => None,
    };
    log_run(
        "extract-tasks",
        &json!({"corpus": a.corpus, "test_set": a.test_set}),
        None,
    );
    let mut items = Vec::new();
    for p in &a.corpus {
        items.extend(read_items(p)?);
    }
    let tasks = extract_all(&items, test_set).or_exit(VALIDATION)?;
    write_jsonl(&a.out, &tasks)?;
    println!("{} items -> {} tasks -> {}", items.len(), tasks.len(), a.out.display());
    Ok(())
}

fn print_counts(title: &str, counts: &BTreeMap<String, usize>) {
    println!("{title}:");
    for (k, n) in counts {
        println!("  {k:<28}{n:>8}");
    }
}

pub fn stats(a: StatsArgs) -> Outcome {
    log_run("stats", &json!({"corpus": a.corpus}), None);
    let mut items = Vec::new();
    for p in &a.corpus {
        items.extend(read_items(p)?);
    }
    let mut by_split = BTreeMap::new();
    let mut by_group = BTreeMap::new();
    let mut by_scheme = BTreeMap::new();
    let mut by_domain = BTreeMap::new();
    let mut words = 0usize;
    for i in &items {
        *by_split.entry(i.split.to_string()).or_default() += 1;
        *by_group.entry(i.group.to_string()).or_default() += 1;
        *by_scheme.entry(i.scheme_id.clone()).or_default() += 1;
        *by_domain.entry(i.domain.clone()).or_default() += 1;
        words += i.text.split_whitespace().count();
    }
    println!("items: {}", items.len());
    if !items.is_empty() {
        println!("mean words per text: {:.1}", words as f64 / items.len() as f64);
    }
    print_counts("per split", &by_split);
    print_counts("per group", &by_group);
    print_counts("per domain", &by_domain);
    print_counts("per scheme", &by_scheme);
    Ok(())
}
