use std::collections::{BTreeMap, HashSet};

use aac::catalog::{default_catalog, TrainSet};
use aac::logic::entails;
use aac::pipeline::{
    allocation, generate_corpus, generate_item, item_seed, mix_filler, read_jsonl, sample_training_set,
    snippets_from_text, training_text, write_jsonl, ArgumentItem, CorpusSplit, GenerationConfig, PipelineError,
    Resources, SplitCounts,
};
use aac::verbalizer::reader::read_sentence;
use aac::verbalizer::{char_slice, Split};

fn small_config() -> GenerationConfig {
    GenerationConfig {
        counts: SplitCounts {
            train: 71 * 12,
            dev: 150,
            test_out_of_sample: 150,
            test_out_of_domain: 300,
        },
        master_seed: 11,
        ..GenerationConfig::default()
    }
}

fn jsonl(items: &[ArgumentItem]) -> Vec<u8> {
    let mut out = Vec::new();
    write_jsonl(&mut out, items).unwrap();
    out
}

#[test]
fn corpus_is_sound_disjoint_and_well_spanned() {
    let res = Resources::shipped();
    let cfg = small_config();
    let corpus = generate_corpus(&cfg, &res, 0).unwrap();
    let mut texts = HashSet::new();
    for split in CorpusSplit::ALL {
        let items = corpus.split(split);
        assert_eq!(items.len(), cfg.counts.get(split));
        for g in items {
            let it = &g.item;
            assert_eq!(it.split, split);
            assert!(texts.insert(it.text.clone()), "text repeated across splits: {}", it.id);
            let arg = &g.audit.argument;
            let bound = 1 << arg.predicates().len();
            assert!(entails(&arg.premises, &arg.conclusion, bound).unwrap(), "{}", it.id);

            // the text itself, read back, carries the same argument
            for (pos, p) in it.premises.iter().enumerate() {
                let read = read_sentence(p, &res.verbalizer.templates).unwrap();
                assert_eq!(read.formula, arg.premises[g.audit.premise_order[pos]], "{}: {p}", it.id);
            }
            let read = read_sentence(&it.conclusion, &res.verbalizer.templates).unwrap();
            assert_eq!(read.formula, arg.conclusion, "{}", it.id);

            let e = char_slice(&it.text, it.span_e);
            let s = char_slice(&it.text, it.span_s);
            assert_eq!(it.span_s[1], it.text.chars().count());
            assert_eq!(it.span_e[1] + 1, it.span_s[0]);
            assert!(it.conclusion.ends_with(&format!("{e} {s}")), "{}", it.id);
            assert!(e == "a" || e == "an" || e == "not a" || e == "not an", "{e}");

            let scheme = res.catalog.get(&it.scheme_id).unwrap();
            assert_eq!(scheme.group, it.group);
            let domain = res.verbalizer.domains.get(&it.domain).unwrap();
            assert_eq!(domain.split, split.pool(), "{}", it.id);
            for t in &g.audit.templates {
                assert_eq!(
                    res.verbalizer.templates.get(t).unwrap().split,
                    split.pool(),
                    "{}",
                    it.id
                );
            }
        }
    }
}

#[test]
fn output_is_independent_of_worker_count() {
    let res = Resources::shipped();
    let mut cfg = small_config();
    cfg.counts.train = 400;
    let one = generate_corpus(&cfg, &res, 1).unwrap();
    let four = generate_corpus(&cfg, &res, 4).unwrap();
    for split in CorpusSplit::ALL {
        assert_eq!(jsonl(&one.items(split)), jsonl(&four.items(split)), "{split}");
    }
    let again = generate_corpus(&cfg, &res, 3).unwrap();
    assert_eq!(
        jsonl(&again.items(CorpusSplit::Train)),
        jsonl(&one.items(CorpusSplit::Train))
    );
}

#[test]
fn schemes_are_allocated_round_robin() {
    let res = Resources::shipped();
    let cfg = small_config();
    let corpus = generate_corpus(&cfg, &res, 0).unwrap();
    let mut per_scheme: BTreeMap<&str, usize> = BTreeMap::new();
    for g in &corpus.train {
        *per_scheme.entry(g.item.scheme_id.as_str()).or_default() += 1;
    }
    assert_eq!(per_scheme.len(), 71);
    assert!(per_scheme.values().all(|&n| n == 12));
}

/// Chi-squared statistic of premise orders for one three-premise scheme.
#[test]
fn premise_order_is_uniform() {
    let res = Resources::shipped();
    let ds = res.catalog.all().iter().position(|s| s.id == "ds").unwrap();
    let n = 3000;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for k in 0..n {
        let index = k * 71 + ds;
        let g = generate_item(
            &res,
            CorpusSplit::Train,
            index,
            item_seed(5, CorpusSplit::Train, index, 0),
        )
        .unwrap();
        *counts.entry(g.audit.premise_order).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let expected = n as f64 / 6.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // df = 5, alpha = 0.001
    assert!(chi2 < 20.515, "chi2 = {chi2}");
}

#[test]
fn out_of_domain_uses_reserved_inventories() {
    let res = Resources::shipped();
    let mut cfg = small_config();
    cfg.counts = SplitCounts {
        train: 0,
        dev: 0,
        test_out_of_sample: 0,
        test_out_of_domain: 400,
    };
    let corpus = generate_corpus(&cfg, &res, 0).unwrap();
    let domains: HashSet<&str> = corpus
        .test_out_of_domain
        .iter()
        .map(|g| g.item.domain.as_str())
        .collect();
    assert_eq!(domains, HashSet::from(["Dinosaurs", "Philosophers"]));
    assert!(corpus
        .test_out_of_domain
        .iter()
        .flat_map(|g| &g.audit.templates)
        .all(|t| res.verbalizer.templates.get(t).unwrap().split == Split::TestOnly));
}

fn fake_train(per_scheme: usize) -> Vec<ArgumentItem> {
    let res = Resources::shipped();
    let proto = generate_item(&res, CorpusSplit::Train, 0, 1).unwrap().item;
    let mut out = Vec::new();
    for s in res.catalog.all() {
        for i in 0..per_scheme {
            let mut it = proto.clone();
            it.id = format!("{}-{i}", s.id);
            it.scheme_id = s.id.clone();
            it.group = s.group;
            out.push(it);
        }
    }
    out
}

#[test]
fn allocation_arithmetic() {
    let catalog = default_catalog();
    let all: Vec<&str> = catalog.all().iter().map(|s| s.id.as_str()).collect();
    let alloc = allocation(36_000, &all);
    assert_eq!(alloc.iter().filter(|(_, n)| *n == 508).count(), 3);
    assert_eq!(alloc.iter().filter(|(_, n)| *n == 507).count(), 68);
    assert_eq!(
        allocation(4_500, &["gmp", "gcp", "hs1"])
            .iter()
            .map(|(_, n)| *n)
            .collect::<Vec<_>>(),
        [1500; 3]
    );
}

#[test]
fn sampled_sets_have_exact_sizes() {
    let catalog = default_catalog();
    let train = fake_train(1_600);
    let t1 = sample_training_set(&train, &catalog, TrainSet::Train01, 4_500, 3).unwrap();
    assert_eq!(t1.items.len(), 4_500);
    let mut per: BTreeMap<&str, usize> = BTreeMap::new();
    for it in &t1.items {
        *per.entry(it.scheme_id.as_str()).or_default() += 1;
    }
    assert_eq!(per, BTreeMap::from([("gcp", 1500), ("gmp", 1500), ("hs1", 1500)]));
    let t3 = sample_training_set(&train, &catalog, TrainSet::Train03, 36_000, 3).unwrap();
    assert_eq!(t3.items.len(), 36_000);
    let ids: HashSet<&str> = t3.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids.len(), 36_000);
    let again = sample_training_set(&train, &catalog, TrainSet::Train03, 36_000, 3).unwrap();
    assert_eq!(again, t3);
}

#[test]
fn sampling_more_than_available_fails() {
    let catalog = default_catalog();
    let train = fake_train(141);
    assert_eq!(train.len(), 10_011);
    let err = sample_training_set(&train, &catalog, TrainSet::Train03, 36_000, 3).unwrap_err();
    assert!(matches!(
        err,
        PipelineError::InsufficientItems {
            need: 508,
            have: 141,
            ..
        }
    ));
}

#[test]
fn filler_mixing() {
    let args: Vec<String> = (0..36_000).map(|i| format!("argument {i}")).collect();
    let filler: Vec<String> = (0..40_000).map(|i| format!("snippet {i}")).collect();
    let mixed = mix_filler(&args, &filler, 1.0, 9).unwrap();
    assert_eq!(mixed.len(), 72_000);
    assert_eq!(mixed.iter().filter(|m| m.starts_with("argument")).count(), 36_000);
    assert_eq!(mix_filler(&args, &filler, 0.0, 9).unwrap(), args);
    assert!(matches!(
        mix_filler(&args, &[], 1.0, 9),
        Err(PipelineError::InsufficientFiller { need: 36_000, have: 0 })
    ));
    assert_eq!(mixed, mix_filler(&args, &filler, 1.0, 9).unwrap());
}

#[test]
fn snippets_and_training_text() {
    let s = snippets_from_text("First line\nsame paragraph.\n\n\nSecond one.\n  \nThird.");
    assert_eq!(s, ["First line same paragraph.", "Second one.", "Third."]);
    assert_eq!(training_text(&s[..2]), "First line same paragraph.\n\nSecond one.\n");
}

#[test]
fn jsonl_round_trip_and_errors() {
    let res = Resources::shipped();
    let mut cfg = small_config();
    cfg.counts = SplitCounts {
        train: 1_000,
        dev: 0,
        test_out_of_sample: 0,
        test_out_of_domain: 0,
    };
    let items = generate_corpus(&cfg, &res, 0).unwrap().items(CorpusSplit::Train);
    let bytes = jsonl(&items);
    assert_eq!(read_jsonl(bytes.as_slice()).unwrap(), items);

    let first = String::from_utf8(bytes.clone()).unwrap();
    let keys: Vec<String> =
        serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(first.lines().next().unwrap())
            .unwrap()
            .keys()
            .cloned()
            .collect();
    let mut expected = vec![
        "id",
        "scheme_id",
        "group",
        "domain",
        "split",
        "text",
        "premises",
        "conclusion",
        "span_E",
        "span_S",
        "rng_seed_used",
    ];
    expected.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, expected);

    let mut lines: Vec<&str> = first.lines().take(3).collect();
    let cut = &lines[1][..lines[1].len() / 2];
    lines[1] = cut;
    let broken = lines.join("\n");
    match read_jsonl(broken.as_bytes()) {
        Err(PipelineError::Malformed { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

/// Hand-rewritten premises for a sample of held-out items, stored and read
/// back as an evaluation split.
#[test]
fn paraphrased_items_load() {
    let res = Resources::shipped();
    let mut cfg = small_config();
    cfg.counts = SplitCounts {
        train: 0,
        dev: 0,
        test_out_of_sample: 100,
        test_out_of_domain: 0,
    };
    let items = generate_corpus(&cfg, &res, 0)
        .unwrap()
        .items(CorpusSplit::TestOutOfSample);
    let rewrite = |s: &str| {
        s.replacen("Every ", "Each ", 1)
            .replacen("Whoever is ", "Anyone who is ", 1)
            .replacen("We know that ", "It is known that ", 1)
    };
    let paraphrased: Vec<ArgumentItem> = items
        .iter()
        .map(|it| {
            let premises: Vec<String> = it.premises.iter().map(|p| rewrite(p)).collect();
            let mut text = it.text.clone();
            for (old, new) in it.premises.iter().zip(&premises) {
                text = text.replacen(old.as_str(), new, 1);
            }
            let shift = text.chars().count() as isize - it.text.chars().count() as isize;
            let mv = |s: [usize; 2]| [(s[0] as isize + shift) as usize, (s[1] as isize + shift) as usize];
            ArgumentItem {
                id: format!("para-{}", it.id),
                text,
                premises,
                span_e: mv(it.span_e),
                span_s: mv(it.span_s),
                ..it.clone()
            }
        })
        .collect();
    let loaded = read_jsonl(jsonl(&paraphrased).as_slice()).unwrap();
    assert_eq!(loaded.len(), 100);
    for (it, orig) in loaded.iter().zip(&items) {
        assert_eq!(char_slice(&it.text, it.span_s), char_slice(&orig.text, orig.span_s));
        assert_eq!(char_slice(&it.text, it.span_e), char_slice(&orig.text, orig.span_e));
    }
}
