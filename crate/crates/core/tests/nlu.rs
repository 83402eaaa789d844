use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aac::gateway::{
    GatewayError, GenerateRequest, GenerateResponse, LanguageModel, ModelInfo, ScoreRequest, ScoreResponse, TableLm,
    TableRow, TableSpec, UniformLm, PROTOCOL_VERSION,
};
use aac::nlu::{
    argmin_label, classify, conditional_perplexity, parse_dataset, perplexity, relevance_perplexity, run_nlu_eval,
    Adapter, AdapterError, BenchmarkKind, ClassificationTemplate, DataFormat, NluError, NluReport, PerplexityScore,
};

fn table(rows: &[(&str, &[(&str, f64)])]) -> TableLm {
    TableLm::new(TableSpec {
        model_name: "t".into(),
        rows: rows
            .iter()
            .map(|(c, probs)| TableRow {
                context: c.to_string(),
                probs: probs
                    .iter()
                    .map(|(t, p)| (t.to_string(), *p))
                    .collect::<BTreeMap<_, _>>(),
            })
            .collect(),
    })
    .unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn perplexity_is_the_inverse_geometric_mean() {
    assert!(close(perplexity(&[0.25f64.ln()]).unwrap(), 4.0));
    assert!(close(perplexity(&[0.5f64.ln(), 0.125f64.ln()]).unwrap(), 4.0));
    assert_eq!(perplexity(&[]), None);
    let u = UniformLm::new(37).unwrap();
    for c in ["one", "a b c d e", "the girl is eating food."] {
        assert!(close(conditional_perplexity(&u, "ctx", c).unwrap().0, 37.0));
    }
    assert!(matches!(
        conditional_perplexity(&u, "ctx", " "),
        Err(NluError::ZeroTokens(_))
    ));
}

#[test]
fn relevance_perplexity_arithmetic() {
    let s = PerplexityScore::new(4.0, 2.0, 3);
    assert!(close(s.rel, 2.0));
    let u = UniformLm::new(100).unwrap();
    assert!(close(
        relevance_perplexity(&u, "Any prompt.", "any completion").unwrap().rel,
        1.0
    ));

    let biased = table(&[
        ("Therefore,", &[("yes", 0.9), ("<other>", 0.1)]),
        ("", &[("yes", 0.1), ("<other>", 0.9)]),
    ]);
    let r = relevance_perplexity(&biased, "The girl is eating a pizza. Therefore,", "yes").unwrap();
    assert!(close(r.conditional, 1.0 / 0.9));
    assert!(close(r.unconditional, 10.0));
    assert!(close(r.rel, (1.0 / 0.9) / (1.0 / 0.1)));
    assert!(close(r.rel, 0.111_111_111_111_111_1));

    let forced = table(&[("p", &[("x", 0.5), ("<other>", 0.5)]), ("", &[("x", 1.0)])]);
    let r = relevance_perplexity(&forced, "p", "x").unwrap();
    assert!(close(r.unconditional, 1.0));
    assert!(close(r.rel, r.conditional));
    assert!(close(r.rel, 2.0));
}

fn pizza() -> ClassificationTemplate {
    ClassificationTemplate::row_major(
        vec![
            "The girl is eating a pizza. Therefore,".into(),
            "The girl is eating a pizza. This rules out that".into(),
            "The girl is eating a pizza. This neither entails nor rules out that".into(),
        ],
        vec!["the girl is eating food.".into()],
    )
}

#[test]
fn pizza_is_entailment_under_an_entailment_biased_mock() {
    let lm = table(&[
        ("Therefore,", &[("the", 0.6), ("<other>", 0.4)]),
        ("that", &[("the", 0.2), ("<other>", 0.8)]),
        ("", &[("the", 0.1), ("<other>", 0.9)]),
    ]);
    let c = classify(&lm, &pizza()).unwrap();
    assert_eq!(c.category, 1);
    // Only the first token differs between prompts: relPP = (0.1 / q)^(1/5).
    assert!(close(c.rel_pp[0][0], (0.1f64 / 0.6).powf(0.2)));
    assert!(close(c.rel_pp[1][0], (0.1f64 / 0.2).powf(0.2)));
    assert!(close(c.rel_pp[2][0], c.rel_pp[1][0]));
}

#[test]
fn ties_go_to_the_first_pair() {
    let u = UniformLm::new(50).unwrap();
    let c = classify(&u, &pizza()).unwrap();
    assert!(c.rel_pp.iter().flatten().all(|r| close(*r, 1.0)));
    assert_eq!(c.category, 1);
    let mut t = pizza();
    t.labels = vec![vec![3], vec![1], vec![2]];
    assert_eq!(classify(&u, &t).unwrap().category, 3);
    let single = ClassificationTemplate::row_major(vec!["p".into()], vec!["c".into()]);
    assert_eq!(classify(&u, &single).unwrap().category, 1);
}

#[test]
fn label_maps_must_be_bijections() {
    let mut t = pizza();
    t.labels = vec![vec![1], vec![1], vec![2]];
    assert!(matches!(t.validate(), Err(NluError::Template(_))));
    t.labels = vec![vec![1], vec![2], vec![4]];
    assert!(t.validate().is_err());
    t.labels = vec![vec![1], vec![2]];
    assert!(t.validate().is_err());
    let empty = ClassificationTemplate::row_major(vec![], vec!["c".into()]);
    assert!(empty.validate().is_err());
    let lq = ClassificationTemplate::row_major(vec!["p".into()], (0..4).map(|i| format!("c{i}")).collect());
    assert_eq!(lq.classes(), 4);
    assert_eq!(lq.labels, vec![vec![1, 2, 3, 4]]);
    lq.validate().unwrap();
}

proptest! {
    #[test]
    fn argmin_is_invariant_under_monotone_maps(
        n in 1usize..4, m in 1usize..5,
        raw in prop::collection::vec(0.01f64..50.0, 16),
        a in 0.1f64..10.0, b in -5.0f64..5.0,
    ) {
        let scores: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| raw[i * m + j]).collect()).collect();
        let t = ClassificationTemplate::row_major(vec![String::new(); n], vec![String::new(); m]);
        let base = argmin_label(&scores, &t.labels);
        for f in [|x: f64| x.ln(), |x: f64| x * x * x, |x: f64| x.sqrt()] {
            let mapped: Vec<Vec<f64>> = scores.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect();
            prop_assert_eq!(argmin_label(&mapped, &t.labels), base);
        }
        let affine: Vec<Vec<f64>> = scores.iter().map(|r| r.iter().map(|&x| a * x + b).collect()).collect();
        prop_assert_eq!(argmin_label(&affine, &t.labels), base);
        let flat: Vec<f64> = scores.iter().flatten().copied().collect();
        let min = flat.iter().copied().fold(f64::INFINITY, f64::min);
        let first = flat.iter().position(|&x| x == min).unwrap();
        prop_assert_eq!(base, Some(first + 1));
    }
}

#[test]
fn shipped_adapters_have_the_required_shapes() {
    for kind in BenchmarkKind::ALL {
        let a = Adapter::shipped(kind);
        assert_eq!(a.kind, kind);
        assert_eq!((a.prompts.len(), a.completions.len()), kind.shape());
        assert_eq!(a.hash.len(), 64);
    }
    assert_eq!(Adapter::shipped(BenchmarkKind::Logiqa).classes(), 4);
    assert_eq!("glue_ax".parse::<BenchmarkKind>().unwrap(), BenchmarkKind::GlueAx);
    assert!("mnli".parse::<BenchmarkKind>().is_err());
}

#[test]
fn glue_pair_becomes_three_prompts() {
    let a = Adapter::shipped(BenchmarkKind::GlueAx);
    let rows = parse_dataset(
        DataFormat::Tsv,
        "Lexical Semantics\tPremise\tHypothesis\tLabel\n\tThe girl is eating a pizza.\tThe girl is eating food\tentailment\n",
    )
    .unwrap();
    let (item, t) = a.adapt(&rows[0], 0).unwrap().unwrap();
    assert_eq!(item.gold, 1);
    assert_eq!(t.prompts[0], "The girl is eating a pizza. Therefore,");
    assert_eq!(t.prompts[1], "The girl is eating a pizza. This rules out that");
    assert_eq!(
        t.prompts[2],
        "The girl is eating a pizza. This neither entails nor rules out that"
    );
    assert_eq!(t.completions, vec!["the girl is eating food."]);
    assert_eq!(t, pizza());
}

#[test]
fn arc_warrants_become_two_completions() {
    let a = Adapter::shipped(BenchmarkKind::Arc);
    let tsv = "#id\twarrant0\twarrant1\tcorrectLabelW0orW1\treason\tclaim\tdebateTitle\n\
               1-1\tScholarships would take women from the home\tScholarships would give women a chance to study\t1\t\
               Miss America gives honors and education scholarships\tMiss America is good for women\tMiss America\n";
    let rows = parse_dataset(DataFormat::Tsv, tsv).unwrap();
    let (item, t) = a.adapt(&rows[0], 0).unwrap().unwrap();
    assert_eq!(item.id, "1-1");
    assert_eq!(item.gold, 2);
    assert_eq!(
        t.prompts,
        vec!["Miss America gives honors and education scholarships. And since"]
    );
    assert_eq!(
        t.completions[1],
        "scholarships would give women a chance to study, Miss America is good for women."
    );
    assert_eq!(t.classes(), 2);
}

#[test]
fn logiqa_question_becomes_four_completions() {
    let a = Adapter::shipped(BenchmarkKind::Logiqa);
    let line = r#"{"context":"All cats purr.","query":"Which follows?","options":["A cat purrs.","B","C","D"],"correct_option":0}"#;
    let rows = parse_dataset(DataFormat::Jsonl, line).unwrap();
    let (item, t) = a.adapt(&rows[0], 3).unwrap().unwrap();
    assert_eq!(item.gold, 1);
    assert_eq!(item.id, "logiqa-000003");
    assert_eq!(t.prompts.len(), 1);
    assert_eq!(t.completions.len(), 4);
    assert_eq!(t.completions[0], "A cat purrs.");
}

#[test]
fn adapter_errors_name_the_line() {
    let a = Adapter::shipped(BenchmarkKind::Snli);
    let text = "{\"pairID\":\"x\",\"sentence1\":\"A.\",\"sentence2\":\"B\",\"gold_label\":\"-\"}\n\
                {\"pairID\":\"y\",\"sentence1\":\"A.\",\"gold_label\":\"neutral\"}\n\
                {\"pairID\":\"z\",\"sentence1\":\"A.\",\"sentence2\":\"B\",\"gold_label\":\"maybe\"}\n";
    let rows = parse_dataset(DataFormat::Jsonl, text).unwrap();
    assert!(a.adapt(&rows[0], 0).unwrap().is_none());
    assert!(matches!(
        a.adapt(&rows[1], 1),
        Err(AdapterError::Missing { line: 2, .. })
    ));
    assert!(matches!(
        a.adapt(&rows[2], 2),
        Err(AdapterError::UnknownLabel { line: 3, .. })
    ));
    assert!(matches!(
        parse_dataset(DataFormat::Jsonl, "{\"a\":1}\n{oops"),
        Err(AdapterError::Malformed { line: 2, .. })
    ));
    let bad_shape = Adapter::shipped(BenchmarkKind::GlueAx);
    let mut json = serde_json::to_value(&bad_shape).unwrap();
    json["completions"] = serde_json::json!(["{hypothesis}", "{premise}"]);
    assert!(matches!(
        Adapter::from_json(&json.to_string()),
        Err(AdapterError::Config(_))
    ));
    json["completions"] = serde_json::json!(["{nothing}"]);
    assert!(matches!(
        Adapter::from_json(&json.to_string()),
        Err(AdapterError::Config(_))
    ));
}

fn random_glue(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ["entailment", "contradiction", "neutral"];
    let mut tsv = String::from("Premise\tHypothesis\tLabel\n");
    for i in 0..n {
        let l = labels[rng.random_range(0..3)];
        tsv.push_str(&format!("Person {i} walks home.\tPerson {i} moves\t{l}\n"));
    }
    tsv
}

#[test]
fn uniform_model_scores_chance_on_three_classes() {
    let a = Adapter::shipped(BenchmarkKind::GlueAx);
    let rows = parse_dataset(DataFormat::Tsv, &random_glue(1000, 2020)).unwrap();
    let r = run_nlu_eval(&UniformLm::new(50_257).unwrap(), &a, &rows, 4).unwrap();
    assert_eq!(r.evaluated, 1000);
    assert!((r.accuracy - 100.0 / 3.0).abs() <= 4.0, "{}", r.accuracy);
    assert!(r.records.iter().all(|x| x.predicted == Some(1)));
    let again = NluReport::from_records(&a, r.model_name.clone(), r.unlabeled, r.records.clone());
    assert_eq!(again, r);
    assert_eq!(r.confusion.iter().flatten().sum::<usize>(), r.evaluated);
    assert_eq!((0..3).map(|i| r.confusion[i][i]).sum::<usize>(), r.correct);
    assert!(r.render().contains("entailment"));
}

struct Broken;

impl LanguageModel for Broken {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        Ok(ModelInfo {
            model_name: "broken".into(),
            protocol_version: PROTOCOL_VERSION.into(),
        })
    }
    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        if req.prompt.contains("Person 1 ") {
            Err(GatewayError::Transport("timeout".into()))
        } else {
            UniformLm::new(10).unwrap().score(req)
        }
    }
    fn generate(&self, _: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        unreachable!()
    }
}

#[test]
fn endpoint_failures_skip_items() {
    let a = Adapter::shipped(BenchmarkKind::GlueAx);
    let rows = parse_dataset(DataFormat::Tsv, &random_glue(5, 1)).unwrap();
    let r = run_nlu_eval(&Broken, &a, &rows, 1).unwrap();
    assert_eq!((r.items, r.evaluated, r.skipped), (5, 4, 1));
    assert!(r.incomplete);
    assert!(r.records[1].error.as_deref().unwrap().contains("timeout"));
}
