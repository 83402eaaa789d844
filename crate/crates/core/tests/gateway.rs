use std::collections::BTreeMap;
use std::sync::Arc;

use aac::gateway::{
    build_mock, serve, Endpoint, GatewayError, GenerateRequest, GenerateResponse, HttpLm, LanguageModel, MockSpec,
    ModelInfo, OracleLm, ScoreRequest, ScoreResponse, TableRow, TableSpec, UniformLm, MAX_TOKEN_BUDGET,
    PROTOCOL_VERSION,
};

const HERMES: &str = "Every philosopher is mortal. Hermes is not mortal. Therefore, Hermes";

fn score(lm: &dyn LanguageModel, prompt: &str, completion: &str) -> Result<ScoreResponse, GatewayError> {
    lm.score(&ScoreRequest {
        prompt: prompt.into(),
        completion: completion.into(),
    })
}

fn gen(lm: &dyn LanguageModel, prompt: &str, max_tokens: usize, top_p: f64, seed: u64) -> Result<String, GatewayError> {
    lm.generate(&GenerateRequest {
        prompt: prompt.into(),
        max_tokens,
        top_p,
        seed,
    })
    .map(|r| r.text)
}

fn row(context: &str, probs: &[(&str, f64)]) -> TableRow {
    TableRow {
        context: context.into(),
        probs: probs
            .iter()
            .map(|(t, p)| (t.to_string(), *p))
            .collect::<BTreeMap<_, _>>(),
    }
}

fn table_spec() -> TableSpec {
    TableSpec {
        model_name: "mock-table-test".into(),
        rows: vec![
            row("", &[("the", 0.5), ("a", 0.25), ("<eos>", 0.125), ("<other>", 0.125)]),
            row("Therefore,", &[("the", 0.75), ("a", 0.125), ("<other>", 0.125)]),
            row(
                "the",
                &[("girl", 0.5), ("boy", 0.25), ("<eos>", 0.125), ("<other>", 0.125)],
            ),
            row("girl", &[("<eos>", 1.0)]),
        ],
    }
}

/// The behavioural contract every endpoint must meet.
fn conformance(lm: &dyn LanguageModel, prompt: &str, completion: &str) {
    let info = lm.info().unwrap();
    assert!(!info.model_name.is_empty());
    assert_eq!(info.protocol_version, PROTOCOL_VERSION);

    let a = score(lm, prompt, completion).unwrap();
    assert!(a.token_count > 0);
    assert_eq!(a.token_count, a.token_logprobs.len());
    assert!(a.token_logprobs.iter().all(|lp| lp.is_finite() && *lp <= 0.0));
    assert_eq!(score(lm, prompt, completion).unwrap(), a);
    let unconditional = score(lm, "", completion).unwrap();
    assert_eq!(unconditional.token_count, a.token_count);

    assert!(matches!(score(lm, prompt, "   "), Err(GatewayError::Protocol(_))));

    for seed in [0, 1, 99] {
        let g1 = gen(lm, prompt, 8, 0.9, seed).unwrap();
        assert_eq!(gen(lm, prompt, 8, 0.9, seed).unwrap(), g1, "seeded determinism");
        assert!(g1.split_whitespace().count() <= 8);
    }
    assert!(gen(lm, prompt, 1, 0.9, 5).unwrap().split_whitespace().count() <= 1);
    assert!(gen(lm, prompt, 0, 0.9, 5).unwrap().is_empty());
    assert!(matches!(gen(lm, prompt, 4, 0.0, 5), Err(GatewayError::Protocol(_))));
    assert!(matches!(gen(lm, prompt, 4, 1.5, 5), Err(GatewayError::Protocol(_))));
    assert!(matches!(
        gen(lm, prompt, MAX_TOKEN_BUDGET + 1, 0.9, 5),
        Err(GatewayError::BudgetExceeded { .. })
    ));

    // A greedy continuation scores at least as well, token by token, as any
    // single-token deviation from it.
    let greedy = gen(lm, prompt, 3, 1e-9, 0).unwrap();
    if !greedy.is_empty() {
        let forced = score(lm, prompt, &greedy).unwrap();
        let words: Vec<&str> = greedy.split_whitespace().collect();
        for i in 0..words.len() {
            let mut alt = words.clone();
            alt[i] = "zzzq";
            let deviated = score(lm, prompt, &alt.join(" ")).unwrap();
            assert!(forced.token_logprobs[i] >= deviated.token_logprobs[i] - 1e-12);
            assert!(
                (forced.token_logprobs[..i].iter().sum::<f64>() - deviated.token_logprobs[..i].iter().sum::<f64>())
                    .abs()
                    < 1e-9
            );
        }
    }
}

#[test]
fn uniform_scores_log_one_over_v() {
    let lm = UniformLm::new(100).unwrap();
    let r = score(&lm, "anything at all", "three token completion").unwrap();
    assert_eq!(r.token_count, 3);
    for lp in r.token_logprobs {
        assert!((lp - 0.01f64.ln()).abs() < 1e-12);
    }
    let pp = (-score(&lm, "", "one two three four")
        .unwrap()
        .token_logprobs
        .iter()
        .sum::<f64>()
        / 4.0)
        .exp();
    assert!((pp - 100.0).abs() < 1e-9);
    assert!(UniformLm::new(0).is_err());
}

#[test]
fn table_echoes_declared_rows() {
    let lm = build_mock(MockSpec::Table(table_spec())).unwrap();
    let r = score(lm.as_ref(), "The cat sat. Therefore,", "the girl").unwrap();
    assert_eq!(r.token_logprobs, vec![0.75f64.ln(), 0.5f64.ln()]);
    let r = score(lm.as_ref(), "", "a dog").unwrap();
    assert_eq!(r.token_logprobs, vec![0.25f64.ln(), 0.125f64.ln()]);
    assert!(matches!(
        score(lm.as_ref(), "girl", "cat"),
        Err(GatewayError::Protocol(_))
    ));
}

#[test]
fn table_rows_must_be_distributions() {
    let mut spec = table_spec();
    spec.rows.push(row("x", &[("a", 0.5), ("b", 0.4)]));
    assert!(matches!(
        build_mock(MockSpec::Table(spec)),
        Err(GatewayError::BadTable(_))
    ));
    let mut spec = table_spec();
    spec.rows.push(row("x", &[("a", 1.0 + 1e-12)]));
    assert!(build_mock(MockSpec::Table(spec)).is_ok());
    let mut spec = table_spec();
    spec.rows.push(row("  Therefore, ", &[("a", 1.0)]));
    assert!(matches!(
        build_mock(MockSpec::Table(spec)),
        Err(GatewayError::BadTable(_))
    ));
    let mut spec = table_spec();
    spec.rows.push(row("y", &[("a", 1.5), ("b", -0.5)]));
    assert!(matches!(
        build_mock(MockSpec::Table(spec)),
        Err(GatewayError::BadTable(_))
    ));
}

#[test]
fn table_generation_follows_rows() {
    let lm = aac::gateway::TableLm::new(table_spec()).unwrap();
    assert_eq!(gen(&lm, "Therefore,", 5, 0.5, 3).unwrap(), "the girl");
}

#[test]
fn oracle_completes_hermes_with_the_entailed_predicate() {
    let lm = OracleLm::shipped();
    assert_eq!(lm.answer(HERMES).as_deref(), Some("is not a philosopher."));
    for seed in 0..20 {
        assert_eq!(gen(&lm, HERMES, 16, 0.9, seed).unwrap(), "is not a philosopher.");
    }
    assert_eq!(gen(&lm, HERMES, 2, 0.9, 0).unwrap(), "is not");
    let good = score(&lm, HERMES, "is not a philosopher.")
        .unwrap()
        .token_logprobs
        .iter()
        .sum::<f64>();
    let bad = score(&lm, HERMES, "is a philosopher.")
        .unwrap()
        .token_logprobs
        .iter()
        .sum::<f64>();
    assert!(good > bad);
}

#[test]
fn oracle_split_and_extended_prompts() {
    let lm = OracleLm::shipped();
    let premises = "Every nephew of Dylan is a classmate of Sean. Rufus is a nephew of Dylan.";
    assert_eq!(
        lm.answer(&format!("{premises} Therefore, Rufus is a")).as_deref(),
        Some("classmate of Sean.")
    );
    assert_eq!(
        lm.answer(&format!("{premises} Therefore, Rufus is")).as_deref(),
        Some("a classmate of Sean.")
    );
    let chain = "Every uncle of Tom is a cousin of Bob. Every cousin of Bob is a friend of Al.";
    assert_eq!(
        lm.answer(&format!("{chain} Hence, every uncle of Tom is")).as_deref(),
        Some("a friend of Al.")
    );
    assert_eq!(lm.answer("The sky is blue. It"), None);
    assert_eq!(lm.answer(""), None);
}

#[test]
fn mocks_pass_conformance_in_process() {
    conformance(&UniformLm::new(100).unwrap(), "The cat sat.", "one two three");
    conformance(
        &aac::gateway::TableLm::new(table_spec()).unwrap(),
        "Therefore,",
        "the girl",
    );
    conformance(&OracleLm::shipped(), HERMES, "is not a philosopher.");
}

fn served(model: Arc<dyn LanguageModel>) -> (aac::gateway::ServerHandle, HttpLm) {
    let server = serve(model, "127.0.0.1:0").unwrap();
    let client = HttpLm::connect(&server.url()).unwrap();
    (server, client)
}

#[test]
fn mocks_pass_conformance_over_http_and_match_in_process() {
    let cases: Vec<(Arc<dyn LanguageModel>, &str, &str)> = vec![
        (Arc::new(UniformLm::new(100).unwrap()), "The cat sat.", "one two three"),
        (
            Arc::new(aac::gateway::TableLm::new(table_spec()).unwrap()),
            "Therefore,",
            "the girl",
        ),
        (Arc::new(OracleLm::shipped()), HERMES, "is not a philosopher."),
    ];
    for (model, prompt, completion) in cases {
        let (_server, client) = served(Arc::clone(&model));
        conformance(&client, prompt, completion);
        assert_eq!(client.info().unwrap(), model.info().unwrap());
        assert_eq!(
            score(&client, prompt, completion).unwrap(),
            score(model.as_ref(), prompt, completion).unwrap()
        );
        for seed in 0..5 {
            assert_eq!(
                gen(&client, prompt, 6, 0.9, seed).unwrap(),
                gen(model.as_ref(), prompt, 6, 0.9, seed).unwrap()
            );
        }
    }
}

#[test]
fn http_client_handles_concurrent_requests() {
    let (_server, client) = served(Arc::new(OracleLm::shipped()));
    let client = Arc::new(client);
    let handles: Vec<_> = (0..8)
        .map(|seed| {
            let c = Arc::clone(&client);
            std::thread::spawn(move || gen(c.as_ref(), HERMES, 8, 0.9, seed).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), "is not a philosopher.");
    }
}

struct OldModel;

impl LanguageModel for OldModel {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        Ok(ModelInfo {
            model_name: "old".into(),
            protocol_version: "0".into(),
        })
    }
    fn score(&self, _: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        unreachable!()
    }
    fn generate(&self, _: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        unreachable!()
    }
}

#[test]
fn protocol_version_mismatch_is_rejected() {
    let server = serve(Arc::new(OldModel), "127.0.0.1:0").unwrap();
    assert!(matches!(
        HttpLm::connect(&server.url()),
        Err(GatewayError::VersionMismatch { .. })
    ));
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    assert!(matches!(
        HttpLm::connect(&format!("http://127.0.0.1:{port}")),
        Err(GatewayError::Transport(_))
    ));
}

#[test]
fn wire_field_names_are_exact() {
    let req = serde_json::to_value(GenerateRequest::new("p", 3)).unwrap();
    let mut keys: Vec<&str> = req.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["max_tokens", "prompt", "seed", "top_p"]);
    assert_eq!(req["top_p"], 0.9);
    let parsed: GenerateRequest = serde_json::from_str(r#"{"prompt":"x","max_tokens":4,"seed":1}"#).unwrap();
    assert_eq!(parsed.top_p, 0.9);
    let resp = serde_json::to_value(ScoreResponse {
        token_logprobs: vec![-1.0],
        token_count: 1,
    })
    .unwrap();
    assert_eq!(resp, serde_json::json!({"token_logprobs": [-1.0], "token_count": 1}));
    let info = serde_json::to_value(OracleLm::shipped().info().unwrap()).unwrap();
    assert_eq!(info["protocol_version"], PROTOCOL_VERSION);
    assert!(info["model_name"].is_string());
}

#[test]
fn endpoint_strings_parse() {
    assert_eq!("mock:oracle".parse::<Endpoint>().unwrap(), Endpoint::Oracle);
    assert_eq!("mock:uniform:100".parse::<Endpoint>().unwrap(), Endpoint::Uniform(100));
    assert!(matches!(
        "mock:uniform".parse::<Endpoint>().unwrap(),
        Endpoint::Uniform(_)
    ));
    assert_eq!(
        "mock:table:/tmp/t.json".parse::<Endpoint>().unwrap(),
        Endpoint::Table("/tmp/t.json".into())
    );
    assert_eq!(
        "http://localhost:8000/".parse::<Endpoint>().unwrap(),
        Endpoint::Http("http://localhost:8000".into())
    );
    for bad in ["mock:", "mock:uniform:x", "oracle", "mock:table:", "ftp://x"] {
        assert!(
            matches!(bad.parse::<Endpoint>(), Err(GatewayError::BadEndpoint(_))),
            "{bad}"
        );
    }
}

#[test]
fn table_endpoint_loads_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(&path, serde_json::to_string(&table_spec()).unwrap()).unwrap();
    let lm = Endpoint::Table(path).connect().unwrap();
    assert_eq!(lm.info().unwrap().model_name, "mock-table-test");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"rows":[{"context":"","probs":{"a":0.9}}]}"#).unwrap();
    assert!(matches!(Endpoint::Table(bad).connect(), Err(GatewayError::BadTable(_))));
}
