use aac::catalog::default_catalog;
use aac::logic::{parse_formula, substitute, Binding, Formula, Shape};
use aac::verbalizer::reader::{read_prompt, read_sentence};
use aac::verbalizer::{
    article, char_slice, compose_paragraph, realize_predicates, verbalize_sentence, Frame, PremiseStyle,
    RenderedSentence, Split, TemplateRegistry, Verbalizer, VerbalizerError,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn binding(pairs: &[(&str, &str)], name: Option<&str>) -> Binding {
    Binding {
        predicates: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        constant: name.map(str::to_string),
    }
}

fn enumerated() -> PremiseStyle {
    PremiseStyle {
        id: "enumerated".into(),
        prefixes: vec![
            "First premise: ".into(),
            "Second premise: ".into(),
            "Third premise: ".into(),
        ],
        lowercase: false,
    }
}

#[test]
fn shipped_inventories() {
    let v = Verbalizer::shipped();
    assert_eq!(v.domains.pool(Split::Train).len(), 5);
    assert_eq!(v.domains.pool(Split::TestOnly).len(), 2);
    for d in v.domains.all() {
        assert!(d.entities.len() >= 100, "{}", d.name);
        assert!(d.relations.len() >= 5, "{}", d.name);
        assert!(d.intros.len() >= 3, "{}", d.name);
    }
    for shape in [Shape::Generalization, Shape::Predication, Shape::Biconditional] {
        let of_shape: Vec<_> = v.templates.all().iter().filter(|t| t.shape == shape).collect();
        assert!(of_shape.len() >= 4, "{shape:?}");
        assert!(of_shape.iter().any(|t| t.split == Split::TestOnly), "{shape:?}");
    }
}

#[test]
fn universal_conditional_patterns() {
    let v = Verbalizer::shipped();
    let f = parse_formula("(x): F x -> G x").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut train = std::collections::BTreeSet::new();
    let mut test = std::collections::BTreeSet::new();
    for _ in 0..200 {
        train.insert(
            verbalize_sentence(&f, &v.templates, Split::Train, false, &mut rng)
                .unwrap()
                .symbolic(),
        );
        test.insert(
            verbalize_sentence(&f, &v.templates, Split::TestOnly, false, &mut rng)
                .unwrap()
                .symbolic(),
        );
    }
    assert!(train.contains("Every F is a G."));
    assert!(train.contains("Whoever is a F is also a G."));
    assert!(train.contains("Being a G is necessary for being a F."));
    assert!(!train.contains("If someone is a F, then they are a G."));
    assert!(test.contains("If someone is a F, then they are a G."));
}

#[test]
fn conclusions_use_tail_final_templates() {
    let v = Verbalizer::shipped();
    let f = parse_formula("(x): F x -> G x").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let s = verbalize_sentence(&f, &v.templates, Split::Train, true, &mut rng).unwrap();
        assert!(s.symbolic().ends_with("a G."), "{}", s.symbolic());
    }
}

#[test]
fn empty_pool_is_an_error() {
    let templates = TemplateRegistry::from_json(
        r#"{"sentences": [{"id": "p", "shape": "predication", "split": "train", "pattern": "{a} is {P}."},
        {"id": "g", "shape": "generalization", "split": "train", "pattern": "Every {P:noun} is {Q}."}]}"#,
    )
    .unwrap();
    let f = parse_formula("(x): (F x -> G x) & (G x -> F x)").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(
        verbalize_sentence(&f, &templates, Split::Train, false, &mut rng),
        Err(VerbalizerError::NoTemplate { .. })
    ));
    // the noun slot cannot hold a negated antecedent
    let g = parse_formula("(x): not F x -> G x").unwrap();
    assert!(verbalize_sentence(&g, &templates, Split::Train, false, &mut rng).is_err());
}

#[test]
fn unknown_slot_rejected() {
    let err = TemplateRegistry::from_json(
        r#"{"sentences": [{"id": "x", "shape": "predication", "split": "train", "pattern": "{a} is {R}."}]}"#,
    )
    .unwrap_err();
    assert!(matches!(err, VerbalizerError::UnknownSlot(_, slot) if slot == "R"));
}

#[test]
fn articles() {
    assert_eq!(article("infrequent user of Neutrogena shampoo"), "an");
    assert_eq!(article("sister of Anna"), "a");
    assert_eq!(article("ex-fan of Sevilla FC"), "an");
}

fn every_template(v: &Verbalizer) -> aac::verbalizer::SentenceTemplate {
    v.templates.get("gen-every").unwrap().clone()
}

#[test]
fn realize_workmate_example() {
    let v = Verbalizer::shipped();
    let f = parse_formula("(x): F x -> G x").unwrap();
    let scheme = aac::verbalizer::SentenceScheme {
        template: every_template(&v),
        form: aac::logic::SentenceForm::classify(&f).unwrap(),
    };
    let out = realize_predicates(
        &[scheme],
        &binding(&[("F", "workmate of Brad"), ("G", "classmate of James")], None),
    )
    .unwrap();
    assert_eq!(out[0].text, "Every workmate of Brad is a classmate of James.");
    let missing = realize_predicates(
        &[aac::verbalizer::SentenceScheme {
            template: every_template(&v),
            form: aac::logic::SentenceForm::classify(&f).unwrap(),
        }],
        &binding(&[("F", "workmate of Brad")], None),
    );
    assert!(matches!(missing, Err(VerbalizerError::UnboundSlot(s)) if s == "G"));
}

fn sentence(text: &str) -> RenderedSentence {
    RenderedSentence {
        text: text.into(),
        starts_with_name: false,
    }
}

#[test]
fn paragraph_with_spans() {
    let style = enumerated();
    let frame = Frame {
        intro: "It is not always easy to see who is related to whom -- and in which ways. The following argument pertains to this question:",
        style: &style,
        indicator: "So, necessarily, ",
    };
    let p = compose_paragraph(
        &[
            sentence("Every workmate of Brad is a classmate of James."),
            sentence("Every classmate of James is not a classmate of Theodore."),
        ],
        &sentence("Everyone who is a workmate of Brad is not a classmate of Theodore."),
        &frame,
    )
    .unwrap();
    assert_eq!(
        p.text,
        "It is not always easy to see who is related to whom -- and in which ways. The following argument \
         pertains to this question: First premise: Every workmate of Brad is a classmate of James. Second \
         premise: Every classmate of James is not a classmate of Theodore. So, necessarily, everyone who is a \
         workmate of Brad is not a classmate of Theodore."
    );
    assert_eq!(char_slice(&p.text, p.span_e), "not a");
    assert_eq!(char_slice(&p.text, p.span_s), "classmate of Theodore.");
    assert_eq!(p.span_s[1], p.text.chars().count());
}

#[test]
fn single_premise_and_missing_tail() {
    let style = enumerated();
    let frame = Frame {
        intro: "",
        style: &style,
        indicator: "Therefore, ",
    };
    let p = compose_paragraph(
        &[sentence("Every philosopher is a mortal.")],
        &RenderedSentence {
            text: "Hermes is an immortal.".into(),
            starts_with_name: true,
        },
        &frame,
    )
    .unwrap();
    assert_eq!(
        p.text,
        "First premise: Every philosopher is a mortal. Therefore, Hermes is an immortal."
    );
    assert_eq!(char_slice(&p.text, p.span_e), "an");
    let err = compose_paragraph(
        &[sentence("Every philosopher is a mortal.")],
        &sentence("Hermes does not exist."),
        &frame,
    );
    assert!(matches!(err, Err(VerbalizerError::NoTail(_))));
    assert!(matches!(
        compose_paragraph(&[], &sentence("Hermes is a god."), &frame),
        Err(VerbalizerError::NoPremises)
    ));
}

#[test]
fn reads_the_hermes_prompt() {
    let v = Verbalizer::shipped();
    let arg = read_prompt(
        "Every philosopher is mortal. Hermes is not mortal. Therefore, Hermes",
        &v.templates,
    );
    assert_eq!(arg.constant.as_deref(), Some("Hermes"));
    assert_eq!(arg.open, "Therefore, Hermes");
    let shown: Vec<String> = arg.premises.iter().map(Formula::to_string).collect();
    assert_eq!(shown, ["(x): philosopher x -> mortal x", "not mortal a"]);
}

#[test]
fn skips_non_template_sentences() {
    let v = Verbalizer::shipped();
    let arg = read_prompt(
        "Here comes a perfectly valid argument about consumer habits: To begin with, every loyal buyer of Dove soap \
         is a regular user of Aussie shampoo. Moreover, Lois is a loyal buyer of Dove soap. Hence, Lois is",
        &v.templates,
    );
    assert_eq!(arg.premises.len(), 2);
    assert_eq!(arg.open, "Hence, Lois is");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Rendering any catalog sentence with any fitting template and reading
    /// it back recovers the concrete formula.
    #[test]
    fn render_then_read(scheme_ix in 0usize..71, seed in any::<u64>(), ood in any::<bool>()) {
        let v = Verbalizer::shipped();
        let catalog = default_catalog();
        let scheme = &catalog.all()[scheme_ix];
        let split = if ood { Split::TestOnly } else { Split::Train };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = v.domains.pool(split)[(seed % 2) as usize];
        let b = domain.draw_binding(scheme, &mut rng);
        let concrete = substitute(scheme, &b).unwrap();
        for (i, f) in scheme.sentences().enumerate() {
            let is_conclusion = i == scheme.premises.len();
            let s = verbalize_sentence(f, &v.templates, split, is_conclusion, &mut rng).unwrap();
            let text = realize_predicates(&[s], &b).unwrap().remove(0).text;
            let read = read_sentence(&text, &v.templates).unwrap();
            let expected = if is_conclusion { &concrete.conclusion } else { &concrete.premises[i] };
            prop_assert_eq!(&read.formula, expected, "{}", text);
            prop_assert_eq!(read.constant, if f.mentions_constant() { b.constant.clone() } else { None });
        }
    }
}
