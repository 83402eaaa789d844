use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mocks::vocab_word;
use super::{
    check_generate_request, check_score_request, score_response, tokenize, GatewayError, GenerateRequest,
    GenerateResponse, LanguageModel, ModelInfo, ScoreRequest, ScoreResponse, DEFAULT_UNIFORM_VOCAB, END_OF_TEXT,
    PROTOCOL_VERSION,
};
use crate::logic::{is_valid, Formula, Phrase, SentenceForm};
use crate::verbalizer::reader::{read_fragment, read_prompt};
use crate::verbalizer::{article, TemplateRegistry, DEFAULT_TEMPLATES};

/// Probability the oracle puts on its own next answer token.
pub const ORACLE_TOP_PROB: f64 = 0.95;

/// Reads the premises of an argumentative prompt and completes its open
/// conclusion with the best entailed continuation.
#[derive(Clone, Debug)]
pub struct OracleLm {
    templates: TemplateRegistry,
    vocab_size: usize,
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Rank {
    irrelevant: bool,
    tail: TailStatus,
    repeats_open: bool,
    bare: bool,
    order: usize,
}

/// How the completed literal fares on its own, as the sole tail of the
/// conclusion sentence.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum TailStatus {
    NeedsAll,
    NotEntailed,
    Trivial,
}

fn tail_only(f: &Formula) -> Option<Formula> {
    let form = SentenceForm::classify(f)?;
    let lit = Phrase::Lit(form.tail()?.clone());
    Some(
        match form {
            SentenceForm::Generalization { antecedent, .. } => SentenceForm::Generalization {
                antecedent,
                consequent: lit,
            },
            SentenceForm::Predication { .. } => SentenceForm::Predication { phrase: lit },
            SentenceForm::Biconditional { .. } => return None,
        }
        .to_formula(),
    )
}

fn tail_status(premises: &[Formula], f: &Formula) -> TailStatus {
    match tail_only(f) {
        Some(t) if entailed(premises, &t) => {
            if needs_all(premises, &t) {
                TailStatus::NeedsAll
            } else {
                TailStatus::Trivial
            }
        }
        _ => TailStatus::NotEntailed,
    }
}

fn entailed(premises: &[Formula], conclusion: &Formula) -> bool {
    is_valid(premises, conclusion).unwrap_or(false)
}

/// Entailed, but not by any premise set with one premise dropped.
fn needs_all(premises: &[Formula], conclusion: &Formula) -> bool {
    (0..premises.len()).all(|skip| {
        let rest: Vec<Formula> = premises
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, f)| f.clone())
            .collect();
        !entailed(&rest, conclusion)
    })
}

impl OracleLm {
    pub fn new(templates: TemplateRegistry) -> Self {
        Self {
            templates,
            vocab_size: DEFAULT_UNIFORM_VOCAB,
        }
    }

    pub fn shipped() -> Self {
        Self::new(TemplateRegistry::from_json(DEFAULT_TEMPLATES).expect("shipped templates are valid"))
    }

    /// Best entailed completion of the prompt's open fragment, ending with
    /// a period, or `None` when no candidate is entailed.
    pub fn answer(&self, prompt: &str) -> Option<String> {
        let arg = read_prompt(prompt, &self.templates);
        let open = arg.open.trim();
        if arg.premises.is_empty() || open.is_empty() {
            return None;
        }
        let mut preds: Vec<String> = Vec::new();
        for f in &arg.premises {
            for p in f.predicates() {
                if !preds.contains(&p) {
                    preds.push(p);
                }
            }
        }
        let open_lower = format!(" {} ", open.to_lowercase());
        let mut best: Option<(Rank, String)> = None;
        let mut order = 0;
        for pred in &preds {
            let repeats_open = open_lower.contains(&format!(" {} ", pred.to_lowercase()));
            for copula in ["", "is "] {
                for neg in ["", "not "] {
                    for with_article in [true, false] {
                        order += 1;
                        let art = if with_article {
                            format!("{} ", article(pred))
                        } else {
                            String::new()
                        };
                        let cand = format!("{copula}{neg}{art}{pred}.");
                        let Some(r) = read_fragment(&format!("{open} {cand}"), &self.templates) else {
                            continue;
                        };
                        if matches!((&arg.constant, &r.constant), (Some(c), Some(n)) if c != n) {
                            continue;
                        }
                        if !entailed(&arg.premises, &r.formula) {
                            continue;
                        }
                        let rank = Rank {
                            irrelevant: !needs_all(&arg.premises, &r.formula),
                            tail: tail_status(&arg.premises, &r.formula),
                            repeats_open,
                            bare: !with_article,
                            order,
                        };
                        if best.as_ref().is_none_or(|(b, _)| rank < *b) {
                            best = Some((rank, cand));
                        }
                    }
                }
            }
        }
        best.map(|(_, c)| c)
    }

    fn residual(&self) -> f64 {
        (1.0 - ORACLE_TOP_PROB) / (self.vocab_size - 1) as f64
    }
}

impl LanguageModel for OracleLm {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        Ok(ModelInfo {
            model_name: "mock-oracle-reasoner".into(),
            protocol_version: PROTOCOL_VERSION.into(),
        })
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        let tokens = check_score_request(req)?;
        let answer = self.answer(&req.prompt);
        let expected: Option<Vec<&str>> = answer.as_deref().map(|a| {
            let mut t = tokenize(a);
            t.push(END_OF_TEXT);
            t
        });
        let uniform = -(self.vocab_size as f64).ln();
        let mut on_track = expected.is_some();
        let mut out = Vec::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            let want = expected.as_ref().and_then(|e| e.get(i));
            out.push(match want {
                Some(w) if on_track && w == t => ORACLE_TOP_PROB.ln(),
                Some(_) if on_track => {
                    on_track = false;
                    self.residual().ln()
                }
                _ => {
                    on_track = false;
                    uniform
                }
            });
        }
        Ok(score_response(out))
    }

    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        check_generate_request(req)?;
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        let mut expected: Vec<String> = self
            .answer(&req.prompt)
            .map(|a| tokenize(&a).into_iter().map(String::from).collect())
            .unwrap_or_default();
        let mut on_track = !expected.is_empty();
        expected.push(END_OF_TEXT.into());
        // Residual words needed to fill the nucleus beyond the top token.
        let extra = ((req.top_p - ORACLE_TOP_PROB) / self.residual()).ceil().max(0.0) as usize;
        let extra = extra.min(self.vocab_size - 1);
        let off_track_nucleus = ((req.top_p * self.vocab_size as f64).ceil() as usize).clamp(1, self.vocab_size);
        let mut words: Vec<String> = Vec::new();
        for i in 0..req.max_tokens {
            let next = if on_track {
                let mass_extra = extra as f64 * self.residual();
                if extra == 0 || rng.random::<f64>() * (ORACLE_TOP_PROB + mass_extra) < ORACLE_TOP_PROB {
                    expected[i].clone()
                } else {
                    on_track = false;
                    vocab_word(rng.random_range(0..extra))
                }
            } else {
                vocab_word(rng.random_range(0..off_track_nucleus))
            };
            if next == END_OF_TEXT {
                break;
            }
            words.push(next);
        }
        Ok(GenerateResponse { text: words.join(" ") })
    }
}
