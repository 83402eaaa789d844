use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_generate_request, check_score_request, score_response, GatewayError, GenerateRequest, GenerateResponse,
    LanguageModel, ModelInfo, ScoreRequest, ScoreResponse, PROTOCOL_VERSION,
};

/// Word `i` of a synthetic vocabulary.
pub(crate) fn vocab_word(i: usize) -> String {
    format!("w{i}")
}

/// Every token has probability 1/V regardless of context.
#[derive(Clone, Debug)]
pub struct UniformLm {
    vocab_size: usize,
}

impl UniformLm {
    pub fn new(vocab_size: usize) -> Result<Self, GatewayError> {
        if vocab_size == 0 {
            return Err(GatewayError::Protocol("vocabulary size must be positive".into()));
        }
        Ok(Self { vocab_size })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

impl LanguageModel for UniformLm {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        Ok(ModelInfo {
            model_name: format!("mock-uniform-{}", self.vocab_size),
            protocol_version: PROTOCOL_VERSION.into(),
        })
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        let tokens = check_score_request(req)?;
        let lp = -(self.vocab_size as f64).ln();
        Ok(score_response(vec![lp; tokens.len()]))
    }

    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        check_generate_request(req)?;
        // The nucleus of a uniform distribution is its first ceil(p * V) words.
        let nucleus = ((req.top_p * self.vocab_size as f64).ceil() as usize).clamp(1, self.vocab_size);
        let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
        let words: Vec<String> = (0..req.max_tokens)
            .map(|_| vocab_word(rng.random_range(0..nucleus)))
            .collect();
        Ok(GenerateResponse { text: words.join(" ") })
    }
}
