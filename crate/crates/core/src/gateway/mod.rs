//! Language-model wire protocol, an HTTP client and server for it, and
//! deterministic in-process mock models.

mod http;
mod mocks;
mod oracle;
mod sampling;
mod table;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use http::{serve, HttpLm, ServerHandle};
pub use mocks::UniformLm;
pub use oracle::{OracleLm, ORACLE_TOP_PROB};
pub use sampling::{nucleus_indices, nucleus_sample};
pub use table::{TableLm, TableRow, TableSpec, OTHER_TOKEN};

pub const PROTOCOL_VERSION: &str = "1";
pub const DEFAULT_TOP_P: f64 = 0.9;
pub const DEFAULT_MAX_TOKENS: usize = 32;
/// Upper bound on `max_tokens` accepted by the mocks.
pub const MAX_TOKEN_BUDGET: usize = 1024;
pub const END_OF_TEXT: &str = "<eos>";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub prompt: String,
    pub completion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub token_logprobs: Vec<f64>,
    pub token_count: usize,
}

fn default_top_p() -> f64 {
    DEFAULT_TOP_P
}

fn default_max_tokens() -> usize {
    DEFAULT_MAX_TOKENS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prompt: String,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GenerateRequest {
    pub fn new(prompt: impl Into<String>, seed: u64) -> Self {
        Self {
            prompt: prompt.into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            top_p: DEFAULT_TOP_P,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_name: String,
    pub protocol_version: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("protocol version mismatch: expected {expected}, endpoint speaks {got}")]
    VersionMismatch { expected: String, got: String },
    #[error("token budget exceeded: max_tokens {requested} > {limit}")]
    BudgetExceeded { requested: usize, limit: usize },
    #[error("malformed probability table: {0}")]
    BadTable(String),
    #[error("bad endpoint {0:?}: expected mock:oracle, mock:uniform[:V], mock:table:PATH or an http(s) URL")]
    BadEndpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that scores and samples continuations over the wire protocol.
pub trait LanguageModel: Send + Sync {
    fn info(&self) -> Result<ModelInfo, GatewayError>;
    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError>;
    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError>;
}

impl<T: LanguageModel + ?Sized> LanguageModel for Arc<T> {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        (**self).info()
    }
    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        (**self).score(req)
    }
    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        (**self).generate(req)
    }
}

impl<T: LanguageModel + ?Sized> LanguageModel for Box<T> {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        (**self).info()
    }
    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        (**self).score(req)
    }
    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        (**self).generate(req)
    }
}

/// Word-level tokens used by every mock.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub(crate) fn check_score_request(req: &ScoreRequest) -> Result<Vec<&str>, GatewayError> {
    let tokens = tokenize(&req.completion);
    if tokens.is_empty() {
        return Err(GatewayError::Protocol("completion has no tokens".into()));
    }
    Ok(tokens)
}

pub(crate) fn check_generate_request(req: &GenerateRequest) -> Result<(), GatewayError> {
    if !(req.top_p > 0.0 && req.top_p <= 1.0) {
        return Err(GatewayError::Protocol(format!("top_p {} outside (0, 1]", req.top_p)));
    }
    if req.max_tokens > MAX_TOKEN_BUDGET {
        return Err(GatewayError::BudgetExceeded {
            requested: req.max_tokens,
            limit: MAX_TOKEN_BUDGET,
        });
    }
    Ok(())
}

pub(crate) fn score_response(token_logprobs: Vec<f64>) -> ScoreResponse {
    ScoreResponse {
        token_count: token_logprobs.len(),
        token_logprobs,
    }
}

/// In-process mock models.
#[derive(Clone, Debug, PartialEq)]
pub enum MockSpec {
    OracleReasoner,
    Uniform { vocab_size: usize },
    Table(TableSpec),
}

pub fn build_mock(spec: MockSpec) -> Result<Box<dyn LanguageModel>, GatewayError> {
    Ok(match spec {
        MockSpec::OracleReasoner => Box::new(OracleLm::shipped()),
        MockSpec::Uniform { vocab_size } => Box::new(UniformLm::new(vocab_size)?),
        MockSpec::Table(t) => Box::new(TableLm::new(t)?),
    })
}

pub const DEFAULT_UNIFORM_VOCAB: usize = 50_257;

/// Where to send scoring and generation requests.
#[derive(Clone, Debug, PartialEq)]
pub enum Endpoint {
    Oracle,
    Uniform(usize),
    Table(PathBuf),
    Http(String),
}

impl std::str::FromStr for Endpoint {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GatewayError::BadEndpoint(s.to_string());
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(Endpoint::Http(s.trim_end_matches('/').to_string()));
        }
        let rest = s.strip_prefix("mock:").ok_or_else(bad)?;
        match rest.split_once(':') {
            None if rest == "oracle" => Ok(Endpoint::Oracle),
            None if rest == "uniform" => Ok(Endpoint::Uniform(DEFAULT_UNIFORM_VOCAB)),
            Some(("uniform", v)) => v.parse().map(Endpoint::Uniform).map_err(|_| bad()),
            Some(("table", p)) if !p.is_empty() => Ok(Endpoint::Table(PathBuf::from(p))),
            _ => Err(bad()),
        }
    }
}

impl Endpoint {
    /// Opens the endpoint; HTTP endpoints are checked for protocol version.
    pub fn connect(&self) -> Result<Box<dyn LanguageModel>, GatewayError> {
        match self {
            Endpoint::Oracle => build_mock(MockSpec::OracleReasoner),
            Endpoint::Uniform(v) => build_mock(MockSpec::Uniform { vocab_size: *v }),
            Endpoint::Table(p) => {
                let spec: TableSpec = serde_json::from_str(&std::fs::read_to_string(p)?)
                    .map_err(|e| GatewayError::BadTable(format!("{}: {e}", p.display())))?;
                build_mock(MockSpec::Table(spec))
            }
            Endpoint::Http(url) => Ok(Box::new(HttpLm::connect(url)?)),
        }
    }
}
