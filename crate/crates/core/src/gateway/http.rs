use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use tiny_http::{Header, Method, Request, Response, Server};
use ureq::Agent;

use super::{
    GatewayError, GenerateRequest, GenerateResponse, LanguageModel, ModelInfo, ScoreRequest, ScoreResponse,
    MAX_TOKEN_BUDGET, PROTOCOL_VERSION,
};

const WORKERS: usize = 4;

#[derive(Debug, Serialize, Deserialize)]
struct ErrorBody {
    error: String,
    kind: String,
}

fn error_kind(e: &GatewayError) -> (u16, &'static str) {
    match e {
        GatewayError::Protocol(_) => (400, "protocol"),
        GatewayError::BudgetExceeded { .. } => (400, "budget"),
        GatewayError::VersionMismatch { .. } => (400, "version"),
        _ => (500, "internal"),
    }
}

fn json_response(status: u16, body: &impl Serialize) -> Response<std::io::Cursor<Vec<u8>>> {
    let bytes = serde_json::to_vec(body).expect("serializable body");
    Response::from_data(bytes)
        .with_status_code(status)
        .with_header(Header::from_bytes("Content-Type", "application/json").expect("static header"))
}

fn error_response(status: u16, kind: &str, msg: String) -> Response<std::io::Cursor<Vec<u8>>> {
    json_response(
        status,
        &ErrorBody {
            error: msg,
            kind: kind.into(),
        },
    )
}

fn parse<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, GatewayError> {
    serde_json::from_str(body).map_err(|e| GatewayError::Protocol(format!("bad request body: {e}")))
}

fn to_json<T: Serialize>(r: Result<T, GatewayError>) -> Result<serde_json::Value, GatewayError> {
    r.map(|v| serde_json::to_value(v).expect("serializable response"))
}

fn handle(model: &dyn LanguageModel, mut req: Request) {
    let mut body = String::new();
    if req.as_reader().read_to_string(&mut body).is_err() {
        let _ = req.respond(error_response(400, "protocol", "unreadable request body".into()));
        return;
    }
    let path = req.url().split('?').next().unwrap_or("").to_string();
    let result = match (req.method(), path.as_str()) {
        (Method::Get, "/v1/info") => to_json(model.info()),
        (Method::Post, "/v1/score") => to_json(parse::<ScoreRequest>(&body).and_then(|r| model.score(&r))),
        (Method::Post, "/v1/generate") => to_json(parse::<GenerateRequest>(&body).and_then(|r| model.generate(&r))),
        (_, "/v1/info" | "/v1/score" | "/v1/generate") => {
            let _ = req.respond(error_response(405, "method", "method not allowed".into()));
            return;
        }
        _ => {
            let _ = req.respond(error_response(404, "route", format!("no route {path}")));
            return;
        }
    };
    let response = match result {
        Ok(v) => json_response(200, &v),
        Err(e) => {
            let (status, kind) = error_kind(&e);
            error_response(status, kind, e.to_string())
        }
    };
    let _ = req.respond(response);
}

/// Running protocol server; stops when dropped.
pub struct ServerHandle {
    addr: SocketAddr,
    server: Arc<Server>,
    workers: Vec<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Serves `model` over HTTP at `addr` (port 0 picks a free port).
pub fn serve(model: Arc<dyn LanguageModel>, addr: &str) -> Result<ServerHandle, GatewayError> {
    let server = Arc::new(Server::http(addr).map_err(|e| GatewayError::Transport(e.to_string()))?);
    let addr = server
        .server_addr()
        .to_ip()
        .ok_or_else(|| GatewayError::Transport("server is not bound to an IP address".into()))?;
    let workers = (0..WORKERS)
        .map(|_| {
            let server = Arc::clone(&server);
            let model = Arc::clone(&model);
            std::thread::spawn(move || {
                while let Ok(req) = server.recv() {
                    handle(model.as_ref(), req);
                }
            })
        })
        .collect();
    Ok(ServerHandle { addr, server, workers })
}

/// Client for a remote protocol endpoint.
#[derive(Clone, Debug)]
pub struct HttpLm {
    base: String,
    agent: Agent,
}

impl HttpLm {
    /// Connects and checks the endpoint's protocol version.
    pub fn connect(base: &str) -> Result<Self, GatewayError> {
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        let lm = Self {
            base: base.trim_end_matches('/').to_string(),
            agent,
        };
        let info = lm.info()?;
        if info.protocol_version != PROTOCOL_VERSION {
            return Err(GatewayError::VersionMismatch {
                expected: PROTOCOL_VERSION.into(),
                got: info.protocol_version,
            });
        }
        Ok(lm)
    }

    fn decode<T: for<'de> Deserialize<'de>>(
        mut resp: ureq::http::Response<ureq::Body>,
        max_tokens: Option<usize>,
    ) -> Result<T, GatewayError> {
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        if status == 200 {
            return serde_json::from_str(&text)
                .map_err(|e| GatewayError::Protocol(format!("malformed response body: {e}")));
        }
        let err: ErrorBody = serde_json::from_str(&text).map_err(|_| {
            GatewayError::Transport(format!("HTTP {status}: {}", text.chars().take(200).collect::<String>()))
        })?;
        Err(match (err.kind.as_str(), max_tokens) {
            ("budget", Some(requested)) => GatewayError::BudgetExceeded {
                requested,
                limit: MAX_TOKEN_BUDGET,
            },
            ("protocol" | "budget" | "version", _) => GatewayError::Protocol(strip_prefix(&err.error)),
            _ => GatewayError::Transport(format!("HTTP {status}: {}", err.error)),
        })
    }

    fn post<B: Serialize, T: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &B,
        max_tokens: Option<usize>,
    ) -> Result<T, GatewayError> {
        let resp = self
            .agent
            .post(format!("{}{path}", self.base))
            .send_json(body)
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        Self::decode(resp, max_tokens)
    }
}

fn strip_prefix(msg: &str) -> String {
    msg.strip_prefix("protocol error: ").unwrap_or(msg).to_string()
}

impl LanguageModel for HttpLm {
    fn info(&self) -> Result<ModelInfo, GatewayError> {
        let resp = self
            .agent
            .get(format!("{}/v1/info", self.base))
            .call()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        Self::decode(resp, None)
    }

    fn score(&self, req: &ScoreRequest) -> Result<ScoreResponse, GatewayError> {
        let resp: ScoreResponse = self.post("/v1/score", req, None)?;
        if resp.token_count != resp.token_logprobs.len() || resp.token_count == 0 {
            return Err(GatewayError::Protocol(format!(
                "token_count {} does not match {} logprobs",
                resp.token_count,
                resp.token_logprobs.len()
            )));
        }
        Ok(resp)
    }

    fn generate(&self, req: &GenerateRequest) -> Result<GenerateResponse, GatewayError> {
        self.post("/v1/generate", req, Some(req.max_tokens))
    }
}
