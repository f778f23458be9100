//! Async client for the relay experiment service.

use relay_core::experiment::{ErrorBody, RunRequest};
use relay_core::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service rejected or failed the request.
    #[error("{}", .0.message)]
    Service(ErrorBody),
    #[error("transport error: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response (status {status}): {body}")]
    Protocol { status: u16, body: String },
}

impl ClientError {
    /// Service-side class, if the service produced one.
    pub fn kind(&self) -> Option<ErrorKind> {
        match self {
            ClientError::Service(b) => Some(b.kind),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Self { base: base.into().trim_end_matches('/').to_owned(), http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn text(&self, resp: reqwest::Response) -> Result<String> {
        let status = resp.status();
        let body = resp.text().await?;
        if status.is_success() {
            return Ok(body);
        }
        match serde_json::from_str::<ErrorBody>(&body) {
            Ok(b) => Err(ClientError::Service(b)),
            Err(_) => Err(ClientError::Protocol { status: status.as_u16(), body }),
        }
    }

    pub async fn health(&self) -> Result<()> {
        let resp = self.http.get(format!("{}/health", self.base)).send().await?;
        self.text(resp).await.map(|_| ())
    }

    pub async fn presets(&self) -> Result<Vec<String>> {
        let resp = self.http.get(format!("{}/v1/presets", self.base)).send().await?;
        let body = self.text(resp).await?;
        serde_json::from_str(&body).map_err(|e| ClientError::Protocol { status: 200, body: e.to_string() })
    }

    pub async fn preset_source(&self, name: &str) -> Result<String> {
        let resp = self.http.get(format!("{}/v1/presets/{name}", self.base)).send().await?;
        self.text(resp).await
    }

    /// Runs an experiment and returns the rendered table (CSV or JSON, as requested).
    pub async fn run(&self, req: &RunRequest) -> Result<String> {
        let body = serde_json::to_vec(req).map_err(|e| ClientError::Protocol { status: 0, body: e.to_string() })?;
        let resp = self
            .http
            .post(format!("{}/v1/run", self.base))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body)
            .send()
            .await?;
        self.text(resp).await
    }
}
