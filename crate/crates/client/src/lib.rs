//! Async client for the Bayes Cloud registry service.

use bayescloud_core::api::{
    Created, ErrorBody, ErrorClass, InferRequest, InferResponse, MergeBody, MergeResponse, ModelRecord, ModelUpdate,
    NewModel, RecordSummary,
};
use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service returned {status}: {body}")]
    Service { status: u16, body: ErrorBody },
}

impl ClientError {
    pub fn class(&self) -> ErrorClass {
        match self {
            ClientError::Transport(_) => ErrorClass::Internal,
            ClientError::Service { status, .. } => ErrorClass::from_http_status(*status),
        }
    }

    /// The service's error payload, when there was one.
    pub fn body(&self) -> Option<&ErrorBody> {
        match self {
            ClientError::Service { body, .. } => Some(body),
            ClientError::Transport(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://localhost:8080`.
    pub fn new(base: &str) -> Self {
        Client { base: base.trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    async fn send<T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&(impl Serialize + ?Sized)>,
    ) -> Result<T, ClientError> {
        let response = self.raw(method, path, body).await?;
        Ok(response.json().await?)
    }

    async fn raw(
        &self,
        method: Method,
        path: &str,
        body: Option<&(impl Serialize + ?Sized)>,
    ) -> Result<reqwest::Response, ClientError> {
        let mut request = self.http.request(method, format!("{}{path}", self.base));
        if let Some(body) = body {
            request = request.json(body);
        }
        let response = request.send().await?;
        let status = response.status();
        if status.is_success() {
            return Ok(response);
        }
        let text = response.text().await?;
        let body = serde_json::from_str(&text).unwrap_or_else(|_| {
            ErrorBody::new("http_error", format!("{status}: {text}"), serde_json::Value::Null)
        });
        Err(ClientError::Service { status: status.as_u16(), body })
    }

    pub async fn register(&self, model: &NewModel) -> Result<String, ClientError> {
        let created: Created = self.send(Method::POST, "/models", Some(model)).await?;
        Ok(created.id)
    }

    pub async fn search(&self, query: &str) -> Result<Vec<RecordSummary>, ClientError> {
        let response = self
            .http
            .get(format!("{}/models", self.base))
            .query(&[("q", query)])
            .send()
            .await?;
        if response.status() != StatusCode::OK {
            let status = response.status().as_u16();
            let body = response.json().await?;
            return Err(ClientError::Service { status, body });
        }
        Ok(response.json().await?)
    }

    pub async fn get(&self, id: &str) -> Result<ModelRecord, ClientError> {
        self.send(Method::GET, &format!("/models/{id}"), None::<&()>).await
    }

    pub async fn update(&self, id: &str, update: &ModelUpdate) -> Result<ModelRecord, ClientError> {
        self.send(Method::PUT, &format!("/models/{id}"), Some(update)).await
    }

    pub async fn delete(&self, id: &str) -> Result<(), ClientError> {
        self.raw(Method::DELETE, &format!("/models/{id}"), None::<&()>).await?;
        Ok(())
    }

    pub async fn infer(&self, id: &str, request: &InferRequest) -> Result<InferResponse, ClientError> {
        self.send(Method::POST, &format!("/models/{id}/infer"), Some(request)).await
    }

    pub async fn merge(&self, body: &MergeBody) -> Result<MergeResponse, ClientError> {
        self.send(Method::POST, "/merge", Some(body)).await
    }
}
