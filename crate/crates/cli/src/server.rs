//! Read-only HTTP service over one loaded model.
//!
//! `GET /health`, `GET /model`, `POST /infer` and `POST /whatif`. Every
//! error is answered with `{"error": {"code", "message"}}`.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tracing::{debug, info};

use hb_core::analysis::{whatif, AnalysisError, WhatIfEntry};
use hb_core::inference::{expected_yield, posterior, InferenceError};
use hb_core::learning::{LearnedModel, ModelFile};
use hb_core::model::{EvidenceSet, ModelError};

struct AppState {
    model: LearnedModel,
    file: ModelFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferRequest {
    #[serde(default)]
    pub evidence: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
pub struct InferResponse {
    pub expected_yield: f64,
    /// Posterior of every unobserved variable, the target included.
    pub posteriors: BTreeMap<String, Vec<f64>>,
    pub evidence: EvidenceSet,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub variable: String,
    #[serde(default)]
    pub base_evidence: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
pub struct WhatIfResponse {
    pub variable: String,
    pub base_evidence: EvidenceSet,
    pub entries: Vec<WhatIfEntry>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::UnknownVariable(_) => "unknown_variable",
            ModelError::BinOutOfRange { .. } => "bin_out_of_range",
            ModelError::TargetAsEvidence(_) => "target_as_evidence",
            _ => "invalid_evidence",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<InferenceError> for ApiError {
    fn from(e: InferenceError) -> Self {
        match e {
            InferenceError::Model(m) => m.into(),
            InferenceError::UnknownVariable(_) => ApiError::bad_request("unknown_variable", e.to_string()),
            InferenceError::QueryObserved(_) => ApiError::bad_request("query_observed", e.to_string()),
            InferenceError::ImpossibleEvidence { .. } => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                code: "impossible_evidence",
                message: e.to_string(),
            },
            other => ApiError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                code: "internal",
                message: other.to_string(),
            },
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Inference(i) => i.into(),
            AnalysisError::TargetVariable(_) => ApiError::bad_request("target_variable", e.to_string()),
            AnalysisError::AlreadyObserved(_) => ApiError::bad_request("already_observed", e.to_string()),
            other => ApiError {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                code: "internal",
                message: other.to_string(),
            },
        }
    }
}

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("malformed_request", e.to_string()))
}

pub fn router(model: LearnedModel) -> Router {
    let file = model.to_file();
    let state = Arc::new(AppState { model, file });
    Router::new()
        .route("/health", get(health))
        .route("/model", get(get_model))
        .route("/infer", post(infer))
        .route("/whatif", post(post_whatif))
        .with_state(state)
}

/// Bind and serve until the process receives Ctrl-C.
pub async fn serve(model: LearnedModel, bind: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(model))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn get_model(State(state): State<Arc<AppState>>) -> Json<ModelFile> {
    Json(state.file.clone())
}

/// Expected yield and posteriors for one evidence set.
pub fn infer_response(model: &LearnedModel, req: InferRequest) -> Result<InferResponse, ApiError> {
    let net = &model.net;
    let catalog = net.catalog();
    let evidence = EvidenceSet::for_forecast(catalog, req.evidence)?;
    let forecast = expected_yield(net, &evidence)?;
    let target = &catalog.target().name;
    let mut posteriors = BTreeMap::new();
    for name in catalog.names() {
        if evidence.contains(name) {
            continue;
        }
        let probs = if name == target {
            forecast.posterior.probs.clone()
        } else {
            posterior(net, &evidence, name)?.probs
        };
        posteriors.insert(name.to_string(), probs);
    }
    Ok(InferResponse {
        expected_yield: forecast.expected_yield,
        posteriors,
        evidence,
    })
}

async fn infer(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<InferResponse>, ApiError> {
    let req: InferRequest = if body.iter().all(u8::is_ascii_whitespace) {
        InferRequest::default()
    } else {
        parse_body(&body)?
    };
    debug!(evidence = ?req.evidence, "infer");
    infer_response(&state.model, req).map(Json)
}

async fn post_whatif(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<WhatIfResponse>, ApiError> {
    let req: WhatIfRequest = parse_body(&body)?;
    debug!(variable = %req.variable, "whatif");
    let net = &state.model.net;
    let base = EvidenceSet::for_forecast(net.catalog(), req.base_evidence)?;
    // an impossible base makes every scenario impossible
    expected_yield(net, &base)?;
    let entries = whatif(net, &req.variable, &base)?;
    Ok(Json(WhatIfResponse {
        variable: req.variable,
        base_evidence: base,
        entries,
    }))
}
