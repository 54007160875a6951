//! HTTP recognition service.
//!
//! `POST /api/v1/recognize` takes either a bare trace or
//! `{"trace": <trace>, "debug": bool}`; `?debug=true` also asks for the
//! per-character thinned bitmaps and feature vectors. `GET /api/v1/model`
//! describes the loaded model and `GET /api/v1/health` reports liveness.

use std::fs;
use std::future::Future;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tokio::net::TcpListener;

use esr_core::net::{read_model, ModelFileError, HIDDEN, INPUTS, NEURONS, OUTPUTS, PARAMETERS};
use esr_core::recognizer::{recognize_sentence_detailed, GlyphDebug, SentenceResult};
use esr_core::{MlpModel, SegmentationParams, StrokeTrace};

const BODY_LIMIT: usize = 16 * 1024 * 1024;

/// A model together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: MlpModel,
    /// Hex SHA-256 of the model file bytes.
    pub digest: String,
    pub path: PathBuf,
    /// Contents of the `<model>.train.json` sidecar written by `esr train`, if any.
    pub training: Option<Value>,
}

pub fn sidecar_path(model: &Path) -> PathBuf {
    let mut name = model.as_os_str().to_owned();
    name.push(".train.json");
    PathBuf::from(name)
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl LoadedModel {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelFileError> {
        let path = path.as_ref();
        let bytes = fs::read(path)?;
        let model = read_model(&bytes)?;
        let training = fs::read_to_string(sidecar_path(path))
            .ok()
            .and_then(|text| serde_json::from_str(&text).ok());
        Ok(Self {
            model,
            digest: hex_digest(&bytes),
            path: path.to_path_buf(),
            training,
        })
    }
}

/// Shared service state. Requests clone the current `Arc` and never see a
/// half-replaced model.
#[derive(Debug, Default)]
pub struct AppState {
    model: RwLock<Option<Arc<LoadedModel>>>,
    pub params: SegmentationParams,
}

impl AppState {
    pub fn new(model: Option<LoadedModel>, params: SegmentationParams) -> Self {
        Self {
            model: RwLock::new(model.map(Arc::new)),
            params,
        }
    }

    pub fn current(&self) -> Option<Arc<LoadedModel>> {
        self.model.read().expect("model lock poisoned").clone()
    }

    pub fn replace(&self, model: Option<LoadedModel>) {
        *self.model.write().expect("model lock poisoned") = model.map(Arc::new);
    }

    /// Loads `path` and swaps it in; on failure the old model stays.
    pub fn reload(&self, path: &Path) -> Result<(), ModelFileError> {
        let fresh = LoadedModel::load(path)?;
        self.replace(Some(fresh));
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WrappedRequest {
    trace: StrokeTrace,
    #[serde(default)]
    debug: bool,
}

#[derive(Deserialize)]
struct DebugQuery {
    #[serde(default)]
    debug: bool,
}

#[derive(Serialize)]
struct DebugGlyph<'a> {
    tag: char,
    pbm: String,
    features: &'a [f64],
}

#[derive(Serialize)]
struct DebugResponse<'a> {
    #[serde(flatten)]
    result: &'a SentenceResult,
    debug: Vec<DebugGlyph<'a>>,
}

/// The recognize response body: exactly the library's JSON, plus a `debug`
/// array when asked for.
pub fn response_body(result: &SentenceResult, debug: Option<&[GlyphDebug]>) -> String {
    match debug {
        None => result.to_json(),
        Some(glyphs) => {
            let debug = result
                .words
                .iter()
                .flatten()
                .zip(glyphs)
                .map(|(c, g)| DebugGlyph {
                    tag: c.tag,
                    pbm: g.thinned.to_pbm(),
                    features: g.features.as_slice(),
                })
                .collect();
            serde_json::to_string(&DebugResponse { result, debug }).expect("debug responses always serialize")
        }
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(status: StatusCode, name: &str, message: impl ToString) -> Response {
    let body = json!({ "error": name, "message": message.to_string() });
    json_response(status, body.to_string())
}

/// Accepts a bare trace or a `{"trace", "debug"}` wrapper.
fn parse_request(body: &[u8]) -> Result<(StrokeTrace, bool), serde_json::Error> {
    let value: Value = serde_json::from_slice(body)?;
    if value.get("trace").is_some() {
        let req: WrappedRequest = serde_json::from_value(value)?;
        Ok((req.trace, req.debug))
    } else {
        Ok((serde_json::from_value(value)?, false))
    }
}

async fn recognize(State(state): State<Arc<AppState>>, Query(query): Query<DebugQuery>, body: Bytes) -> Response {
    let (trace, wants_debug) = match parse_request(&body) {
        Ok(parsed) => parsed,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, "SchemaViolation", e),
    };
    let debug = wants_debug || query.debug;
    let Some(loaded) = state.current() else {
        return error_response(StatusCode::SERVICE_UNAVAILABLE, "NoModelLoaded", "no model is loaded");
    };
    match recognize_sentence_detailed(&trace, &loaded.model, &state.params) {
        Ok((result, glyphs)) => json_response(StatusCode::OK, response_body(&result, debug.then_some(&glyphs[..]))),
        Err(e) => error_response(StatusCode::BAD_REQUEST, e.name(), e),
    }
}

/// Model description served by `GET /api/v1/model`.
pub fn model_info(loaded: Option<&LoadedModel>) -> Value {
    match loaded {
        None => json!({ "status": "unloaded" }),
        Some(m) => json!({
            "status": "loaded",
            "dims": { "inputs": INPUTS, "hidden": HIDDEN, "outputs": OUTPUTS },
            "neurons": NEURONS,
            "parameters": PARAMETERS,
            "digest": m.digest,
            "path": m.path.display().to_string(),
            "training": m.training,
        }),
    }
}

async fn model(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, model_info(state.current().as_deref()).to_string())
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let body = json!({ "status": "ok", "model_loaded": state.current().is_some() });
    json_response(StatusCode::OK, body.to_string())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/recognize", post(recognize))
        .route("/api/v1/model", get(model))
        .route("/api/v1/health", get(health))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: Arc<AppState>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
