use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use rfbroker_core::catalog::{ingest_catalog, CatalogDocument};
use rfbroker_core::pipeline::{select, SelectionReport};
use rfbroker_core::sla::{Actor, Response, SlaTerm, ViolationSubmission};
use rfbroker_core::{SelectionRequest, SnapshotId};

use crate::error::ApiError;
use crate::state::AppState;

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/catalog", put(put_catalog).get(get_catalog))
        .route("/v1/catalog/{snapshot}", get(get_snapshot))
        .route("/v1/selections", post(post_selection))
        .route("/v1/selections/{id}", get(get_selection))
        .route("/v1/slas", post(post_sla))
        .route("/v1/slas/{id}", get(get_sla))
        .route("/v1/slas/{id}/respond", post(respond_sla))
        .route("/v1/slas/{id}/expire", post(expire_sla))
        .route("/v1/slas/{id}/violations", post(post_violation))
        .route("/v1/monitors", post(post_monitor))
        .with_state(state)
}

fn bearer(headers: &HeaderMap) -> Option<&str> {
    headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

fn constant_time_eq(a: &str, b: &str) -> bool {
    a.len() == b.len()
        && a.bytes()
            .zip(b.bytes())
            .fold(0u8, |acc, (x, y)| acc | (x ^ y))
            == 0
}

fn require(headers: &HeaderMap, token: &str) -> ApiResult<()> {
    match bearer(headers) {
        Some(given) if constant_time_eq(given, token) => Ok(()),
        _ => Err(ApiError::unauthorized()),
    }
}

fn parse<T: DeserializeOwned>(body: &str) -> ApiResult<T> {
    serde_json::from_str(body).map_err(ApiError::bad_body)
}

fn no_catalog() -> ApiError {
    ApiError::new(
        StatusCode::CONFLICT,
        "no_catalog",
        "no catalog has been uploaded yet",
    )
}

async fn healthz() -> impl IntoResponse {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CatalogResponse {
    pub snapshot_id: SnapshotId,
    pub catalog: CatalogDocument,
}

async fn put_catalog(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<Json<CatalogResponse>> {
    require(&headers, &state.config.user_token)?;
    let catalog = ingest_catalog(&body)?;
    let catalog_doc = catalog.to_document();
    let snapshot_id = state.replace_catalog(catalog)?;
    log::info!(
        "catalog snapshot {snapshot_id} stored ({} providers)",
        catalog_doc.providers.len()
    );
    Ok(Json(CatalogResponse {
        snapshot_id,
        catalog: catalog_doc,
    }))
}

async fn get_catalog(
    State(state): State<Shared>,
    headers: HeaderMap,
) -> ApiResult<Json<CatalogResponse>> {
    require(&headers, &state.config.user_token)?;
    let (snapshot_id, catalog) = state
        .current_catalog()
        .ok_or_else(|| ApiError::not_found("no catalog has been uploaded yet"))?;
    Ok(Json(CatalogResponse {
        snapshot_id,
        catalog: catalog.to_document(),
    }))
}

async fn get_snapshot(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(snapshot): Path<String>,
) -> ApiResult<Json<CatalogResponse>> {
    require(&headers, &state.config.user_token)?;
    let snapshot_id: SnapshotId = snapshot
        .parse()
        .map_err(|_| ApiError::not_found(format!("snapshot {snapshot} not found")))?;
    let catalog = state.store.load(snapshot_id)?;
    Ok(Json(CatalogResponse {
        snapshot_id,
        catalog: catalog.to_document(),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectionResponse {
    pub request_id: String,
    pub snapshot_id: SnapshotId,
    pub created_at: DateTime<Utc>,
    pub report: SelectionReport,
}

async fn post_selection(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<Json<SelectionResponse>> {
    require(&headers, &state.config.user_token)?;
    let request: SelectionRequest = parse(&body)?;
    let (snapshot_id, catalog) = state.current_catalog().ok_or_else(no_catalog)?;
    let report = select(&catalog, &request, state.config.weight_tolerance)?;
    let record = state
        .selections
        .append(snapshot_id, request, report)
        .map_err(|e| ApiError::internal(format!("cannot persist selection: {e}")))?;
    Ok(Json(SelectionResponse {
        request_id: record.request_id,
        snapshot_id: record.snapshot_id,
        created_at: record.created_at,
        report: record.report,
    }))
}

async fn get_selection(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.user_token)?;
    let record = state
        .selections
        .get(&id)
        .ok_or_else(|| ApiError::not_found(format!("selection {id} not found")))?;
    Ok(Json(record))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProposeBody {
    user_id: String,
    provider_id: String,
    terms: Vec<SlaTerm>,
    #[serde(default = "default_author")]
    author: Actor,
}

fn default_author() -> Actor {
    Actor::User
}

async fn post_sla(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.user_token)?;
    let body: ProposeBody = parse(&body)?;
    let (_, catalog) = state.current_catalog().ok_or_else(no_catalog)?;
    let draft = state.sla.propose(
        &catalog,
        &body.user_id,
        &body.provider_id,
        body.author,
        body.terms,
    )?;
    Ok((StatusCode::CREATED, Json(draft)))
}

async fn get_sla(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.user_token)?;
    let draft = state.sla.get(&id)?;
    let violations = state.sla.violations_for(&id);
    Ok(Json(json!({ "sla": draft, "violations": violations })))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ActionName {
    Accept,
    Reject,
    Counter,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RespondBody {
    actor: Actor,
    action: ActionName,
    #[serde(default)]
    terms: Option<Vec<SlaTerm>>,
}

async fn respond_sla(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.user_token)?;
    let body: RespondBody = parse(&body)?;
    let response = match (body.action, body.terms) {
        (ActionName::Accept, None) => Response::Accept,
        (ActionName::Reject, None) => Response::Reject,
        (ActionName::Counter, Some(terms)) => Response::Counter(terms),
        (ActionName::Counter, None) => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "empty_terms",
                "a counter offer needs terms",
            ))
        }
        (_, Some(_)) => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "schema_error",
                "terms are only accepted with a counter offer",
            ))
        }
    };
    let (_, catalog) = state.current_catalog().ok_or_else(no_catalog)?;
    let draft = state
        .sla
        .respond(catalog.registry(), &id, body.actor, response)?;
    Ok(Json(draft))
}

async fn expire_sla(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.user_token)?;
    Ok(Json(state.sla.expire(&id)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViolationBody {
    #[serde(default)]
    sla_id: Option<String>,
    monitor_id: String,
    attribute: String,
    observed: f64,
    bound: f64,
    observed_at: DateTime<Utc>,
}

async fn post_violation(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: String,
) -> ApiResult<impl IntoResponse> {
    let body: ViolationBody = parse(&body)?;
    // monitors authenticate with the token they registered
    let monitor = state
        .sla
        .monitor(&body.monitor_id)
        .ok_or_else(ApiError::unauthorized)?;
    match bearer(&headers) {
        Some(token) if monitor.token_matches(token) => {}
        _ => return Err(ApiError::unauthorized()),
    }
    if body.sla_id.as_ref().is_some_and(|s| *s != id) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "schema_error",
            "sla_id in body does not match the path",
        ));
    }
    let ack = state.sla.submit_violation(ViolationSubmission {
        sla_id: id,
        monitor_id: body.monitor_id,
        attribute: body.attribute,
        observed: body.observed,
        bound: body.bound,
        observed_at: body.observed_at,
    })?;
    Ok((StatusCode::CREATED, Json(ack)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonitorBody {
    monitor_id: String,
    endpoint: String,
    token: String,
}

async fn post_monitor(
    State(state): State<Shared>,
    headers: HeaderMap,
    body: String,
) -> ApiResult<impl IntoResponse> {
    require(&headers, &state.config.monitor_token)?;
    let body: MonitorBody = parse(&body)?;
    if body.monitor_id.trim().is_empty() || body.token.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "validation_error",
            "monitor_id and token must be non-empty",
        ));
    }
    let reg = state
        .sla
        .register_monitor(&body.monitor_id, &body.endpoint, &body.token)?;
    Ok((StatusCode::CREATED, Json(reg)))
}
