//! JSON-over-HTTP front end. Every route except `/v1/healthz` needs
//! `Authorization: Bearer <token>`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::json;

use super::{AlertFilter, LayerKind, Platform, PlatformError, Role, SyncBatch};
use crate::anthro::{Indicator, Measurement};
use crate::integrity::{AlertKind, AlertSeverity};

impl IntoResponse for PlatformError {
    fn into_response(self) -> Response {
        let status = match &self {
            PlatformError::Unauthorized => StatusCode::UNAUTHORIZED,
            PlatformError::Forbidden(_) => StatusCode::FORBIDDEN,
            PlatformError::NotFound(_) => StatusCode::NOT_FOUND,
            PlatformError::BadRequest(_) | PlatformError::Invalid(_) => StatusCode::BAD_REQUEST,
            PlatformError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = Arc<Platform>;

fn role(p: &Platform, headers: &HeaderMap) -> Result<Role, PlatformError> {
    let token = headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or(PlatformError::Unauthorized)?;
    p.authenticate(token.trim())
}

fn parse<T: std::str::FromStr>(what: &str, v: Option<&str>) -> Result<Option<T>, PlatformError> {
    v.map(|s| s.parse().map_err(|_| PlatformError::BadRequest(format!("bad {what}: {s:?}")))).transpose()
}

#[derive(Debug, Deserialize)]
struct QuestQuery {
    chw_id: Option<String>,
    max: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct PeriodQuery {
    chw_id: Option<String>,
    from: Option<String>,
    to: Option<String>,
}

impl PeriodQuery {
    fn period(&self) -> Result<(DateTime<Utc>, DateTime<Utc>), PlatformError> {
        let from = parse("from", self.from.as_deref())?.unwrap_or(DateTime::<Utc>::MIN_UTC);
        let to = parse("to", self.to.as_deref())?.unwrap_or(DateTime::<Utc>::MAX_UTC);
        Ok((from, to))
    }
}

#[derive(Debug, Deserialize)]
struct HotspotQuery {
    indicator: Option<String>,
    layer: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AlertQuery {
    chw_id: Option<String>,
    kind: Option<String>,
    severity: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AtQuery {
    at: Option<String>,
}

async fn sync(State(p): State<Shared>, headers: HeaderMap, Json(batch): Json<SyncBatch>) -> Response {
    let r = role(&p, &headers).and_then(|r| p.submit_batch(&r, &batch));
    match r {
        Ok(resp) => Json(resp).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn quests(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<QuestQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let max = q.max.unwrap_or(p.env().config.max_quests);
    Ok(Json(p.get_quests(&r, q.chw_id.as_deref(), max)?).into_response())
}

async fn accept_quest(
    State(p): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Query(q): Query<AtQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let at = parse("at", q.at.as_deref())?.unwrap_or_else(Utc::now);
    Ok(Json(p.accept_quest(&r, &id, at)?).into_response())
}

async fn leaderboard(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<PeriodQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let (from, to) = q.period()?;
    Ok(Json(p.get_leaderboard(&r, from, to)).into_response())
}

async fn hotspots(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<HotspotQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let ind: Indicator = parse("indicator", q.indicator.as_deref())?.unwrap_or(Indicator::Wfh);
    let kind: LayerKind = parse("layer", q.layer.as_deref())?.unwrap_or(LayerKind::Gistar);
    Ok(Json(p.get_hotspots(&r, ind, kind)).into_response())
}

async fn coverage(State(p): State<Shared>, headers: HeaderMap) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    Ok(Json(p.get_coverage(&r)).into_response())
}

fn parse_kind(s: &str) -> Result<AlertKind, PlatformError> {
    serde_json::from_value(json!(s)).map_err(|_| PlatformError::BadRequest(format!("bad kind: {s:?}")))
}

fn parse_severity(s: &str) -> Result<AlertSeverity, PlatformError> {
    serde_json::from_value(json!(s)).map_err(|_| PlatformError::BadRequest(format!("bad severity: {s:?}")))
}

async fn alerts(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<AlertQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let filter = AlertFilter {
        chw_id: q.chw_id,
        kind: q.kind.as_deref().map(parse_kind).transpose()?,
        min_severity: q.severity.as_deref().map(parse_severity).transpose()?,
    };
    Ok(Json(p.get_alerts(&r, &filter)?).into_response())
}

async fn efficiency(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<PeriodQuery>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    let (from, to) = q.period()?;
    Ok(Json(p.get_efficiency(&r, q.chw_id.as_deref(), from, to)?).into_response())
}

async fn children(State(p): State<Shared>, headers: HeaderMap) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    Ok(Json(p.get_children(&r)).into_response())
}

async fn recompute(
    State(p): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<AtQuery>,
) -> Result<Response, PlatformError> {
    if role(&p, &headers)? != Role::Supervisor {
        return Err(PlatformError::Forbidden("recompute needs the supervisor role".into()));
    }
    let at = parse("at", q.at.as_deref())?.unwrap_or_else(Utc::now);
    let layers = p.recompute_layers(at)?;
    Ok(Json(json!({ "generated_at": layers.generated_at })).into_response())
}

async fn zscore(
    State(p): State<Shared>,
    headers: HeaderMap,
    Json(m): Json<Measurement>,
) -> Result<Response, PlatformError> {
    let r = role(&p, &headers)?;
    Ok(Json(p.preview(&r, &m)?).into_response())
}

async fn healthz(State(p): State<Shared>) -> Response {
    Json(p.health()).into_response()
}

pub fn router(platform: Arc<Platform>) -> Router {
    Router::new()
        .route("/v1/sync", post(sync))
        .route("/v1/quests", get(quests))
        .route("/v1/quests/{id}/accept", post(accept_quest))
        .route("/v1/leaderboard", get(leaderboard))
        .route("/v1/hotspots", get(hotspots))
        .route("/v1/coverage", get(coverage))
        .route("/v1/alerts", get(alerts))
        .route("/v1/efficiency", get(efficiency))
        .route("/v1/children", get(children))
        .route("/v1/zscore", post(zscore))
        .route("/v1/recompute", post(recompute))
        .route("/v1/healthz", get(healthz))
        .with_state(platform)
}

/// Serves until ctrl-c, recomputing layers every `refresh`.
pub async fn serve(
    platform: Arc<Platform>,
    addr: std::net::SocketAddr,
    refresh: std::time::Duration,
) -> std::io::Result<()> {
    platform.recompute_layers(Utc::now()).map_err(std::io::Error::other)?;
    let bg = platform.clone();
    let ticker = tokio::spawn(async move {
        let mut every = tokio::time::interval(refresh);
        every.tick().await;
        loop {
            every.tick().await;
            let p = bg.clone();
            let _ = tokio::task::spawn_blocking(move || p.recompute_layers(Utc::now())).await;
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let result = axum::serve(listener, router(platform))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await;
    ticker.abort();
    result
}
