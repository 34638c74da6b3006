//! The JSON API driven in-process: a CHW syncs, a supervisor reads alerts
//! and the hotspot layer.

use std::sync::Arc;

use anthroquest::platform::{http, sync_batches, Env, Platform, RecordLog};
use anthroquest::simkit::{generate_population, simulate_measurements, FraudPlan, SimConfig};
use anthroquest::Config;
use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    token: &str,
    body: Option<String>,
) -> (u16, serde_json::Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("authorization", format!("Bearer {token}"))
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status().as_u16();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or_default())
}

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let cfg = SimConfig {
        n_children: 200,
        n_chws: 3,
        fraud: FraudPlan { duplicate_groups: 1, ..FraudPlan::default() },
        ..SimConfig::default()
    };
    let pop = generate_population(&cfg);
    let sim = simulate_measurements(&cfg, &pop, 45);
    let mut config = Config::parse("token.field = chw:w001\ntoken.office = supervisor\n").unwrap();
    config.grid = cfg.grid;
    let platform = Arc::new(Platform::create(RecordLog::in_memory(), pop.registry.clone(), Env::new(config)).unwrap());
    let app = http::router(platform.clone());

    let mine: Vec<_> = sync_batches(&sim.measurements).into_iter().filter(|b| b.chw_id == "w001").collect();
    let mut outcomes = 0;
    for b in &mine {
        let (status, resp) = call(&app, "POST", "/v1/sync", "field", Some(serde_json::to_string(b).unwrap())).await;
        assert_eq!(status, 200);
        outcomes += resp["outcomes"].as_array().map_or(0, Vec::len);
    }
    println!("POST /v1/sync x{} -> {outcomes} outcomes", mine.len());
    let (_, resp) = call(&app, "POST", "/v1/sync", "field", Some(serde_json::to_string(&mine[0]).unwrap())).await;
    println!("resent first batch -> {}", resp["outcomes"][0]);
    let (status, _) = call(&app, "GET", "/v1/alerts", "field", None).await;
    println!("GET /v1/alerts as a CHW -> {status}");
    let (_, alerts) = call(&app, "GET", "/v1/alerts", "office", None).await;
    println!("GET /v1/alerts as supervisor -> {} alerts", alerts.as_array().map_or(0, Vec::len));
    call(&app, "POST", "/v1/recompute?at=2024-02-15T00:00:00Z", "office", None).await;
    let (_, layer) = call(&app, "GET", "/v1/hotspots?indicator=WFH&layer=gistar", "field", None).await;
    println!("GET /v1/hotspots -> {} cells", layer["features"].as_array().map_or(0, Vec::len));
    let (_, health) = call(&app, "GET", "/v1/healthz", "", None).await;
    println!("GET /v1/healthz -> {health}");
}
