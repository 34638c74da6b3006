use std::sync::Arc;

use anthroquest::anthro::{assess, HeightMode, Measurement, Sex};
use anthroquest::geostat::{GridSpec, LatLon};
use anthroquest::platform::{
    http, Child, Chw, Env, LayerKind, Platform, RecordLog, Registry, RejectReason, Role, SyncBatch, SyncOutcome,
};
use anthroquest::Config;
use axum::body::Body;
use axum::http::{Request, StatusCode};
use chrono::{DateTime, NaiveDate, TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const ORIGIN: LatLon = LatLon { lat: 18.45, lon: 73.78 };

fn config() -> Config {
    let mut c = Config::parse("token.w1tok = chw:w1\ntoken.w2tok = chw:w2\ntoken.boss = supervisor\n").unwrap();
    c.grid = GridSpec { origin: ORIGIN, cell_size: 250.0, rows: 4, cols: 4 };
    c
}

fn registry() -> Registry {
    let grid = config().grid;
    let child = |id: &str, sex, chw: &str, cell: usize| Child {
        id: id.into(),
        sex,
        birth_date: NaiveDate::from_ymd_opt(2022, 3, 1).unwrap(),
        home: grid.centroid(cell),
        chw_id: chw.into(),
    };
    let chw = |id: &str, cell| Chw {
        id: id.into(),
        handle: format!("h-{id}"),
        home: grid.centroid(cell),
        team_id: Some("t1".into()),
        opt_out: false,
    };
    Registry::new(
        vec![child("c1", Sex::F, "w1", 0), child("c2", Sex::M, "w1", 5), child("c3", Sex::F, "w2", 10)],
        vec![chw("w1", 0), chw("w2", 10)],
    )
    .unwrap()
}

fn platform() -> Platform {
    Platform::create(RecordLog::in_memory(), registry(), Env::new(config())).unwrap()
}

fn at(day: u32, hour: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, day, hour, 0, 0).unwrap()
}

fn measurement(id: &str, child: &str, chw: &str, ts: DateTime<Utc>, weight: f64) -> Measurement {
    let cell = match child {
        "c1" => 0,
        "c2" => 5,
        _ => 10,
    };
    Measurement {
        id: id.into(),
        child_id: child.into(),
        chw_id: chw.into(),
        timestamp: ts,
        location: config().grid.centroid(cell),
        weight: Some(weight),
        height: Some(86.0),
        height_mode: HeightMode::Standing,
        muac: Some(145.0),
        entry_duration: 90.0,
    }
}

fn batch(id: &str, chw: &str, ms: Vec<Measurement>) -> SyncBatch {
    let client_timestamp = ms.iter().map(|m| m.timestamp).max().unwrap_or(at(1, 0));
    SyncBatch { batch_id: id.into(), chw_id: chw.into(), client_timestamp, measurements: ms }
}

fn w1() -> Role {
    Role::Chw("w1".into())
}

#[test]
fn empty_batch_changes_nothing() {
    let p = platform();
    let before = p.log_bytes().unwrap();
    let r = p.submit_batch(&w1(), &batch("b0", "w1", vec![])).unwrap();
    assert!(r.outcomes.is_empty());
    assert_eq!(p.log_bytes().unwrap(), before);
}

#[test]
fn resubmitted_batch_is_all_duplicate_and_log_unchanged() {
    let p = platform();
    let b = batch(
        "b1",
        "w1",
        vec![measurement("m1", "c1", "w1", at(2, 9), 11.5), measurement("m2", "c2", "w1", at(2, 10), 12.0)],
    );
    let first = p.submit_batch(&w1(), &b).unwrap();
    assert!(first.outcomes.iter().all(SyncOutcome::is_accepted));
    let bytes = p.log_bytes().unwrap();
    let points = p.get_leaderboard(&w1(), DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC);
    for _ in 0..20 {
        let again = p.submit_batch(&w1(), &b).unwrap();
        assert!(again.outcomes.iter().all(|o| matches!(o, SyncOutcome::Duplicate { .. })));
    }
    assert_eq!(p.log_bytes().unwrap(), bytes);
    assert_eq!(p.get_leaderboard(&w1(), DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC), points);
}

#[test]
fn same_id_with_different_payload_is_a_conflict() {
    let p = platform();
    p.submit_batch(&w1(), &batch("b1", "w1", vec![measurement("m1", "c1", "w1", at(2, 9), 11.5)])).unwrap();
    let r = p.submit_batch(&w1(), &batch("b2", "w1", vec![measurement("m1", "c1", "w1", at(2, 9), 11.6)])).unwrap();
    assert!(matches!(&r.outcomes[0], SyncOutcome::Rejected { reason: RejectReason::Conflict, .. }));
}

#[test]
fn one_valid_one_out_of_range() {
    let p = platform();
    let good = measurement("m1", "c1", "w1", at(2, 9), 11.5);
    let bad = measurement("m2", "c2", "w1", at(2, 10), 250.0);
    let r = p.submit_batch(&w1(), &batch("b1", "w1", vec![good.clone(), bad])).unwrap();
    assert_eq!(r.outcomes.len(), 2);

    // hand replay: the first record of a fresh store lands in an uncharted
    // cell on day one of the streak
    let env = p.env();
    let child = registry().child("c1").unwrap().profile();
    let want_z = assess(&good, &child, &env.reference, &env.cutoffs, &env.config.assess);
    let rules = &env.config.reward;
    let want_points = (rules.base_points * rules.uncharted_bonus * rules.streak_multiplier(1)).round() as i64;
    match &r.outcomes[0] {
        SyncOutcome::Accepted { z, points, .. } => {
            assert_eq!(z.as_ref(), Some(&want_z));
            assert_eq!(*points, want_points);
        }
        o => panic!("{o:?}"),
    }
    assert!(matches!(&r.outcomes[1], SyncOutcome::Rejected { reason: RejectReason::Validation(_), .. }));
    assert_eq!(p.with_store(|s| s.len()), 1);
}

#[test]
fn batch_for_someone_else_is_refused() {
    let p = platform();
    let b = batch("b1", "w2", vec![measurement("m1", "c3", "w2", at(2, 9), 11.5)]);
    assert!(p.submit_batch(&w1(), &b).is_err());
    assert_eq!(p.with_store(|s| s.len()), 0);
}

#[test]
fn reopened_log_has_identical_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.log");
    let p = Platform::create_file(&path, registry(), Env::new(config())).unwrap();
    for d in 1..=6 {
        let ms = vec![
            measurement(&format!("a{d}"), "c1", "w1", at(d, 9), 11.0 + 0.1 * d as f64),
            measurement(&format!("b{d}"), "c2", "w1", at(d, 10), 12.0 + 0.1 * d as f64),
        ];
        p.submit_batch(&w1(), &batch(&format!("b{d}"), "w1", ms)).unwrap();
    }
    let all = |p: &Platform| {
        let lb = p.get_leaderboard(&Role::Supervisor, DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC);
        let alerts = p.get_alerts(&Role::Supervisor, &Default::default()).unwrap();
        let eff =
            p.get_efficiency(&Role::Supervisor, None, DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC).unwrap();
        (serde_json::to_value(lb).unwrap(), serde_json::to_value(alerts).unwrap(), serde_json::to_value(eff).unwrap())
    };
    let before = all(&p);
    drop(p);
    let q = Platform::open(&path, Env::new(config())).unwrap();
    assert_eq!(all(&q), before);
}

#[test]
fn empty_store_gives_empty_views() {
    let p = platform();
    p.recompute_layers(at(1, 0)).unwrap();
    assert!(p.get_alerts(&Role::Supervisor, &Default::default()).unwrap().is_empty());
    assert!(p.get_quests(&w1(), None, 5).unwrap().iter().all(|q| q.quest.chw_id == "w1"));
    let lb =
        serde_json::to_value(p.get_leaderboard(&w1(), DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC)).unwrap();
    assert!(lb["individuals"].as_array().is_none_or(|v| v.iter().all(|m| m["points"] == 0)), "{lb}");
    let hs = p.get_hotspots(&w1(), anthroquest::anthro::Indicator::Wfh, LayerKind::Gistar);
    assert!(hs["features"].as_array().unwrap().iter().all(|f| f["properties"]["gi_star"].is_null()));
}

#[test]
fn recompute_is_deterministic() {
    let p = platform();
    let ms: Vec<Measurement> = (1..=9)
        .map(|d| measurement(&format!("m{d}"), ["c1", "c2"][d as usize % 2], "w1", at(d, 9), 11.0 + 0.2 * d as f64))
        .collect();
    p.submit_batch(&w1(), &batch("b", "w1", ms)).unwrap();
    let a = p.recompute_layers(at(20, 0)).unwrap();
    let b = p.recompute_layers(at(20, 0)).unwrap();
    assert_eq!(
        a.geojson(anthroquest::anthro::Indicator::Wfh, LayerKind::Gistar),
        b.geojson(anthroquest::anthro::Indicator::Wfh, LayerKind::Gistar)
    );
    assert_eq!(a.coverage_geojson(), b.coverage_geojson());
    assert_eq!(
        serde_json::to_value(p.get_quests(&w1(), None, 5).unwrap()).unwrap(),
        serde_json::to_value(p.get_quests(&w1(), None, 5).unwrap()).unwrap()
    );
}

async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    token: Option<&str>,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, v)
}

#[tokio::test]
async fn http_roles_and_payloads() {
    let p = Arc::new(platform());
    let app = http::router(p.clone());

    let (s, v) = call(&app, "GET", "/v1/healthz", None, None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["measurements"], 0);

    assert_eq!(call(&app, "GET", "/v1/children", None, None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&app, "GET", "/v1/children", Some("nope"), None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(call(&app, "GET", "/v1/alerts", Some("w1tok"), None).await.0, StatusCode::FORBIDDEN);
    assert_eq!(call(&app, "POST", "/v1/recompute", Some("w1tok"), None).await.0, StatusCode::FORBIDDEN);

    let (s, v) = call(&app, "GET", "/v1/children", Some("w1tok"), None).await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["c1", "c2"]);
    let (_, v) = call(&app, "GET", "/v1/children", Some("boss"), None).await;
    assert_eq!(v.as_array().unwrap().len(), 3);

    let (s, v) = call(&app, "GET", "/v1/alerts", Some("boss"), None).await;
    assert_eq!((s, v), (StatusCode::OK, json!([])));

    let b = batch(
        "b1",
        "w1",
        vec![measurement("m1", "c1", "w1", at(2, 9), 11.5), measurement("m2", "c2", "w1", at(2, 10), 250.0)],
    );
    let body = serde_json::to_value(&b).unwrap();
    assert_eq!(call(&app, "POST", "/v1/sync", Some("w2tok"), Some(body.clone())).await.0, StatusCode::FORBIDDEN);
    let (s, v) = call(&app, "POST", "/v1/sync", Some("w1tok"), Some(body.clone())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["outcomes"][0]["status"], "accepted");
    assert_eq!(v["outcomes"][1]["status"], "rejected");
    assert_eq!(v["outcomes"][1]["reason"]["kind"], "validation");
    let bytes = p.log_bytes().unwrap();
    let (_, v) = call(&app, "POST", "/v1/sync", Some("w1tok"), Some(body)).await;
    assert_eq!(v["outcomes"][0]["status"], "duplicate");
    assert_eq!(p.log_bytes().unwrap(), bytes);

    // payloads equal the direct calls, serialised
    let (s, v) = call(&app, "POST", "/v1/recompute?at=2024-05-20T00:00:00Z", Some("boss"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["generated_at"], "2024-05-20T00:00:00Z");
    let (_, v) = call(&app, "GET", "/v1/hotspots?indicator=WFH&layer=density", Some("w1tok"), None).await;
    assert_eq!(v, p.get_hotspots(&w1(), anthroquest::anthro::Indicator::Wfh, LayerKind::Density));
    let (_, v) = call(&app, "GET", "/v1/coverage", Some("w1tok"), None).await;
    assert_eq!(v, p.get_coverage(&w1()));
    let (_, v) = call(&app, "GET", "/v1/quests", Some("w1tok"), None).await;
    assert_eq!(v, serde_json::to_value(p.get_quests(&w1(), None, p.env().config.max_quests).unwrap()).unwrap());
    let (_, v) = call(&app, "GET", "/v1/leaderboard", Some("w1tok"), None).await;
    assert_eq!(
        v,
        serde_json::to_value(p.get_leaderboard(&w1(), DateTime::<Utc>::MIN_UTC, DateTime::<Utc>::MAX_UTC)).unwrap()
    );
    let (_, v) = call(&app, "GET", "/v1/efficiency?chw_id=w1", Some("w1tok"), None).await;
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(call(&app, "GET", "/v1/efficiency?chw_id=w2", Some("w1tok"), None).await.0, StatusCode::FORBIDDEN);
    assert_eq!(call(&app, "GET", "/v1/hotspots?indicator=XYZ", Some("w1tok"), None).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(call(&app, "POST", "/v1/quests/nope/accept", Some("w1tok"), None).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn http_zscore_preview_matches_assess() {
    let p = Arc::new(platform());
    let app = http::router(p.clone());
    let m = measurement("draft", "c1", "w1", at(3, 9), 11.5);
    let (s, v) = call(&app, "POST", "/v1/zscore", Some("w1tok"), Some(serde_json::to_value(&m).unwrap())).await;
    assert_eq!(s, StatusCode::OK);
    let env = p.env();
    let want = assess(&m, &registry().child("c1").unwrap().profile(), &env.reference, &env.cutoffs, &env.config.assess);
    assert_eq!(v, serde_json::to_value(want).unwrap());
    assert_eq!(p.with_store(|s| s.len()), 0);

    let other = measurement("draft", "c3", "w1", at(3, 9), 11.5);
    let (s, _) = call(&app, "POST", "/v1/zscore", Some("w1tok"), Some(serde_json::to_value(&other).unwrap())).await;
    assert_eq!(s, StatusCode::FORBIDDEN);
    let bad = measurement("draft", "c1", "w1", at(3, 9), 250.0);
    let (s, _) = call(&app, "POST", "/v1/zscore", Some("w1tok"), Some(serde_json::to_value(&bad).unwrap())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}
