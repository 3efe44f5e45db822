mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use common::{bubble_csv, collection, ManualClock};
use serde_json::Value;
use tower::ServiceExt;

fn app(dir: &std::path::Path, stimuli: Option<&std::path::Path>) -> Router {
    let (_, clock) = ManualClock::new(0);
    pbench_service::router(Arc::new(collection(dir, clock)), stimuli)
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let headers = res.headers().clone();
    let body = to_bytes(res.into_body(), usize::MAX)
        .await
        .unwrap()
        .to_vec();
    (status, headers, body)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn json(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

async fn new_session(app: &Router, exp: &str) -> String {
    let (status, _, body) = send(
        app,
        Request::post(format!("/experiments/{exp}/sessions"))
            .body(Body::empty())
            .unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    json(&body)["sessionId"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn health_and_experiment_spec() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let (status, _, body) = send(&app, get("/healthz")).await;
    assert_eq!(
        (status, body.as_slice()),
        (StatusCode::OK, b"ok".as_slice())
    );

    let (status, _, body) = send(&app, get("/experiments/bubble-demo")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        String::from_utf8(body).unwrap(),
        common::bubble_spec().to_json()
    );

    let (status, _, body) = send(&app, get("/experiments/missing")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(json(&body)["error"].as_str().unwrap().contains("missing"));
}

#[tokio::test]
async fn session_response_shape() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let (_, _, body) = send(
        &app,
        Request::post("/experiments/bubble-demo/sessions")
            .body(Body::empty())
            .unwrap(),
    )
    .await;
    let v = json(&body);
    assert_eq!(v["experimentId"], "bubble-demo");
    assert_eq!(v["assignment"], serde_json::json!([5, 2, 4, 3, 0, 1]));
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/uploads/abc")
        .header(header::ORIGIN, "https://worker.example")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "PUT")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .body(Body::empty())
        .unwrap();
    let (status, headers, _) = send(&app, req).await;
    assert!(status.is_success());
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
    assert!(headers.contains_key(header::ACCESS_CONTROL_ALLOW_METHODS));

    let req = Request::get("/healthz")
        .header(header::ORIGIN, "https://worker.example")
        .body(Body::empty())
        .unwrap();
    let (_, headers, _) = send(&app, req).await;
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}

#[tokio::test]
async fn presign_then_put_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let sid = new_session(&app, "bubble-demo").await;

    let (status, _, body) = send(&app, get(&format!("/sessions/{sid}/presign"))).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(
        v.as_object().unwrap().keys().collect::<Vec<_>>(),
        vec!["uploadURL"]
    );
    let url = v["uploadURL"].as_str().unwrap().to_string();
    assert!(url.starts_with("/uploads/"));

    let csv = bubble_csv(&sid);
    let put = |body: String| {
        Request::put(url.as_str())
            .header(header::CONTENT_TYPE, "text/csv")
            .body(Body::from(body))
            .unwrap()
    };
    let desc = format!("session,imageName,text\n{sid},img0,two boats\n");
    let req = Request::put(format!("{url}?part=descriptions"))
        .body(Body::from(desc.clone()))
        .unwrap();
    assert_eq!(send(&app, req).await.0, StatusCode::OK);

    let (status, _, _) = send(&app, put(csv.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let stored = dir
        .path()
        .join("results/bubble-demo")
        .join(format!("{sid}.csv"));
    assert_eq!(std::fs::read(&stored).unwrap(), csv.as_bytes());
    let stored_desc = dir
        .path()
        .join("results/bubble-demo")
        .join(format!("{sid}.descriptions.csv"));
    assert_eq!(std::fs::read_to_string(stored_desc).unwrap(), desc);

    assert_eq!(send(&app, put(csv.clone())).await.0, StatusCode::CONFLICT);
    assert_eq!(
        send(&app, get(&format!("/sessions/{sid}/presign"))).await.0,
        StatusCode::CONFLICT
    );
}

#[tokio::test]
async fn wrong_header_is_unprocessable_and_not_stored() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let sid = new_session(&app, "bubble-demo").await;
    let (_, _, body) = send(&app, get(&format!("/sessions/{sid}/presign"))).await;
    let url = json(&body)["uploadURL"].as_str().unwrap().to_string();
    let (status, _, body) = send(
        &app,
        Request::put(url)
            .body(Body::from(format!("session,x,y\n{sid},1,2\n")))
            .unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(json(&body)["error"].as_str().unwrap().contains("header"));
    assert!(!dir.path().join("results/bubble-demo").exists());
    assert_eq!(
        send(&app, get("/uploads/0000")).await.0,
        StatusCode::METHOD_NOT_ALLOWED
    );
    assert_eq!(
        send(
            &app,
            Request::put("/uploads/0000").body(Body::from("x")).unwrap()
        )
        .await
        .0,
        StatusCode::NOT_FOUND
    );
}

fn form_encode(pairs: &[(&str, &str)]) -> String {
    let enc = |s: &str| {
        s.bytes()
            .map(|b| match b {
                b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                    (b as char).to_string()
                }
                b' ' => "+".into(),
                _ => format!("%{b:02X}"),
            })
            .collect::<String>()
    };
    pairs
        .iter()
        .map(|(k, v)| format!("{}={}", enc(k), enc(v)))
        .collect::<Vec<_>>()
        .join("&")
}

#[tokio::test]
async fn data_output_form_path() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let sid = new_session(&app, "comp").await;
    let csv = format!("session,x,y\n{sid},120.5,300\n");
    let req = Request::post(format!("/sessions/{sid}/results"))
        .header(header::CONTENT_TYPE, "application/x-www-form-urlencoded")
        .body(Body::from(form_encode(&[("dataOutput", &csv)])))
        .unwrap();
    assert_eq!(send(&app, req).await.0, StatusCode::OK);
    let stored = dir.path().join("results/comp").join(format!("{sid}.csv"));
    assert_eq!(std::fs::read_to_string(stored).unwrap(), csv);
}

#[tokio::test]
async fn uploads_over_five_megabytes_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let sid = new_session(&app, "comp").await;
    let (_, _, body) = send(&app, get(&format!("/sessions/{sid}/presign"))).await;
    let url = json(&body)["uploadURL"].as_str().unwrap().to_string();
    let big = "x".repeat(pbench_service::MAX_UPLOAD_BYTES + 1);
    let (status, _, _) = send(
        &app,
        Request::put(url.as_str()).body(Body::from(big)).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let huge = "x".repeat(4 * pbench_service::MAX_UPLOAD_BYTES);
    let (status, _, _) = send(
        &app,
        Request::put(url.as_str()).body(Body::from(huge)).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert!(!dir.path().join("results/comp").exists());
}

#[tokio::test]
async fn stimuli_are_served() {
    let dir = tempfile::tempdir().unwrap();
    let stim = tempfile::tempdir().unwrap();
    std::fs::write(stim.path().join("img0.png"), b"\x89PNG fake").unwrap();
    let app = app(dir.path(), Some(stim.path()));
    let (status, _, body) = send(&app, get("/stimuli/img0.png")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"\x89PNG fake");
    assert_eq!(
        send(&app, get("/stimuli/none.png")).await.0,
        StatusCode::NOT_FOUND
    );
}
