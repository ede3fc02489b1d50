use std::path::Path;
use std::process::Command;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use dcm_core::io::fixtures;
use dcm_gateway::http::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn dcm(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dcm")).current_dir(dir).args(args).output().unwrap()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("session.json"), fixtures::REFERENCE_SESSION).unwrap();
    std::fs::write(dir.path().join("fleet.csv"), fixtures::SAMPLE_FLEET_RAW).unwrap();
    std::fs::write(dir.path().join("perf.csv"), fixtures::SAMPLE_FLEET_PERFORMANCE).unwrap();
    std::fs::write(dir.path().join("lists.json"), fixtures::SAMPLE_LISTS).unwrap();
    std::fs::write(dir.path().join("baseline.csv"), fixtures::SAMPLE_BASELINE).unwrap();
    dir
}

async fn http_post(body: Value, action: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(dir.path().to_path_buf()));
    let send = |method: Method, uri: String, body: Value| {
        let app = app.clone();
        async move {
            let req = Request::builder()
                .method(method)
                .uri(uri)
                .header("content-type", "application/json")
                .body(Body::from(body.to_string()))
                .unwrap();
            let resp = app.oneshot(req).await.unwrap();
            let status = resp.status();
            let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
            (status, serde_json::from_slice::<Value>(&bytes).unwrap())
        }
    };
    let (status, created) =
        send(Method::POST, "/sessions".into(), json!({"document": serde_json::from_str::<Value>(fixtures::REFERENCE_SESSION).unwrap()})).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let (status, out) = send(Method::POST, format!("/sessions/{id}/{action}"), body).await;
    assert_eq!(status, StatusCode::OK, "{out}");
    out["output"].clone()
}

#[tokio::test]
async fn classify_files_match_http_output_byte_for_byte() {
    let dir = workspace();
    let out = dcm(dir.path(), &["classify", "--fleet", "fleet.csv", "--lists", "lists.json", "--session", "session.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "C1 2\nC2 7\nC3 1\n");
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let json_file = std::fs::read_to_string(dir.path().join("results.json")).unwrap();

    let http = http_post(json!({"fleet": fixtures::SAMPLE_FLEET_RAW, "lists": fixtures::SAMPLE_LISTS}), "classify").await;
    assert_eq!(http["results_csv"].as_str().unwrap(), csv);
    assert_eq!(http["results_json"].as_str().unwrap(), json_file);
}

#[tokio::test]
async fn sweep_files_match_http_output_byte_for_byte() {
    let dir = workspace();
    let out = dcm(
        dir.path(),
        &["sweep", "--fleet", "perf.csv", "--session", "session.json", "--baseline", "baseline.csv", "--ship", "a6"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let counts = std::fs::read_to_string(dir.path().join("sweep-counts.csv")).unwrap();
    let ship = std::fs::read_to_string(dir.path().join("sweep-a6.csv")).unwrap();
    let json_file = std::fs::read_to_string(dir.path().join("sweep.json")).unwrap();

    let http = http_post(
        json!({"fleet": fixtures::SAMPLE_FLEET_PERFORMANCE, "baseline": fixtures::SAMPLE_BASELINE, "ship": "a6"}),
        "sweep",
    )
    .await;
    assert_eq!(http["counts_csv"].as_str().unwrap(), counts);
    assert_eq!(http["ship_csv"].as_str().unwrap(), ship);
    assert_eq!(http["sweep_json"].as_str().unwrap(), json_file);
}

#[test]
fn sequential_flag_gives_identical_files() {
    let dir = workspace();
    assert!(dcm(dir.path(), &["classify", "--fleet", "perf.csv", "--session", "session.json", "--out", "par"]).status.success());
    assert!(dcm(dir.path(), &["--sequential", "classify", "--fleet", "perf.csv", "--session", "session.json", "--out", "seq"])
        .status
        .success());
    for ext in ["csv", "json"] {
        let a = std::fs::read(dir.path().join(format!("par.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("seq.{ext}"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn hybrid_cutoff_moves_two_ships_to_c1() {
    let dir = workspace();
    let out = dcm(dir.path(), &["classify", "--fleet", "perf.csv", "--session", "session.json", "--lambda12", "70"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "C1 4\nC2 5\nC3 1\n");
}

#[test]
fn failures_exit_nonzero_and_leave_no_partial_files() {
    let dir = workspace();
    let out = dcm(dir.path(), &["classify", "--fleet", "perf.csv", "--session", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("results.csv").exists());
    assert!(!dir.path().join("results.json").exists());

    std::fs::write(dir.path().join("bad.csv"), "ship,g1,g2\na1,high,seven\n").unwrap();
    let out = dcm(dir.path(), &["classify", "--fleet", "bad.csv", "--session", "session.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("results") || n.ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn reproduce_and_session_commands() {
    let dir = workspace();
    let out = dcm(dir.path(), &["reproduce-paper"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = dcm(dir.path(), &["session", "validate", "session.json"]);
    assert!(out.status.success());

    let mut doc: Value = serde_json::from_str(fixtures::REFERENCE_SESSION).unwrap();
    doc["weighting"]["closeness"]["cards_to_reference"]["g8"] = json!(8);
    std::fs::write(dir.path().join("tampered.json"), serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = dcm(dir.path(), &["session", "validate", "tampered.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("g8"));
}
