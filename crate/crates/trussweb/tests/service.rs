mod common;

use std::time::Duration;

use serde_json::{json, Value};
use trussweb::pipeline::{Analysis, AnalysisRequest};
use trussweb::service::{self, Config, Running};
use trussweb::store::JobStore;
use trussweb_core::fixtures;

const LIMIT: Duration = Duration::from_secs(120);

fn serve(dir: &std::path::Path) -> Running {
    let mut c = Config::new("127.0.0.1:0", dir);
    c.workers = 1;
    c.gusset_threads = 1;
    service::start(c).unwrap()
}

#[test]
fn demo_job_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let srv = serve(dir.path());
    let base = srv.url();
    let agent = common::agent();
    let request = common::demo_request(24);

    let (id, rec) = common::run_job(&agent, &base, &request, LIMIT);
    let files = common::artifacts(&agent, &base, &id, &rec);
    for name in ["model.csv", "analysis.txt", "report.txt", "comparison.txt", "comparison.csv", "results.json"] {
        assert!(files.contains_key(name), "{name} missing from {:?}", files.keys());
    }

    let report = String::from_utf8(files["report.txt"].clone()).unwrap();
    for line in common::MEMBER1_LINES {
        assert!(common::member_block(&report, 1).contains(line), "{line}");
    }
    for line in common::MEMBER4_LINES {
        assert!(common::member_block(&report, 4).contains(line), "{line}");
    }
    let bad = common::compare_demo_table(std::str::from_utf8(&files["comparison.csv"]).unwrap());
    assert!(bad.is_empty(), "{bad:?}");

    let results = &rec["results"];
    assert_eq!(results["design"].as_array().unwrap().len(), 11);
    assert!(results["size_opt"]["weight"].as_f64().unwrap() < results["size_opt"]["code_weight"].as_f64().unwrap());

    let images = common::gusset_images(&agent, &base, &id, &rec);
    assert_eq!(images.keys().copied().collect::<Vec<_>>(), (1..=7).collect::<Vec<_>>());
    for img in images.values() {
        assert_eq!((img.width, img.height), (24, 24));
    }
    for (what, v) in common::gusset_symmetry(&images) {
        assert!(v <= 0.02, "{what}: {v}");
    }

    let (id2, rec2) = common::run_job(&agent, &base, &request, LIMIT);
    assert_ne!(id, id2);
    assert_eq!(common::artifacts(&agent, &base, &id2, &rec2), files);
    srv.shutdown();
}

#[test]
fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let srv = serve(dir.path());
    let base = srv.url();
    let agent = common::agent();

    assert_eq!(common::get(&agent, &format!("{base}/api/health")).0, 200);
    assert_eq!(common::get(&agent, &format!("{base}/api/jobs/nope")).0, 404);
    assert_eq!(common::get(&agent, &format!("{base}/api/jobs/../../etc/passwd")).0, 404);
    assert_eq!(common::get(&agent, &format!("{base}/api/nothing")).0, 404);

    let resp = agent
        .post(&format!("{base}/api/jobs"))
        .header("Content-Type", "application/json")
        .send(&b"{\"model\": "[..])
        .unwrap();
    assert_eq!(resp.status().as_u16(), 400);

    let (status, body) = common::post_json(&agent, &format!("{base}/api/jobs"), &json!({ "model": "" }));
    assert_eq!(status, 422, "{body}");
    assert!(!body["violations"].as_array().unwrap().is_empty());

    let mut bad = common::demo_request(24);
    bad["topopt"]["volfrac"] = json!(1.2);
    let (status, body) = common::post_json(&agent, &format!("{base}/api/jobs"), &bad);
    assert_eq!(status, 422);
    assert!(body["violations"].to_string().contains("volfrac"), "{body}");

    let mut bad = common::demo_request(24);
    bad["analyses"] = json!(["size_opt"]);
    assert_eq!(common::post_json(&agent, &format!("{base}/api/jobs"), &bad).0, 422);

    let mut bad = common::demo_request(24);
    bad["extra"] = json!(1);
    assert_eq!(common::post_json(&agent, &format!("{base}/api/jobs"), &bad).0, 400);

    // A static-only job has no report; asking for one is a missing artifact.
    let m = fixtures::pratt_verification();
    let req = serde_json::to_value(AnalysisRequest::new(&m, &[Analysis::Static])).unwrap();
    let (id, rec) = common::run_job(&agent, &base, &req, LIMIT);
    assert!(rec["results"]["results"].is_array());
    assert_eq!(common::get(&agent, &format!("{base}/api/jobs/{id}/report.txt")).0, 404);
    assert_eq!(common::get(&agent, &format!("{base}/api/jobs/{id}/gusset/1.img")).0, 404);
    assert_eq!(common::get(&agent, &format!("{base}/api/jobs/{id}/gusset/x.img")).0, 404);
    srv.shutdown();
}

#[test]
fn advisor_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let srv = serve(dir.path());
    let base = srv.url();
    let agent = common::agent();

    let (status, body) = common::get(&agent, &format!("{base}/api/advisor?span=8"));
    assert_eq!(status, 200);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert!(!v["suggestions"].as_array().unwrap().is_empty(), "{v}");
    for q in ["", "?span=", "?span=abc", "?span=-3"] {
        assert_eq!(common::get(&agent, &format!("{base}/api/advisor{q}")).0, 400, "{q}");
    }
    srv.shutdown();
}

#[test]
fn jobs_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let agent = common::agent();
    let req = AnalysisRequest::new(&fixtures::roof_truss(10.0), &[Analysis::Static, Analysis::Is800Design]);

    let srv = serve(dir.path());
    let (done, rec) = common::run_job(&agent, &srv.url(), &serde_json::to_value(&req).unwrap(), LIMIT);
    let files = common::artifacts(&agent, &srv.url(), &done, &rec);
    srv.shutdown();

    // Queued while no server runs, as if the process died before starting it.
    let pending = JobStore::open(dir.path()).unwrap().create(&req).unwrap();

    let srv = serve(dir.path());
    let base = srv.url();
    let rec2 = common::wait_for(&agent, &base, &pending, LIMIT);
    assert_eq!(rec2["status"], "done");
    assert_eq!(common::artifacts(&agent, &base, &pending, &rec2), files);
    let again = common::wait_for(&agent, &base, &done, LIMIT);
    assert_eq!(common::artifacts(&agent, &base, &done, &again), files);
    srv.shutdown();
}
