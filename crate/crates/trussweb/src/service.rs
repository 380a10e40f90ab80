//! HTTP facade over the job store.
//!
//! ```text
//! POST /api/jobs                      AnalysisRequest JSON → 202 {"id", "status"}
//! GET  /api/jobs/{id}                 status record plus the results summary when done
//! GET  /api/jobs/{id}/report.txt      IS 800 design report
//! GET  /api/jobs/{id}/model.csv       submitted model as a model document
//! GET  /api/jobs/{id}/gusset/{n}.img  gusset density raster (binary PGM), also as {n}.pgm
//! GET  /api/jobs/{id}/{artifact}      analysis.txt, comparison.txt, comparison.csv, results.json
//! GET  /api/advisor?span={m}          suggested layouts
//! GET  /api/health
//! ```
//!
//! Errors are JSON objects `{"error": message, "violations": [...]}`.
//! Jobs run on a fixed pool of workers fed by a queue.

use std::io::Read;
use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};
use tiny_http::{Header, Method, Request, Response, Server};

use crate::advisor;
use crate::error::{Error, Result};
use crate::pipeline::{self, AnalysisRequest};
use crate::store::{JobStore, Status};

/// Largest accepted request body, bytes.
pub const MAX_BODY: u64 = 8 << 20;

#[derive(Clone, Debug)]
pub struct Config {
    pub addr: String,
    pub jobs_dir: PathBuf,
    /// Jobs executing at once.
    pub workers: usize,
    /// Gusset plates optimized in parallel within one job.
    pub gusset_threads: usize,
    pub http_threads: usize,
    /// Directory with the browser bundle, served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Config {
    pub fn new(addr: impl Into<String>, jobs_dir: impl Into<PathBuf>) -> Self {
        let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        Config {
            addr: addr.into(),
            jobs_dir: jobs_dir.into(),
            workers: cpus,
            gusset_threads: cpus,
            http_threads: 4,
            static_dir: None,
        }
    }
}

struct Shared {
    store: JobStore,
    queue: Mutex<Sender<String>>,
    static_dir: Option<PathBuf>,
}

pub struct Running {
    pub addr: SocketAddr,
    server: Arc<Server>,
    http: Vec<JoinHandle<()>>,
    workers: Vec<JoinHandle<()>>,
    shared: Arc<Shared>,
}

impl Running {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Blocks until the server stops.
    pub fn join(self) {
        for h in self.http {
            let _ = h.join();
        }
    }

    /// Stops accepting requests; queued jobs stay on disk and resume on the
    /// next start.
    pub fn shutdown(self) {
        for _ in &self.http {
            self.server.unblock();
        }
        for h in self.http {
            let _ = h.join();
        }
        // Dropping the last sender ends the workers once they are idle.
        let (dead, _) = channel();
        *self.shared.queue.lock().unwrap_or_else(|e| e.into_inner()) = dead;
        drop(self.shared);
        for h in self.workers {
            let _ = h.join();
        }
    }
}

pub fn start(config: Config) -> Result<Running> {
    let store = JobStore::open(&config.jobs_dir)?;
    let server = Server::http(&config.addr).map_err(|e| Error::Request(format!("cannot bind {}: {e}", config.addr)))?;
    let addr =
        server.server_addr().to_ip().ok_or_else(|| Error::Request("server is not listening on an IP socket".into()))?;
    let server = Arc::new(server);
    let (tx, rx) = channel::<String>();
    for id in store.unfinished()? {
        let _ = tx.send(id);
    }
    let shared = Arc::new(Shared { store, queue: Mutex::new(tx), static_dir: config.static_dir.clone() });

    let rx = Arc::new(Mutex::new(rx));
    let workers = (0..config.workers.max(1))
        .map(|_| {
            let (rx, shared) = (Arc::clone(&rx), Arc::clone(&shared));
            let threads = config.gusset_threads.max(1);
            std::thread::spawn(move || worker(&rx, &shared, threads))
        })
        .collect();
    let http = (0..config.http_threads.max(1))
        .map(|_| {
            let (server, shared) = (Arc::clone(&server), Arc::clone(&shared));
            std::thread::spawn(move || {
                while let Ok(rq) = server.recv() {
                    handle(&shared, rq);
                }
            })
        })
        .collect();
    Ok(Running { addr, server, http, workers, shared })
}

fn worker(rx: &Mutex<Receiver<String>>, shared: &Shared, threads: usize) {
    loop {
        let next = rx.lock().unwrap_or_else(|e| e.into_inner()).recv();
        let Ok(id) = next else { return };
        execute(&shared.store, &id, threads);
    }
}

/// Runs one stored job to completion, recording success or failure.
pub fn execute(store: &JobStore, id: &str, threads: usize) {
    let result = (|| -> Result<()> {
        let mut rec = store.record(id)?.ok_or_else(|| Error::Request(format!("job {id} vanished")))?;
        rec.status = Status::Running;
        store.set(&rec)?;
        let req = store.request(id)?;
        let outcome = pipeline::run(&req, threads)?;
        store.complete(id, &outcome)
    })();
    if let Err(e) = result {
        let _ = store.fail(id, e.to_string());
    }
}

type Reply = (u16, &'static str, Vec<u8>);

fn json_reply(status: u16, v: &Value) -> Reply {
    (status, "application/json", serde_json::to_vec_pretty(v).unwrap_or_default())
}

fn error_reply(status: u16, message: &str, violations: &[String]) -> Reply {
    json_reply(status, &json!({ "error": message, "violations": violations }))
}

fn handle(shared: &Shared, mut rq: Request) {
    let (status, ctype, body) = route(shared, &mut rq);
    let header = Header::from_bytes(&b"Content-Type"[..], ctype.as_bytes()).expect("static header is valid");
    let resp = Response::from_data(body).with_status_code(status).with_header(header);
    let _ = rq.respond(resp);
}

fn route(shared: &Shared, rq: &mut Request) -> Reply {
    let url = rq.url().to_string();
    let (path, query) = url.split_once('?').unwrap_or((&url, ""));
    let parts: Vec<&str> = path.trim_matches('/').split('/').collect();
    match (rq.method(), parts.as_slice()) {
        (Method::Get, ["api", "health"]) => json_reply(200, &json!({ "status": "ok" })),
        (Method::Post, ["api", "jobs"]) => submit(shared, rq),
        (Method::Get, ["api", "jobs", id]) => job_record(shared, id),
        (Method::Get, ["api", "jobs", id, "gusset", img]) => {
            match img.strip_suffix(".img").or_else(|| img.strip_suffix(".pgm")).map(str::parse::<u32>) {
                Some(Ok(node)) => artifact(shared, id, &pipeline::gusset_file(node)),
                _ => error_reply(404, "no such artifact", &[]),
            }
        }
        (Method::Get, ["api", "jobs", id, name]) => artifact(shared, id, name),
        (Method::Get, ["api", "advisor"]) => advisor_reply(query),
        (Method::Get, _) if !path.starts_with("/api/") => static_file(shared, path),
        _ => error_reply(404, "no such endpoint", &[]),
    }
}

fn submit(shared: &Shared, rq: &mut Request) -> Reply {
    let mut body = Vec::new();
    if rq.as_reader().take(MAX_BODY + 1).read_to_end(&mut body).is_err() {
        return error_reply(400, "could not read request body", &[]);
    }
    if body.len() as u64 > MAX_BODY {
        return error_reply(413, "request body too large", &[]);
    }
    let req: AnalysisRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_reply(400, &format!("malformed request: {e}"), &[]),
    };
    if let Err(v) = req.check() {
        return error_reply(422, "request failed validation", &v);
    }
    let id = match shared.store.create(&req) {
        Ok(id) => id,
        Err(e) => return error_reply(500, &e.to_string(), &[]),
    };
    let sent = shared.queue.lock().unwrap_or_else(|e| e.into_inner()).send(id.clone());
    if sent.is_err() {
        return error_reply(503, "server is shutting down", &[]);
    }
    json_reply(202, &json!({ "id": id, "status": Status::Queued }))
}

fn job_record(shared: &Shared, id: &str) -> Reply {
    match shared.store.record(id) {
        Ok(Some(rec)) => {
            let mut v = serde_json::to_value(&rec).unwrap_or(Value::Null);
            if rec.status == Status::Done {
                if let Ok(Some(bytes)) = shared.store.artifact(id, pipeline::RESULTS_FILE) {
                    v["results"] = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
                }
            }
            json_reply(200, &v)
        }
        Ok(None) => error_reply(404, "no such job", &[]),
        Err(e) => error_reply(500, &e.to_string(), &[]),
    }
}

fn content_type(name: &str) -> &'static str {
    match Path::new(name).extension().and_then(|e| e.to_str()) {
        Some("txt") => "text/plain; charset=utf-8",
        Some("csv") => "text/csv; charset=utf-8",
        Some("json") => "application/json",
        Some("pgm") => "image/x-portable-graymap",
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

fn artifact(shared: &Shared, id: &str, name: &str) -> Reply {
    let rec = match shared.store.record(id) {
        Ok(Some(r)) => r,
        Ok(None) => return error_reply(404, "no such job", &[]),
        Err(e) => return error_reply(500, &e.to_string(), &[]),
    };
    match rec.status {
        Status::Done => {}
        Status::Failed => return error_reply(409, rec.error.as_deref().unwrap_or("job failed"), &[]),
        _ => return json_reply(409, &json!({ "error": "job not finished", "status": rec.status })),
    }
    match shared.store.artifact(id, name) {
        Ok(Some(bytes)) => (200, content_type(name), bytes),
        Ok(None) => error_reply(404, "no such artifact", &[]),
        Err(e) => error_reply(500, &e.to_string(), &[]),
    }
}

fn advisor_reply(query: &str) -> Reply {
    let span =
        query.split('&').filter_map(|kv| kv.split_once('=')).find(|(k, _)| *k == "span").map(|(_, v)| v.parse::<f64>());
    let span = match span {
        Some(Ok(s)) => s,
        _ => return error_reply(400, "query parameter span (m) is required", &[]),
    };
    match advisor::suggest(span) {
        Ok(list) => json_reply(200, &json!({ "span": span, "suggestions": list })),
        Err(e) => error_reply(400, &e.to_string(), &[]),
    }
}

fn static_file(shared: &Shared, path: &str) -> Reply {
    let Some(root) = &shared.static_dir else {
        let text = "trussweb service; see /api/health, /api/jobs, /api/advisor?span=8\n";
        return (200, "text/plain; charset=utf-8", text.as_bytes().to_vec());
    };
    let rel = Path::new(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return error_reply(404, "not found", &[]);
    }
    let mut file = root.join(rel);
    if path == "/" || file.is_dir() {
        file = file.join("index.html");
    }
    match std::fs::read(&file) {
        Ok(b) => (200, content_type(&file.to_string_lossy()), b),
        Err(_) => error_reply(404, "not found", &[]),
    }
}
