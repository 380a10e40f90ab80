//! Filesystem job store: one directory per job holding the request, a
//! status record and the artifacts. Every write goes to a temporary file
//! that is then renamed into place.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{AnalysisRequest, Outcome};

pub const REQUEST_FILE: &str = "request.json";
pub const STATUS_FILE: &str = "status.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Artifact names, present once done.
    #[serde(default)]
    pub artifacts: Vec<String>,
}

pub struct JobStore {
    root: PathBuf,
    counter: AtomicU64,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_hexdigit() || b == b'-')
}

/// Rejects names that could leave the job directory.
fn valid_artifact(name: &str) -> bool {
    !name.is_empty()
        && name.split('/').all(|p| !p.is_empty() && p != "." && p != ".." && !p.starts_with('.'))
        && name.bytes().all(|b| b.is_ascii_alphanumeric() || b"-_./".contains(&b))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::Request("artifact path has no parent".into()))?;
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl JobStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(JobStore { root, counter: AtomicU64::new(0) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Option<PathBuf> {
        valid_id(id).then(|| self.root.join(id))
    }

    /// Persists a new queued job and returns its id.
    pub fn create(&self, request: &AnalysisRequest) -> Result<String> {
        loop {
            let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
            let n = self.counter.fetch_add(1, Ordering::Relaxed);
            let id = format!("{:016x}-{:04x}-{:04x}", nanos as u64, std::process::id() & 0xffff, n & 0xffff);
            let dir = self.root.join(&id);
            match fs::create_dir(&dir) {
                Ok(()) => {
                    write_atomic(&dir.join(REQUEST_FILE), &serde_json::to_vec_pretty(request)?)?;
                    self.set(&JobRecord { id: id.clone(), status: Status::Queued, error: None, artifacts: vec![] })?;
                    return Ok(id);
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn set(&self, record: &JobRecord) -> Result<()> {
        let dir = self.dir(&record.id).ok_or_else(|| Error::Request("bad job id".into()))?;
        write_atomic(&dir.join(STATUS_FILE), &serde_json::to_vec_pretty(record)?)
    }

    pub fn record(&self, id: &str) -> Result<Option<JobRecord>> {
        let Some(dir) = self.dir(id) else { return Ok(None) };
        match fs::read(dir.join(STATUS_FILE)) {
            Ok(b) => Ok(Some(serde_json::from_slice(&b)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn request(&self, id: &str) -> Result<AnalysisRequest> {
        let dir = self.dir(id).ok_or_else(|| Error::Request("bad job id".into()))?;
        Ok(serde_json::from_slice(&fs::read(dir.join(REQUEST_FILE))?)?)
    }

    /// Writes every artifact, then flips the status to done.
    pub fn complete(&self, id: &str, outcome: &Outcome) -> Result<()> {
        let dir = self.dir(id).ok_or_else(|| Error::Request("bad job id".into()))?;
        for (name, bytes) in &outcome.files {
            if !valid_artifact(name) {
                return Err(Error::Request(format!("refusing artifact name {name:?}")));
            }
            write_atomic(&dir.join("artifacts").join(name), bytes)?;
        }
        self.set(&JobRecord {
            id: id.into(),
            status: Status::Done,
            error: None,
            artifacts: outcome.files.keys().cloned().collect(),
        })
    }

    pub fn fail(&self, id: &str, message: String) -> Result<()> {
        self.set(&JobRecord { id: id.into(), status: Status::Failed, error: Some(message), artifacts: vec![] })
    }

    pub fn artifact(&self, id: &str, name: &str) -> Result<Option<Vec<u8>>> {
        let Some(dir) = self.dir(id) else { return Ok(None) };
        if !valid_artifact(name) {
            return Ok(None);
        }
        match fs::read(dir.join("artifacts").join(name)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Jobs left queued or running by a previous process, oldest id first.
    pub fn unfinished(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let name = entry?.file_name();
            let Some(id) = name.to_str() else { continue };
            if let Ok(Some(r)) = self.record(id) {
                if matches!(r.status, Status::Queued | Status::Running) {
                    ids.push(r.id);
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Analysis;
    use trussweb_core::fixtures;

    #[test]
    fn lifecycle_on_disk() {
        let tmp = tempfile::tempdir().unwrap();
        let store = JobStore::open(tmp.path()).unwrap();
        let req = AnalysisRequest::new(&fixtures::pratt_verification(), &[Analysis::Static]);
        let a = store.create(&req).unwrap();
        let b = store.create(&req).unwrap();
        assert_ne!(a, b);
        assert_eq!(store.record(&a).unwrap().unwrap().status, Status::Queued);
        assert_eq!(store.request(&a).unwrap(), req);
        assert_eq!(store.unfinished().unwrap().len(), 2);

        let mut out = Outcome::default();
        out.files.insert("gusset/3.pgm".into(), vec![1, 2, 3]);
        store.complete(&a, &out).unwrap();
        let r = store.record(&a).unwrap().unwrap();
        assert_eq!((r.status, r.artifacts), (Status::Done, vec!["gusset/3.pgm".to_string()]));
        assert_eq!(store.artifact(&a, "gusset/3.pgm").unwrap(), Some(vec![1, 2, 3]));
        store.fail(&b, "boom".into()).unwrap();
        assert!(store.unfinished().unwrap().is_empty());
    }

    #[test]
    fn hostile_names_are_refused() {
        let tmp = tempfile::tempdir().unwrap();
        let store = JobStore::open(tmp.path()).unwrap();
        assert_eq!(store.record("../etc").unwrap(), None);
        assert_eq!(store.record("").unwrap(), None);
        for name in ["../x", "a/../../b", ".hidden", "a//b", "/abs"] {
            assert!(!valid_artifact(name), "{name}");
        }
    }
}
