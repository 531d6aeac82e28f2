//! On-disk result cache with checksummed entries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub struct Cache {
    dir: Option<PathBuf>,
}

fn digest(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Cache {
        Cache { dir }
    }

    /// Full key text; the engine version is always part of it.
    pub fn key(fields: &[(&str, String)]) -> String {
        let mut key = format!("engine={}", moduli_core::ENGINE_VERSION);
        for (k, v) in fields {
            key.push_str(&format!(";{k}={v}"));
        }
        key
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{}.json", digest(key))))
    }

    /// A valid stored payload for `key`; corrupt or mismatched entries count as misses.
    pub fn load(&self, key: &str) -> Option<Value> {
        let text = fs::read_to_string(self.path(key)?).ok()?;
        let entry: Value = serde_json::from_str(&text).ok()?;
        let payload = entry.get("payload")?;
        let ok = entry.get("key").and_then(Value::as_str) == Some(key)
            && entry.get("checksum").and_then(Value::as_str) == Some(digest(&payload.to_string()).as_str());
        ok.then(|| payload.clone())
    }

    pub fn store(&self, key: &str, payload: &Value) -> std::io::Result<()> {
        let Some(path) = self.path(key) else { return Ok(()) };
        let dir = path.parent().unwrap_or(Path::new("."));
        fs::create_dir_all(dir)?;
        let entry = json!({"key": key, "checksum": digest(&payload.to_string()), "payload": payload});
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(entry.to_string().as_bytes())?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    /// Cached value of `compute`, recomputing on a miss.
    pub fn get_or_compute<E>(&self, key: &str, compute: impl FnOnce() -> Result<Value, E>) -> Result<Value, E> {
        if let Some(v) = self.load(key) {
            return Ok(v);
        }
        let v = compute()?;
        // a failed write only loses the cache entry
        let _ = self.store(key, &v);
        Ok(v)
    }
}
