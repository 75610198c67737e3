//! On-disk response cache for lookup services.
//!
//! Layout: `<dir>/<service>/<sha256 of the request key>.json`, one file per
//! `(service, query, language, limit)` request. Each file holds the request
//! fields and the ordered entity ids. Files are written to a temporary name
//! and renamed into place, so concurrent readers never see partial files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LookupService;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub service: String,
    pub query: String,
    pub language: String,
    pub limit: usize,
    pub entities: Vec<String>,
}

pub struct CachedService {
    inner: Arc<dyn LookupService>,
    dir: PathBuf,
}

impl CachedService {
    pub fn new(inner: Arc<dyn LookupService>, dir: impl Into<PathBuf>) -> Self {
        Self { inner, dir: dir.into() }
    }

    /// Path of the cache file for one request.
    pub fn entry_path(&self, query: &str, language: &str, limit: usize) -> PathBuf {
        let key = serde_json::json!([self.inner.id(), query, language, limit]).to_string();
        let digest = hex::encode(Sha256::digest(key.as_bytes()));
        self.dir.join(sanitize(self.inner.id())).join(format!("{digest}.json"))
    }

    fn read(path: &Path) -> Option<CacheEntry> {
        let bytes = std::fs::read(path).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    fn write(path: &Path, entry: &CacheEntry) -> Result<()> {
        let parent = path.parent().expect("cache paths have a parent");
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        let tmp = path.with_extension(format!("tmp.{}.{:?}", std::process::id(), std::thread::current().id()));
        let body = serde_json::to_vec_pretty(entry)?;
        std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl LookupService for CachedService {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn search(&self, query: &str, limit: usize, language: &str) -> Result<Vec<String>> {
        let path = self.entry_path(query, language, limit);
        if let Some(hit) = Self::read(&path) {
            if hit.query == query && hit.language == language && hit.limit == limit {
                return Ok(hit.entities);
            }
        }
        let entities = self.inner.search(query, limit, language)?;
        let entry = CacheEntry {
            service: self.inner.id().to_string(),
            query: query.to_string(),
            language: language.to_string(),
            limit,
            entities,
        };
        if let Err(e) = Self::write(&path, &entry) {
            tracing::warn!("could not write lookup cache entry: {e}");
        }
        Ok(entry.entities)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting(AtomicUsize);
    impl LookupService for Counting {
        fn id(&self) -> &str {
            "remote/api"
        }
        fn search(&self, query: &str, _: usize, language: &str) -> Result<Vec<String>> {
            self.0.fetch_add(1, Ordering::SeqCst);
            Ok(vec![format!("{query}@{language}"), "other".into()])
        }
    }

    #[test]
    fn second_call_served_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let inner = Arc::new(Counting(AtomicUsize::new(0)));
        let cached = CachedService::new(inner.clone(), dir.path());
        let a = cached.search("Tokyo", 10, "en").unwrap();
        let b = cached.search("Tokyo", 10, "en").unwrap();
        assert_eq!(a, b);
        assert_eq!(inner.0.load(Ordering::SeqCst), 1);
        cached.search("Tokyo", 10, "ja").unwrap();
        cached.search("Tokyo", 5, "en").unwrap();
        assert_eq!(inner.0.load(Ordering::SeqCst), 3);

        let path = cached.entry_path("Tokyo", "en", 10);
        assert!(path.starts_with(dir.path().join("remote_api")));
        let entry: CacheEntry = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
        assert_eq!(entry.entities, ["Tokyo@en", "other"]);
    }

    #[test]
    fn concurrent_use_is_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let cached = Arc::new(CachedService::new(Arc::new(Counting(AtomicUsize::new(0))), dir.path()));
        std::thread::scope(|s| {
            for i in 0..8 {
                let c = cached.clone();
                s.spawn(move || {
                    for j in 0..20 {
                        let q = format!("q{}", (i + j) % 5);
                        let got = c.search(&q, 3, "en").unwrap();
                        assert_eq!(got[0], format!("{q}@en"));
                    }
                });
            }
        });
    }
}
