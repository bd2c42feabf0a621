use std::fs::{self, OpenOptions};
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifest::{Accessibility, DatasetAnnotation};
use crate::synthetic;

pub const CACHE_ENV: &str = "FAIRCORPUS_CACHE";

const LOCK_STALE_AFTER: Duration = Duration::from_secs(600);
const LOCK_POLL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawArtifact {
    pub bytes: Vec<u8>,
    pub source_url: String,
    /// Seconds since the Unix epoch at download time.
    pub fetched_at: u64,
    pub from_cache: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheMeta {
    url: String,
    timestamp: u64,
    #[serde(default)]
    sha256: Option<String>,
}

/// On-disk download cache laid out as `<root>/<dataset_id>/<url-sha256>.bin`
/// with a `.meta` JSON sidecar next to each entry.
#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Explicit path, else `$FAIRCORPUS_CACHE`, else the platform cache home.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Ok(Self::new(p));
        }
        if let Some(p) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
            return Ok(Self::new(PathBuf::from(p)));
        }
        let base = dirs::cache_dir().unwrap_or_else(std::env::temp_dir);
        Ok(Self::new(base.join("faircorpus")))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry_path(&self, dataset_id: &str, url: &str) -> PathBuf {
        self.root
            .join(dataset_id)
            .join(format!("{}.bin", sha256_hex(url.as_bytes())))
    }

    fn meta_path(entry: &Path) -> PathBuf {
        entry.with_extension("meta")
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Cross-process lock on one dataset's cache directory.
struct CacheLock {
    path: PathBuf,
}

impl CacheLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(".lock");
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(Self { path }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let stale = fs::metadata(&path)
                        .and_then(|m| m.modified())
                        .ok()
                        .and_then(|t| t.elapsed().ok())
                        .is_some_and(|age| age > LOCK_STALE_AFTER);
                    if stale {
                        let _ = fs::remove_file(&path);
                    } else {
                        thread::sleep(LOCK_POLL);
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "tmp-{}-{}",
        std::process::id(),
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.subsec_nanos())
            .unwrap_or(0)
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Downloads (or reads from cache) the artifact of a publicly accessible
/// dataset. When the annotation names an archive member the member bytes
/// are returned; the cache always holds the downloaded file.
pub fn fetch(annotation: &DatasetAnnotation, cache: &Cache) -> Result<RawArtifact> {
    if annotation.is_accessible != Accessibility::Public {
        return Err(Error::ManualDownloadRequired(annotation.dataset_id.clone()));
    }
    let url = annotation
        .download_url
        .as_deref()
        .ok_or_else(|| Error::MissingUrl(annotation.dataset_id.clone()))?;

    let dir = cache.root.join(&annotation.dataset_id);
    fs::create_dir_all(&dir)?;
    let entry = cache.entry_path(&annotation.dataset_id, url);
    let meta_path = Cache::meta_path(&entry);

    let (bytes, fetched_at, from_cache) = {
        let _lock = CacheLock::acquire(&dir)?;
        match read_cached(&entry, &meta_path)? {
            Some((bytes, ts)) => (bytes, ts, true),
            None => {
                let bytes = download(url)?;
                if bytes.is_empty() {
                    return Err(Error::EmptyArtifact(url.to_string()));
                }
                let ts = now_secs();
                write_atomic(&entry, &bytes)?;
                let meta = CacheMeta {
                    url: url.to_string(),
                    timestamp: ts,
                    sha256: Some(sha256_hex(&bytes)),
                };
                write_atomic(&meta_path, &serde_json::to_vec_pretty(&meta)?)?;
                (bytes, ts, false)
            }
        }
    };

    if let Some(expected) = &annotation.sha256 {
        let actual = sha256_hex(&bytes);
        if !actual.eq_ignore_ascii_case(expected) {
            return Err(Error::Checksum {
                url: url.to_string(),
                expected: expected.clone(),
                actual,
            });
        }
    }

    let bytes = match &annotation.archive_member {
        Some(member) => extract_member(&bytes, member)?,
        None => bytes,
    };
    if bytes.is_empty() {
        return Err(Error::EmptyArtifact(url.to_string()));
    }
    Ok(RawArtifact {
        bytes,
        source_url: url.to_string(),
        fetched_at,
        from_cache,
    })
}

fn read_cached(entry: &Path, meta_path: &Path) -> Result<Option<(Vec<u8>, u64)>> {
    if !entry.exists() {
        return Ok(None);
    }
    let bytes = fs::read(entry)?;
    if bytes.is_empty() {
        return Ok(None);
    }
    let ts = fs::read(meta_path)
        .ok()
        .and_then(|m| serde_json::from_slice::<CacheMeta>(&m).ok())
        .map(|m| m.timestamp)
        .unwrap_or(0);
    Ok(Some((bytes, ts)))
}

fn download(url: &str) -> Result<Vec<u8>> {
    if let Some(path) = url.strip_prefix("file://") {
        return Ok(fs::read(path)?);
    }
    if url.starts_with("synthetic://") {
        return synthetic::generate_from_url(url);
    }
    let mut response = ureq::get(url).call().map_err(|e| match e {
        ureq::Error::StatusCode(status) => Error::HttpStatus {
            url: url.to_string(),
            status,
        },
        other => Error::Network {
            url: url.to_string(),
            message: other.to_string(),
        },
    })?;
    response
        .body_mut()
        .with_config()
        .limit(u64::MAX)
        .read_to_vec()
        .map_err(|e| Error::Network {
            url: url.to_string(),
            message: e.to_string(),
        })
}

/// Reads one member of a ZIP archive.
pub fn extract_member(archive: &[u8], member: &str) -> Result<Vec<u8>> {
    let mut zip = zip::ZipArchive::new(Cursor::new(archive)).map_err(|e| Error::Archive(e.to_string()))?;
    let mut file = match zip.by_name(member) {
        Ok(f) => f,
        Err(zip::result::ZipError::FileNotFound) => {
            return Err(Error::MissingArchiveMember(member.to_string()))
        }
        Err(e) => return Err(Error::Archive(e.to_string())),
    };
    let mut out = Vec::new();
    file.read_to_end(&mut out)?;
    Ok(out)
}
