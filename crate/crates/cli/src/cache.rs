//! Versioned JSON result cache under `cache_dir/{jp,wolstenholme,bernoulli}/`.
//!
//! Every file is one [`CacheEntry`] envelope. A payload is served only when
//! the tool version matches and the payload re-validates against the typed
//! document it claims to be; anything else reads as a miss. Writes go through
//! a temporary file in the target directory and a rename, so a crashed run
//! can never leave a torn entry behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheKind {
    Jp,
    WolstenholmeScan,
    BernoulliTable,
}

impl CacheKind {
    fn dir(self) -> &'static str {
        match self {
            CacheKind::Jp => "jp",
            CacheKind::WolstenholmeScan => "wolstenholme",
            CacheKind::BernoulliTable => "bernoulli",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub kind: CacheKind,
    pub key: String,
    pub tool_version: String,
    /// Unix seconds at write time.
    pub created_at: u64,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
    disabled: bool,
}

impl Cache {
    pub fn new(root: &Path, disabled: bool) -> Self {
        Cache {
            root: root.to_path_buf(),
            disabled,
        }
    }

    fn path_for(&self, kind: CacheKind, key: &str) -> PathBuf {
        self.root.join(kind.dir()).join(format!("{key}.json"))
    }

    /// Load a payload of type `T`; `None` on miss, version mismatch, wrong
    /// kind/key, or a payload that fails to deserialize (= re-validate).
    pub fn load<T: DeserializeOwned>(&self, kind: CacheKind, key: &str) -> Option<T> {
        if self.disabled {
            return None;
        }
        let text = fs::read_to_string(self.path_for(kind, key)).ok()?;
        let entry: CacheEntry = serde_json::from_str(&text).ok()?;
        if entry.tool_version != TOOL_VERSION || entry.kind != kind || entry.key != key {
            return None;
        }
        serde_json::from_value(entry.payload).ok()
    }

    /// Store a payload atomically; errors are reported, not fatal.
    pub fn store<T: Serialize>(&self, kind: CacheKind, key: &str, payload: &T) {
        if self.disabled {
            return;
        }
        if let Err(e) = self.try_store(kind, key, payload) {
            eprintln!("warning: cache write failed for {}/{key}: {e}", kind.dir());
        }
    }

    fn try_store<T: Serialize>(
        &self,
        kind: CacheKind,
        key: &str,
        payload: &T,
    ) -> std::io::Result<()> {
        let path = self.path_for(kind, key);
        let dir = path.parent().expect("cache path always has a parent");
        fs::create_dir_all(dir)?;
        let entry = CacheEntry {
            kind,
            key: key.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            created_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            payload: serde_json::to_value(payload).map_err(std::io::Error::other)?,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, &entry)?;
        tmp.write_all(b"\n")?;
        tmp.persist(&path)?;
        Ok(())
    }
}
