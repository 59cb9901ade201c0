//! On-disk cache of integer sequences: one file per key holding
//! `version`, `key`, one decimal integer per line, and a SHA-256 checksum line.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CacheEntry {
    pub version: u32,
    pub key: String,
    pub payload: Vec<BigInt>,
}

impl CacheEntry {
    pub fn new(key: impl Into<String>, payload: Vec<BigInt>) -> Self {
        CacheEntry {
            version: VERSION,
            key: key.into(),
            payload,
        }
    }

    fn body(&self) -> String {
        let mut s = format!("{}\n{}\n", self.version, self.key);
        for n in &self.payload {
            s.push_str(&n.to_string());
            s.push('\n');
        }
        s
    }

    pub fn encode(&self) -> String {
        let body = self.body();
        let sum = checksum(&body);
        body + &sum + "\n"
    }

    /// `None` on any malformation, checksum mismatch or foreign version.
    pub fn decode(text: &str) -> Option<CacheEntry> {
        let trimmed = text.strip_suffix('\n')?;
        let (body, sum) = trimmed.rsplit_once('\n')?;
        let body = format!("{body}\n");
        if checksum(&body) != sum {
            return None;
        }
        let mut lines = body.lines();
        let version: u32 = lines.next()?.parse().ok()?;
        if version != VERSION {
            return None;
        }
        let key = lines.next()?.to_string();
        let payload = lines.map(|l| l.parse().ok()).collect::<Option<Vec<BigInt>>>()?;
        Some(CacheEntry { version, key, payload })
    }
}

fn checksum(body: &str) -> String {
    Sha256::digest(body.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.cache", key.replace(':', "_")))
    }

    /// The payload under `key`, if a valid entry exists.
    pub fn get(&self, key: &str) -> Option<Vec<BigInt>> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let e = CacheEntry::decode(&text)?;
        (e.key == key).then_some(e.payload)
    }

    /// Writes through a private temporary file and an atomic rename, so
    /// readers never see a partial entry.
    pub fn put(&self, entry: &CacheEntry) -> io::Result<()> {
        let dest = self.path(&entry.key);
        let tmp = self.dir.join(format!(
            ".{}.{}.tmp",
            entry.key.replace(':', "_"),
            std::process::id()
        ));
        fs::write(&tmp, entry.encode())?;
        fs::rename(&tmp, dest)
    }

    /// The longest valid `jcoeffs:<n>` entry.
    pub fn best_jcoeffs(&self) -> Option<Vec<BigInt>> {
        let mut counts: Vec<usize> = fs::read_dir(&self.dir)
            .ok()?
            .filter_map(|e| {
                let name = e.ok()?.file_name().into_string().ok()?;
                name.strip_prefix("jcoeffs_")?.strip_suffix(".cache")?.parse().ok()
            })
            .collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts
            .into_iter()
            .find_map(|n| self.get(&format!("jcoeffs:{n}")).filter(|p| p.len() == n))
    }
}
