//! Persistent score cache: append-only, length-prefixed JSON records.
//!
//! Each record is `<byte length>\n<json>\n`. A corrupt trailing record is
//! truncated on load with a warning, which makes interrupted batch runs
//! resumable from the last intact record.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::ScoreMode;

/// Identity of one scoring computation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreCacheKey {
    pub backend: String,
    pub text: String,
    pub mode: ScoreMode,
    /// Byte offset of the scored suffix for selective mode.
    pub k_char: Option<usize>,
}

impl ScoreCacheKey {
    /// Stable FNV-1a hash of the key, hex encoded. Stored in records as a
    /// corruption check.
    pub fn hash_hex(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.backend.as_bytes());
        eat(&[0x1f]);
        eat(self.text.as_bytes());
        eat(&[0x1f]);
        eat(self.mode.as_str().as_bytes());
        eat(&[0x1f]);
        match self.k_char {
            Some(k) => eat(k.to_string().as_bytes()),
            None => eat(b"-"),
        }
        format!("{hash:016x}")
    }
}

/// Cached result of one scoring computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CachedScore {
    pub log_score: f64,
    pub token_count: usize,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key_hash: String,
    backend: String,
    text: String,
    mode: ScoreMode,
    k_char: Option<usize>,
    log_score: f64,
    token_count: usize,
}

/// In-memory map of scoring results with optional append-only persistence.
///
/// Reads are concurrent; appends are serialized. Hit/miss counters expose
/// how many lookups were answered without a backend call.
pub struct ScoreCache {
    state: RwLock<HashMap<ScoreCacheKey, CachedScore>>,
    writer: Option<Mutex<File>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl ScoreCache {
    /// Cache without a backing file.
    pub fn in_memory() -> Self {
        ScoreCache {
            state: RwLock::new(HashMap::new()),
            writer: None,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Opens (or creates) a cache file, loading all intact records.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw)?;
        let (records, good_len) = parse_records(&raw);
        if good_len < raw.len() {
            log::warn!(
                "cache {}: truncating {} corrupt trailing bytes",
                path.display(),
                raw.len() - good_len
            );
            file.set_len(good_len as u64)?;
        }
        file.seek(SeekFrom::End(0))?;
        let mut map = HashMap::with_capacity(records.len());
        for record in records {
            let key = ScoreCacheKey {
                backend: record.backend,
                text: record.text,
                mode: record.mode,
                k_char: record.k_char,
            };
            map.insert(
                key,
                CachedScore {
                    log_score: record.log_score,
                    token_count: record.token_count,
                },
            );
        }
        Ok(ScoreCache {
            state: RwLock::new(map),
            writer: Some(Mutex::new(file)),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn get(&self, key: &ScoreCacheKey) -> Option<CachedScore> {
        let hit = self.state.read().expect("cache lock").get(key).copied();
        match hit {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        hit
    }

    /// Records a result; persists it when the key is new.
    pub fn put(&self, key: ScoreCacheKey, value: CachedScore) -> std::io::Result<()> {
        let inserted = {
            let mut state = self.state.write().expect("cache lock");
            match state.entry(key.clone()) {
                std::collections::hash_map::Entry::Occupied(_) => false,
                std::collections::hash_map::Entry::Vacant(slot) => {
                    slot.insert(value);
                    true
                }
            }
        };
        if !inserted {
            return Ok(());
        }
        if let Some(writer) = &self.writer {
            let record = CacheRecord {
                key_hash: key.hash_hex(),
                backend: key.backend,
                text: key.text,
                mode: key.mode,
                k_char: key.k_char,
                log_score: value.log_score,
                token_count: value.token_count,
            };
            let json = serde_json::to_vec(&record).expect("record serializes");
            let mut file = writer.lock().expect("cache file lock");
            writeln!(file, "{}", json.len())?;
            file.write_all(&json)?;
            file.write_all(b"\n")?;
            file.flush()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.state.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }
}

/// Parses records until the first corruption; returns them and the byte
/// length of the intact prefix.
fn parse_records(raw: &[u8]) -> (Vec<CacheRecord>, usize) {
    let mut records = Vec::new();
    let mut pos = 0;
    loop {
        if pos == raw.len() {
            break;
        }
        let Some(nl) = raw[pos..].iter().position(|&b| b == b'\n') else {
            break;
        };
        let Ok(len) = std::str::from_utf8(&raw[pos..pos + nl])
            .unwrap_or("")
            .parse::<usize>()
        else {
            break;
        };
        let body_start = pos + nl + 1;
        let body_end = body_start + len;
        if body_end + 1 > raw.len() || raw[body_end] != b'\n' {
            break;
        }
        let Ok(record) = serde_json::from_slice::<CacheRecord>(&raw[body_start..body_end]) else {
            break;
        };
        let expected = ScoreCacheKey {
            backend: record.backend.clone(),
            text: record.text.clone(),
            mode: record.mode,
            k_char: record.k_char,
        }
        .hash_hex();
        if expected != record.key_hash {
            break;
        }
        records.push(record);
        pos = body_end + 1;
    }
    (records, pos)
}
