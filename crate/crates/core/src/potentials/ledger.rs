use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use sha2::{Digest, Sha256};

use super::{EvaluationRecord, SubproblemSpec};
use crate::error::{Error, Result};

/// Hex digest over atomic numbers and the exact bit patterns of every
/// coordinate, plus charge and spin.
pub fn geometry_digest(centers: &[(u32, [f64; 3])], charge: i32, spin: u32) -> String {
    let mut h = Sha256::new();
    h.update((centers.len() as u64).to_le_bytes());
    for (z, xyz) in centers {
        h.update(z.to_le_bytes());
        for c in xyz {
            h.update(c.to_bits().to_le_bytes());
        }
    }
    h.update(charge.to_le_bytes());
    h.update(spin.to_le_bytes());
    hex::encode(h.finalize())
}

/// Cache key of one evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LedgerKey(String);

impl LedgerKey {
    pub fn new(backend: &str, spec: &SubproblemSpec, geometry_digest: &str) -> Self {
        let mut h = Sha256::new();
        h.update(backend.as_bytes());
        h.update([0]);
        let spec_json = serde_json::to_string(spec).expect("specs serialize");
        h.update(spec_json.as_bytes());
        h.update([0]);
        h.update(geometry_digest.as_bytes());
        LedgerKey(hex::encode(h.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn checksum(key: &str, record: &str) -> String {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.update(b"\t");
    h.update(record.as_bytes());
    hex::encode(h.finalize())
}

/// Append-only evaluation cache. Each line of the backing file is
/// `checksum<TAB>key<TAB>record-json`; a file with any bad line is refused.
pub struct Ledger {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, EvaluationRecord>>,
    file: Mutex<Option<File>>,
}

impl std::fmt::Debug for Ledger {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ledger").field("path", &self.path).field("len", &self.len()).finish()
    }
}

impl Ledger {
    pub fn in_memory() -> Self {
        Ledger { path: None, entries: RwLock::new(HashMap::new()), file: Mutex::new(None) }
    }

    /// Opens or creates the ledger file at `path`, verifying every record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            let mut raw = String::new();
            let mut reader = reader;
            let mut line_no = 0;
            loop {
                raw.clear();
                if reader.read_line(&mut raw)? == 0 {
                    break;
                }
                line_no += 1;
                let bad = |msg: &str| Error::Integrity(format!("{}: line {line_no}: {msg}", path.display()));
                let Some(line) = raw.strip_suffix('\n') else {
                    return Err(bad("truncated record"));
                };
                let mut parts = line.splitn(3, '\t');
                let (Some(sum), Some(key), Some(record)) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(bad("malformed record"));
                };
                if checksum(key, record) != sum {
                    return Err(bad("checksum mismatch"));
                }
                let record: EvaluationRecord =
                    serde_json::from_str(record).map_err(|e| bad(&format!("undecodable record: {e}")))?;
                entries.insert(key.to_string(), record);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Ledger { path: Some(path), entries: RwLock::new(entries), file: Mutex::new(Some(file)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &LedgerKey) -> Option<EvaluationRecord> {
        self.entries.read().get(&key.0).cloned()
    }

    /// Stores a record. Storing under an existing key is a no-op.
    pub fn put(&self, key: &LedgerKey, record: &EvaluationRecord) -> Result<()> {
        record.validate()?;
        let mut file = self.file.lock();
        if self.entries.read().contains_key(&key.0) {
            return Ok(());
        }
        if let Some(f) = file.as_mut() {
            let json = serde_json::to_string(record).map_err(|e| Error::Integrity(e.to_string()))?;
            let line = format!("{}\t{}\t{}\n", checksum(&key.0, &json), key.0, json);
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.entries.write().insert(key.0.clone(), record.clone());
        Ok(())
    }
}
