//! Append-only record log.
//!
//! Layout: the 8-byte magic `AQLOG\0\0\x01` (last byte is the format
//! version), then records of `u32 LE payload length`, `u32 LE crc32 of the
//! payload`, `payload` (JSON). A torn or corrupt tail, as left by a crash
//! mid-append, is truncated on open.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{PlatformError, Registry};
use crate::anthro::{Measurement, ZScoreResult};
use crate::game::{Badge, Quest, ScoreEvent};
use crate::integrity::Alert;

pub const MAGIC: [u8; 8] = *b"AQLOG\0\0\x01";
pub const VERSION: u8 = 1;
const MAX_RECORD: u32 = 64 << 20;

/// Everything the store learns, in the order it learned it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Registry {
        registry: Registry,
    },
    /// A measurement that passed validation, with its full processing outcome.
    Accepted {
        measurement: Measurement,
        z: Option<ZScoreResult>,
        alerts: Vec<Alert>,
        score: Option<ScoreEvent>,
        badges: Vec<Badge>,
        /// True when a block-severity flag withheld it from scoring.
        held: bool,
    },
    QuestAccepted {
        quest: Quest,
        accepted_at: DateTime<Utc>,
    },
}

pub fn encode(record: &LogRecord) -> Vec<u8> {
    let payload = serde_json::to_vec(record).expect("log records serialize");
    let mut out = Vec::with_capacity(payload.len() + 8);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

/// Decodes consecutive records; returns them with the byte length of the
/// valid prefix (header included).
pub fn decode(bytes: &[u8]) -> Result<(Vec<LogRecord>, usize), PlatformError> {
    if bytes.len() < MAGIC.len() || bytes[..7] != MAGIC[..7] {
        return Err(PlatformError::Log("missing log header".into()));
    }
    if bytes[7] != VERSION {
        return Err(PlatformError::Log(format!("unsupported log version {}", bytes[7])));
    }
    let mut pos = MAGIC.len();
    let mut records = Vec::new();
    while bytes.len() - pos >= 8 {
        let len = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap());
        let crc = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap());
        let end = pos + 8 + len as usize;
        if len > MAX_RECORD || end > bytes.len() {
            break;
        }
        let payload = &bytes[pos + 8..end];
        if crc32fast::hash(payload) != crc {
            break;
        }
        let Ok(rec) = serde_json::from_slice(payload) else { break };
        records.push(rec);
        pos = end;
    }
    Ok((records, pos))
}

/// Log sink: a file, or memory for tests and dry runs.
#[derive(Debug)]
pub struct RecordLog {
    file: Option<(File, PathBuf)>,
    memory: Vec<u8>,
    records: usize,
}

impl RecordLog {
    pub fn in_memory() -> Self {
        Self { file: None, memory: MAGIC.to_vec(), records: 0 }
    }

    pub fn create(path: &Path) -> Result<Self, PlatformError> {
        let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(|e| io_err(path, e))?;
        f.write_all(&MAGIC).and_then(|_| f.sync_all()).map_err(|e| io_err(path, e))?;
        Ok(Self { file: Some((f, path.to_path_buf())), memory: Vec::new(), records: 0 })
    }

    /// Opens an existing log, truncating any torn tail, and returns its records.
    pub fn open(path: &Path) -> Result<(Self, Vec<LogRecord>), PlatformError> {
        let mut f = OpenOptions::new().read(true).write(true).open(path).map_err(|e| io_err(path, e))?;
        let mut bytes = Vec::new();
        f.read_to_end(&mut bytes).map_err(|e| io_err(path, e))?;
        let (records, valid) = decode(&bytes)?;
        if valid < bytes.len() {
            f.set_len(valid as u64).map_err(|e| io_err(path, e))?;
        }
        f.seek(SeekFrom::End(0)).map_err(|e| io_err(path, e))?;
        let n = records.len();
        Ok((Self { file: Some((f, path.to_path_buf())), memory: Vec::new(), records: n }, records))
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<(), PlatformError> {
        let bytes = encode(record);
        match &mut self.file {
            Some((f, path)) => {
                f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| io_err(path, e))?;
            }
            None => self.memory.extend_from_slice(&bytes),
        }
        self.records += 1;
        Ok(())
    }

    pub fn sync(&mut self) -> Result<(), PlatformError> {
        if let Some((f, path)) = &mut self.file {
            f.sync_data().map_err(|e| io_err(path, e))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records == 0
    }

    /// Full log contents.
    pub fn bytes(&self) -> Result<Vec<u8>, PlatformError> {
        match &self.file {
            Some((_, path)) => std::fs::read(path).map_err(|e| io_err(path, e)),
            None => Ok(self.memory.clone()),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.file.as_ref().map(|(_, p)| p.as_path())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> PlatformError {
    PlatformError::Log(format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quest(i: usize) -> LogRecord {
        let at: DateTime<Utc> = "2024-01-01T00:00:00Z".parse().unwrap();
        LogRecord::QuestAccepted {
            quest: Quest {
                id: format!("q{i}"),
                chw_id: "w".into(),
                target_cell: i,
                kind: crate::game::QuestKind::Stale,
                bonus_multiplier: 2.0,
                distance_m: 12.5 * i as f64,
                generated_at: at,
                expires_at: at,
            },
            accepted_at: at,
        }
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.log");
        let mut log = RecordLog::create(&path).unwrap();
        for i in 0..3 {
            log.append(&quest(i)).unwrap();
        }
        drop(log);
        let full = std::fs::read(&path).unwrap();
        let last = encode(&quest(2)).len();
        for cut in [1, 5, last / 2, last - 1] {
            std::fs::write(&path, &full[..full.len() - cut]).unwrap();
            let (log, recs) = RecordLog::open(&path).unwrap();
            assert_eq!(recs, vec![quest(0), quest(1)], "cut {cut}");
            assert_eq!(log.len(), 2);
            assert_eq!(std::fs::read(&path).unwrap(), full[..full.len() - last]);
        }
    }

    #[test]
    fn corrupt_payload_stops_decoding() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend(encode(&quest(0)));
        let start = bytes.len();
        bytes.extend(encode(&quest(1)));
        bytes[start + 12] ^= 0x55;
        let (recs, valid) = decode(&bytes).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(valid, start);
    }

    #[test]
    fn header_is_checked() {
        assert!(decode(b"garbage!").is_err());
        let mut v = MAGIC.to_vec();
        v[7] = 9;
        assert!(decode(&v).is_err());
        let mut mem = RecordLog::in_memory();
        mem.append(&quest(4)).unwrap();
        assert_eq!(decode(&mem.bytes().unwrap()).unwrap().0, vec![quest(4)]);
    }
}
