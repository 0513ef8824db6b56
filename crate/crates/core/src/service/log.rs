//! Append-only newline-delimited JSON event log.
//!
//! Each line is one [`EventLogEntry`]. Appends write a whole line per call,
//! so a crash can at worst leave a truncated final line, which replay skips
//! and the next compaction removes.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::Answer;
use crate::model::ArchStyle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created { style: ArchStyle },
    Answered { answer: Answer },
    Undone,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLogEntry {
    pub session_id: String,
    /// Per-session sequence number, contiguous from 1.
    pub seq: u64,
    /// Unix time in milliseconds.
    pub at: u64,
    pub event: Event,
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn open(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(EventLog { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, entry: &EventLogEntry) -> io::Result<()> {
        let mut line = serde_json::to_vec(entry)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()
    }

    /// Entries in file order. Lines that do not parse are reported and skipped.
    pub fn read(path: &Path) -> io::Result<(Vec<EventLogEntry>, usize)> {
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
            Err(e) => return Err(e),
        };
        let mut entries = Vec::new();
        let mut skipped = 0;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line) {
                Ok(entry) => entries.push(entry),
                Err(e) => {
                    log::warn!(
                        "{}:{}: skipping unreadable event: {e}",
                        path.display(),
                        n + 1
                    );
                    skipped += 1;
                }
            }
        }
        Ok((entries, skipped))
    }

    /// Atomically replaces the log with `entries`.
    pub fn rewrite(&mut self, entries: &[EventLogEntry]) -> io::Result<()> {
        let tmp = self.path.with_extension("compact");
        {
            let mut out = File::create(&tmp)?;
            let mut buf = Vec::new();
            for entry in entries {
                serde_json::to_writer(&mut buf, entry)?;
                buf.push(b'\n');
            }
            out.write_all(&buf)?;
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        Ok(())
    }
}
