use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// A state change. Only successful mutations are recorded, so replaying a
/// log in order rebuilds the same state, ids included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        problem_id: String,
        annotator: String,
    },
    OpApplied {
        session_id: String,
        op: String,
        args: Vec<String>,
    },
    Undone {
        session_id: String,
    },
    Submitted {
        session_id: String,
    },
    VoteCast {
        task_id: String,
        annotator: String,
        valid: bool,
    },
    TestAnswer {
        annotator: String,
        correct: bool,
    },
}

/// In-memory event list with an optional JSON-lines file behind it.
#[derive(Debug, Default)]
pub struct EventLog {
    events: Vec<Event>,
    file: Option<File>,
}

impl EventLog {
    pub fn memory() -> Self {
        Self::default()
    }

    /// Opens `path` for appending and returns the events already in it.
    pub fn open(path: &Path) -> std::io::Result<(Self, Vec<Event>)> {
        let mut existing = Vec::new();
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let event = serde_json::from_str(&line).map_err(|e| {
                    std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("event log line {}: {e}", i + 1),
                    )
                })?;
                existing.push(event);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok((
            EventLog {
                events: Vec::new(),
                file: Some(file),
            },
            existing,
        ))
    }

    pub fn append(&mut self, event: Event) -> std::io::Result<()> {
        if let Some(f) = &mut self.file {
            let mut line = serde_json::to_string(&event).expect("events serialize");
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.events.push(event);
        Ok(())
    }

    /// Keeps an already persisted event in memory without writing it again.
    pub(crate) fn remember(&mut self, event: Event) {
        self.events.push(event);
    }

    /// All events of this platform, oldest first.
    pub fn events(&self) -> &[Event] {
        &self.events
    }
}
