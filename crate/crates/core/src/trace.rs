//! Line-delimited JSON event trace.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Trial header; `event` carries the configuration.
    Config,
    Init,
    Decide,
    Move,
    Update,
    End,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub phase: Phase,
    pub agent: Option<u32>,
    pub position: Option<u32>,
    pub leader: Option<u32>,
    pub target: Option<u32>,
    pub event: String,
}

impl TraceRecord {
    pub fn new(tick: u64, phase: Phase, event: impl Into<String>) -> Self {
        TraceRecord {
            tick,
            phase,
            agent: None,
            position: None,
            leader: None,
            target: None,
            event: event.into(),
        }
    }
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parsed trace plus the 1-based line of the first unreadable record, if
/// the input stopped making sense before its end.
pub struct ReadTrace {
    pub records: Vec<TraceRecord>,
    pub truncated_at: Option<usize>,
}

pub fn read_trace<R: BufRead>(input: R) -> io::Result<ReadTrace> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => records.push(r),
            Err(_) => {
                return Ok(ReadTrace {
                    records,
                    truncated_at: Some(i + 1),
                })
            }
        }
    }
    Ok(ReadTrace {
        records,
        truncated_at: None,
    })
}
