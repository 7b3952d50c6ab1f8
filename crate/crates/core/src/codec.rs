//! JSONL log format for transcripts and game results.
//!
//! A session is written as one `"message"` line per on-air message followed
//! by one `"outcome"` line. Word fields are lowercase hex zero-padded to
//! `ceil(width / 4)` digits; each line carries the width so decoding is exact.
//! Games are single `"game"` lines interleaved in the same stream.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{
    Delivery, Direction, MessageRecord, ProtocolId, SessionOutcome, SessionTranscript, Slot,
    Variant,
};
use crate::word::{Word, WordError};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Word {
        line: usize,
        #[source]
        source: WordError,
    },
    #[error("line {line}: outcome does not match the preceding messages")]
    Mismatch { line: usize },
    #[error("stream ends inside a session")]
    Truncated,
}

/// Result of one privacy game, as logged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRecord {
    pub strategy: String,
    pub protocol: ProtocolId,
    pub variant: Variant,
    pub b: u8,
    pub guess: u8,
    pub cost: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEntry {
    Session(SessionTranscript),
    Game(GameRecord),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Message {
        protocol: ProtocolId,
        variant: Variant,
        seed: u64,
        session: u64,
        width: u32,
        step: String,
        direction: Direction,
        fields: BTreeMap<String, String>,
        delivery: Delivery,
    },
    Outcome {
        protocol: ProtocolId,
        variant: Variant,
        seed: u64,
        session: u64,
        width: u32,
        server_accepted: Option<bool>,
        server_slot: Option<Slot>,
        reader_accepted: Option<bool>,
        tag_accepted: Option<bool>,
        server_updated: bool,
        tag_updated: bool,
    },
    Game(GameRecord),
}

fn to_line(line: &Line) -> String {
    serde_json::to_string(line).expect("log lines always serialize")
}

pub fn session_lines(t: &SessionTranscript) -> Vec<String> {
    let mut out: Vec<String> = t
        .messages
        .iter()
        .map(|m| {
            to_line(&Line::Message {
                protocol: t.protocol,
                variant: t.variant,
                seed: t.seed,
                session: t.session,
                width: t.width,
                step: m.step.clone(),
                direction: m.direction,
                fields: m
                    .fields
                    .iter()
                    .map(|(k, v)| (k.clone(), v.to_hex()))
                    .collect(),
                delivery: m.delivery,
            })
        })
        .collect();
    let o = &t.outcome;
    out.push(to_line(&Line::Outcome {
        protocol: t.protocol,
        variant: t.variant,
        seed: t.seed,
        session: t.session,
        width: t.width,
        server_accepted: o.server_accepted,
        server_slot: o.server_slot,
        reader_accepted: o.reader_accepted,
        tag_accepted: o.tag_accepted,
        server_updated: o.server_updated,
        tag_updated: o.tag_updated,
    }));
    out
}

pub fn game_line(g: &GameRecord) -> String {
    to_line(&Line::Game(g.clone()))
}

impl SessionTranscript {
    pub fn to_jsonl(&self) -> String {
        let mut s = session_lines(self).join("\n");
        s.push('\n');
        s
    }
}

pub fn write_session<W: Write>(out: &mut W, t: &SessionTranscript) -> io::Result<()> {
    out.write_all(t.to_jsonl().as_bytes())
}

pub fn write_game<W: Write>(out: &mut W, g: &GameRecord) -> io::Result<()> {
    writeln!(out, "{}", game_line(g))
}

pub fn parse_log(text: &str) -> Result<Vec<LogEntry>, CodecError> {
    let mut entries = Vec::new();
    let mut pending: Option<SessionTranscript> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(raw).map_err(|source| CodecError::Json { line, source })?;
        match parsed {
            Line::Message {
                protocol,
                variant,
                seed,
                session,
                width,
                step,
                direction,
                fields,
                delivery,
            } => {
                let t = pending.get_or_insert_with(|| {
                    let mut t = SessionTranscript::new(protocol, variant, width);
                    t.seed = seed;
                    t.session = session;
                    t
                });
                if (t.protocol, t.variant, t.seed, t.session, t.width)
                    != (protocol, variant, seed, session, width)
                {
                    return Err(CodecError::Mismatch { line });
                }
                let fields = fields
                    .into_iter()
                    .map(|(k, v)| Word::from_hex(&v, width).map(|w| (k, w)))
                    .collect::<Result<_, _>>()
                    .map_err(|source| CodecError::Word { line, source })?;
                t.messages.push(MessageRecord {
                    step,
                    direction,
                    fields,
                    delivery,
                });
            }
            Line::Outcome {
                protocol,
                variant,
                seed,
                session,
                width,
                server_accepted,
                server_slot,
                reader_accepted,
                tag_accepted,
                server_updated,
                tag_updated,
            } => {
                let mut t = pending.take().unwrap_or_else(|| {
                    let mut t = SessionTranscript::new(protocol, variant, width);
                    t.seed = seed;
                    t.session = session;
                    t
                });
                if (t.protocol, t.variant, t.seed, t.session, t.width)
                    != (protocol, variant, seed, session, width)
                {
                    return Err(CodecError::Mismatch { line });
                }
                t.outcome = SessionOutcome {
                    server_accepted,
                    server_slot,
                    reader_accepted,
                    tag_accepted,
                    server_updated,
                    tag_updated,
                };
                entries.push(LogEntry::Session(t));
            }
            Line::Game(g) => {
                if pending.is_some() {
                    return Err(CodecError::Mismatch { line });
                }
                entries.push(LogEntry::Game(g));
            }
        }
    }
    if pending.is_some() {
        return Err(CodecError::Truncated);
    }
    Ok(entries)
}
