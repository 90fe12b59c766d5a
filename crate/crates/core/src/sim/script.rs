//! Scripted conversations replayed on a virtual clock.
//!
//! Script format, one message per line:
//!
//! ```text
//! # delay-seconds  msisdn           body
//! 0                +2348030000001   G SSE/010/7600 1 2012/2013
//! 20               +2348030000001   Blue; Lagos
//! ```
//!
//! The delay is relative to the previous line. Blank lines and `#` comments
//! are skipped.

use std::fmt;

use crate::clock::{Clock, Seconds, Timestamp, VirtualClock};
use crate::gateway::Gateway;
use crate::message::{Direction, Msisdn};

use super::{InboxEntry, SimConfig, SimError, SmsCenter};

/// 2013-01-07T08:00:00Z.
pub const DEFAULT_SCRIPT_START: Timestamp = Timestamp::from_unix(1_357_545_600);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptStep {
    pub delay: Seconds,
    pub from: Msisdn,
    pub body: String,
    /// 1-based source line.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub steps: Vec<ScriptStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

impl Script {
    pub fn parse(text: &str) -> Result<Self, ScriptError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ScriptError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (delay, rest) = trimmed
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("expected <delay> <msisdn> <body>".into()))?;
            let delay = delay.parse::<u64>().map_err(|_| err(format!("bad delay {delay:?}")))?;
            let rest = rest.trim_start();
            let (from, body) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| err("missing message body".into()))?;
            let from = Msisdn::parse(from).map_err(|e| err(e.to_string()))?;
            let body = body.trim();
            if body.is_empty() {
                return Err(err("missing message body".into()));
            }
            steps.push(ScriptStep {
                delay: Seconds(delay),
                from,
                body: body.to_owned(),
                line,
            });
        }
        Ok(Script { steps })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub phone: Msisdn,
    pub entry: InboxEntry,
}

impl fmt::Display for TranscriptEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.entry.direction {
            Direction::Inbound => '>',
            Direction::Outbound => '<',
        };
        write!(
            f,
            "{} {} #{} {} {}",
            self.entry.timestamp, self.phone, self.entry.seq, arrow, self.entry.body
        )
    }
}

/// Every message of a run in the order it crossed the sim.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn inbound_count(&self) -> usize {
        self.count(Direction::Inbound)
    }

    pub fn outbound_count(&self) -> usize {
        self.count(Direction::Outbound)
    }

    fn count(&self, direction: Direction) -> usize {
        self.entries.iter().filter(|e| e.entry.direction == direction).count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{entry}")?;
        }
        Ok(())
    }
}

impl SmsCenter {
    /// Replays `script` on `clock`, then lets queued deliveries finish.
    pub fn run_script(&self, clock: &VirtualClock, script: &Script) -> Result<Transcript, SimError> {
        let first = self.event_count();
        for step in &script.steps {
            clock.advance(step.delay);
            self.pump(clock.now())?;
            self.submit_inbound(step.from.as_str(), &step.body, clock.now())?;
        }
        while let Some(at) = self.next_delivery() {
            clock.advance_to(at);
            self.pump(clock.now())?;
        }
        Ok(Transcript {
            entries: self
                .events_since(first)
                .into_iter()
                .map(|(phone, entry)| TranscriptEntry { phone, entry })
                .collect(),
        })
    }
}

/// Output of [`run_script`]: the transcript and the gateway it ran against.
#[derive(Debug)]
pub struct ScriptRun {
    pub transcript: Transcript,
    pub gateway: Gateway,
}

/// Replays `script` against `gateway` on a fresh virtual clock starting at `start`.
pub fn run_script(gateway: Gateway, script: &Script, start: Timestamp, sim: SimConfig) -> Result<ScriptRun, SimError> {
    let center = SmsCenter::with_config(gateway, sim);
    let clock = VirtualClock::new(start);
    let transcript = center.run_script(&clock, script)?;
    Ok(ScriptRun {
        transcript,
        gateway: center.into_gateway(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps_and_skips_comments() {
        let text = "# demo\n\n0 +2348030000001 G SSE/010/7600 1 2012/2013\n  20   08030000002   Blue;  Lagos \n";
        let script = Script::parse(text).unwrap();
        assert_eq!(script.steps.len(), 2);
        assert_eq!(script.steps[0].line, 3);
        assert_eq!(script.steps[0].body, "G SSE/010/7600 1 2012/2013");
        assert_eq!(script.steps[1].delay, Seconds(20));
        assert_eq!(script.steps[1].from.as_str(), "08030000002");
        assert_eq!(script.steps[1].body, "Blue;  Lagos");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Script::parse("0 08030000001 H\nsoon 08030000001 H").unwrap_err();
        assert_eq!(err.line, 2);
        let err = Script::parse("\n\n5 notaphone H").unwrap_err();
        assert_eq!(err.line, 3);
        let err = Script::parse("5 08030000001").unwrap_err();
        assert_eq!(err.line, 1);
        let err = Script::parse("5").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn empty_script_empty_transcript() {
        let script = Script::parse("# nothing\n").unwrap();
        let gateway = Gateway::new(Default::default(), crate::records::RecordsStore::in_memory(2));
        let run = run_script(gateway, &script, DEFAULT_SCRIPT_START, SimConfig::default()).unwrap();
        assert!(run.transcript.is_empty());
        assert_eq!(run.transcript.to_string(), "");
    }
}
