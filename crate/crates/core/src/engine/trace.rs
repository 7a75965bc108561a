//! Timestamped command traces and their text form.
//!
//! One command per line: `<time_ns> <ACT|PRE|WRITE|READ> [row|hexdata]`.
//! WRITE data is the row's little-endian byte string in hex (bitline `8k` is
//! the least significant bit of byte `k`). Blank lines and `#` comments are
//! ignored.

use std::fmt;

use crate::bits::BitRow;
use crate::decoder::RowAddress;

use super::EngineError;

#[derive(Clone, Debug, PartialEq)]
pub enum CommandKind {
    Act(RowAddress),
    Pre,
    Write(BitRow),
    Read,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub time: f64,
    pub kind: CommandKind,
}

impl Command {
    pub fn new(time: f64, kind: CommandKind) -> Self {
        Self { time, kind }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CommandKind::Act(r) => write!(f, "{} ACT {}", self.time, r.0),
            CommandKind::Pre => write!(f, "{} PRE", self.time),
            CommandKind::Write(bits) => write!(f, "{} WRITE {}", self.time, bits.to_hex()),
            CommandKind::Read => write!(f, "{} READ", self.time),
        }
    }
}

/// A command sequence with strictly increasing, finite, non-negative times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandTrace {
    commands: Vec<Command>,
}

impl CommandTrace {
    pub fn new(commands: Vec<Command>) -> Result<Self, EngineError> {
        let mut prev = f64::NEG_INFINITY;
        for (i, c) in commands.iter().enumerate() {
            if !c.time.is_finite() || c.time < 0.0 || c.time <= prev {
                return Err(EngineError::MalformedTrace {
                    line: i + 1,
                    reason: format!("time {} is not after {}", c.time, prev),
                });
            }
            prev = c.time;
        }
        Ok(Self { commands })
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.commands.last().map_or(0.0, |c| c.time)
    }

    /// Appends `other` shifted so that it starts `offset` after this trace's
    /// last command (or at `offset` if this trace is empty).
    pub fn append_shifted(&mut self, other: &CommandTrace, offset: f64) -> Result<(), EngineError> {
        let base = if self.commands.is_empty() {
            offset
        } else {
            self.end_time() + offset
        };
        let mut all = std::mem::take(&mut self.commands);
        all.extend(
            other
                .commands
                .iter()
                .map(|c| Command::new(base + c.time, c.kind.clone())),
        );
        *self = Self::new(all)?;
        Ok(())
    }

    pub fn parse(text: &str, n_bitlines: usize) -> Result<Self, EngineError> {
        let mut commands = Vec::new();
        let mut line_of = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| EngineError::MalformedTrace {
                line: idx + 1,
                reason,
            };
            let mut parts = line.split_whitespace();
            let time: f64 = parts
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|_| bad("bad timestamp".into()))?;
            let op = parts.next().ok_or_else(|| bad("missing command".into()))?;
            let arg = parts.next();
            if parts.next().is_some() {
                return Err(bad("trailing tokens".into()));
            }
            let kind = match (op.to_ascii_uppercase().as_str(), arg) {
                ("ACT", Some(a)) => CommandKind::Act(RowAddress(
                    a.parse()
                        .map_err(|_| bad(format!("bad row address {a:?}")))?,
                )),
                ("PRE", None) => CommandKind::Pre,
                ("READ", None) => CommandKind::Read,
                ("WRITE", Some(h)) => {
                    CommandKind::Write(BitRow::from_hex(n_bitlines, h).ok_or_else(|| {
                        bad(format!("WRITE data is not {n_bitlines} bits of hex"))
                    })?)
                }
                (other, _) => return Err(bad(format!("unexpected {other:?} with {arg:?}"))),
            };
            commands.push(Command::new(time, kind));
            line_of.push(idx + 1);
        }
        Self::new(commands).map_err(|e| match e {
            EngineError::MalformedTrace { line, reason } => EngineError::MalformedTrace {
                line: line_of[line - 1],
                reason,
            },
            other => other,
        })
    }
}

impl fmt::Display for CommandTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.commands {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        let text = "# mrc\n0 ACT 256\n32 PRE\n34.5 act 287\n48 WRITE 0f00\n50 READ\n";
        let t = CommandTrace::parse(text, 16).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.commands()[2].kind, CommandKind::Act(RowAddress(287)));
        assert_eq!(CommandTrace::parse(&t.to_string(), 16).unwrap(), t);
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = |s: &str| CommandTrace::parse(s, 16).unwrap_err();
        assert!(matches!(
            err("0 ACT"),
            EngineError::MalformedTrace { line: 1, .. }
        ));
        assert!(matches!(
            err("0 ACT 1\n\n0 PRE"),
            EngineError::MalformedTrace { line: 3, .. }
        ));
        assert!(matches!(
            err("0 WRITE zz"),
            EngineError::MalformedTrace { .. }
        ));
        assert!(matches!(err("0 NOP"), EngineError::MalformedTrace { .. }));
    }

    #[test]
    fn append_shifted_offsets_times() {
        let a = CommandTrace::parse("0 ACT 1\n32 PRE", 8).unwrap();
        let mut t = a.clone();
        t.append_shifted(&a, 13.5).unwrap();
        assert_eq!(t.commands()[2].time, 45.5);
        assert_eq!(t.end_time(), 77.5);
    }
}
