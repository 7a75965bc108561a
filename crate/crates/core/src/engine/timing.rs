use serde::{Deserialize, Serialize};

use super::trace::{CommandKind, CommandTrace};
use super::EngineError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingParams {
    pub t_ras: f64,
    pub t_rp: f64,
    /// Gaps below this count as "immediately".
    pub t_violation: f64,
    pub t_faw: f64,
    pub max_acts_in_faw: usize,
    pub t_rcd: f64,
    pub t_wr: f64,
    /// Gap used for both halves of a violated APA when generating traces.
    pub apa_gap: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            t_ras: 32.0,
            t_rp: 13.5,
            t_violation: 3.0,
            t_faw: 25.0,
            max_acts_in_faw: 4,
            t_rcd: 13.5,
            t_wr: 15.0,
            apa_gap: 2.5,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        let all = [
            self.t_ras,
            self.t_rp,
            self.t_violation,
            self.t_faw,
            self.t_rcd,
            self.t_wr,
            self.apa_gap,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) || self.max_acts_in_faw == 0 {
            return Err(EngineError::InvalidTiming(
                "timings must be positive".into(),
            ));
        }
        if !(self.t_violation < self.t_rp && self.t_rp < self.t_ras) {
            return Err(EngineError::InvalidTiming(
                "need t_violation < t_rp < t_ras".into(),
            ));
        }
        if self.apa_gap >= self.t_violation {
            return Err(EngineError::InvalidTiming(
                "apa_gap must be below t_violation".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ApaRegime {
    Normal,
    Mrc,
    ChargeShare,
    Undefined,
}

/// Regime of ACT -> PRE (gap1) -> ACT (gap2).
pub fn classify_apa(gap1: f64, gap2: f64, timing: &TimingParams) -> ApaRegime {
    if gap1 >= timing.t_ras && gap2 >= timing.t_rp {
        ApaRegime::Normal
    } else if gap1 >= timing.t_ras && gap2 < timing.t_violation {
        ApaRegime::Mrc
    } else if gap1 < timing.t_violation && gap2 < timing.t_violation {
        ApaRegime::ChargeShare
    } else {
        ApaRegime::Undefined
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FawViolation {
    pub window_start: f64,
    /// Indices into the trace of the ACTs inside the window.
    pub acts: Vec<usize>,
}

/// Every window `[t, t + t_faw)` starting at an ACT that holds more than
/// `max_acts_in_faw` ACTs.
pub fn check_power(trace: &CommandTrace, timing: &TimingParams) -> Vec<FawViolation> {
    let acts: Vec<(usize, f64)> = trace
        .commands()
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c.kind, CommandKind::Act(_)))
        .map(|(i, c)| (i, c.time))
        .collect();
    let mut out = Vec::new();
    let mut end = 0;
    for start in 0..acts.len() {
        let t0 = acts[start].1;
        end = end.max(start);
        while end < acts.len() && acts[end].1 < t0 + timing.t_faw {
            end += 1;
        }
        if end - start > timing.max_acts_in_faw {
            out.push(FawViolation {
                window_start: t0,
                acts: acts[start..end].iter().map(|a| a.0).collect(),
            });
        }
    }
    out
}

/// Time each command keeps the bank busy after it issues, when it is the
/// last command of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CommandDurations {
    pub act: f64,
    pub pre: f64,
    pub write: f64,
    pub read: f64,
}

impl Default for CommandDurations {
    fn default() -> Self {
        Self::from_timing(&TimingParams::default())
    }
}

impl CommandDurations {
    pub fn from_timing(t: &TimingParams) -> Self {
        Self {
            act: t.t_ras,
            pre: t.t_rp,
            write: t.t_wr,
            read: t.t_rcd,
        }
    }
}

pub fn trace_latency(trace: &CommandTrace, durations: &CommandDurations) -> f64 {
    let Some(last) = trace.commands().last() else {
        return 0.0;
    };
    last.time
        + match last.kind {
            CommandKind::Act(_) => durations.act,
            CommandKind::Pre => durations.pre,
            CommandKind::Write(_) => durations.write,
            CommandKind::Read => durations.read,
        }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::RowAddress;
    use crate::engine::trace::Command;
    use proptest::prelude::*;

    fn acts(times: &[f64]) -> CommandTrace {
        CommandTrace::new(
            times
                .iter()
                .map(|&t| Command::new(t, CommandKind::Act(RowAddress(0))))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn classify_examples() {
        let t = TimingParams::default();
        assert_eq!(classify_apa(32.0, 13.5, &t), ApaRegime::Normal);
        assert_eq!(classify_apa(32.0, 2.5, &t), ApaRegime::Mrc);
        assert_eq!(classify_apa(2.5, 2.5, &t), ApaRegime::ChargeShare);
        assert_eq!(classify_apa(10.0, 2.5, &t), ApaRegime::Undefined);
        assert_eq!(classify_apa(32.0, 5.0, &t), ApaRegime::Undefined);
    }

    #[test]
    fn default_timing_is_valid() {
        TimingParams::default().validate().unwrap();
        let bad = TimingParams {
            t_rp: 40.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn faw_examples() {
        let t = TimingParams::default();
        assert!(check_power(&acts(&[0.0, 5.0, 10.0, 15.0]), &t).is_empty());
        assert_eq!(
            check_power(&acts(&[0.0, 5.0, 10.0, 15.0, 20.0]), &t).len(),
            1
        );
        assert!(check_power(&acts(&[0.0, 12.5, 25.0, 37.5, 50.0]), &t).is_empty());
    }

    #[test]
    fn latency_examples() {
        let d = CommandDurations::default();
        assert_eq!(trace_latency(&CommandTrace::default(), &d), 0.0);
        let pair = CommandTrace::new(vec![
            Command::new(0.0, CommandKind::Act(RowAddress(1))),
            Command::new(32.0, CommandKind::Pre),
        ])
        .unwrap();
        assert_eq!(trace_latency(&pair, &d), 32.0 + 13.5);
        let mrc = CommandTrace::new(vec![
            Command::new(0.0, CommandKind::Act(RowAddress(1))),
            Command::new(32.0, CommandKind::Pre),
            Command::new(35.0, CommandKind::Act(RowAddress(2))),
        ])
        .unwrap();
        assert_eq!(trace_latency(&mrc, &d), 32.0 + 3.0 + d.act);
    }

    proptest! {
        #[test]
        fn faw_matches_window_oracle(mut times in prop::collection::vec(0u32..2000, 0..40)) {
            times.sort_unstable();
            times.dedup();
            let times: Vec<f64> = times.iter().map(|&t| t as f64 / 4.0).collect();
            let t = TimingParams::default();
            let got = check_power(&acts(&times), &t);
            let mut want = Vec::new();
            for &t0 in &times {
                let inside: Vec<usize> = times
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x >= t0 && x < t0 + t.t_faw)
                    .map(|(i, _)| i)
                    .collect();
                if inside.len() > t.max_acts_in_faw {
                    want.push((t0, inside));
                }
            }
            let got: Vec<_> = got.into_iter().map(|v| (v.window_start, v.acts)).collect();
            prop_assert_eq!(got, want);
        }
    }
}
